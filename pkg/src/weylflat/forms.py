"""Indefinite binary quadratic forms a x^2 + b x y + c y^2 and hyperbolic classes of SL(2, Z).

A form (a, b, c) of discriminant D > 0 is reduced when 0 < b < sqrt(D) and
sqrt(D) - b < 2|a| < sqrt(D) + b.  The reduction operator rho maps reduced
forms to reduced forms, and the proper equivalence classes of primitive forms
are exactly the rho-cycles.

Hyperbolic gamma in SL(2, Z) with trace t >= 3 correspond to pairs (u, [f])
with u^2 D = t^2 - 4, f primitive of discriminant D, via the automorph
[[(t - b u)/2, -c u], [a u, (t + b u)/2]].
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def spf_sieve(n):
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, n + 1):
        if spf[i] == 0:
            for j in range(i, n + 1, i):
                if spf[j] == 0:
                    spf[j] = i
    return spf


@njit(cache=True)
def _isqrt(n):
    if n <= 0:
        return 0
    r = int(math.sqrt(float(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True)
def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def _divisors(n, spf, buf):
    """Write the divisors of n into buf, return their number."""
    buf[0] = 1
    cnt = 1
    while n > 1:
        p = spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        base = cnt
        pk = 1
        for _ in range(e):
            pk *= p
            for i in range(base):
                buf[cnt] = buf[i] * pk
                cnt += 1
    return cnt


@njit(cache=True)
def reduced_forms_kernel(D, spf):
    """All primitive reduced forms of discriminant D as rows (a, b, c), sorted."""
    r = math.sqrt(float(D))
    out = []
    buf = np.empty(4096, dtype=np.int64)
    for b in range(1, int(r) + 1):
        if (b - D) % 2 != 0 or b * b >= D:
            continue
        n = (D - b * b) // 4
        cnt = _divisors(n, spf, buf)
        for i in range(cnt):
            e = buf[i]
            if r - b < 2 * e < r + b:
                c = n // e
                if _gcd(_gcd(e, b), c) == 1:
                    out.append((e, b, -c))
                    out.append((-e, b, c))
    res = np.empty((len(out), 3), dtype=np.int64)
    for i in range(len(out)):
        res[i, 0], res[i, 1], res[i, 2] = out[i]
    if res.shape[0] > 1:
        key = res[:, 0] * (4 * D + 1) + res[:, 1]
        res = res[np.argsort(key)]
    return res


@njit(cache=True)
def rho_step(a, b, c, D):
    """One reduction step: (a, b, c) -> (c, r, (r^2 - D) / (4 c)) with r = -b mod 2|c| placed in range."""
    sq = math.sqrt(float(D))
    m = 2 * abs(c)
    if abs(c) < sq:
        # the unique r = -b (mod 2|c|) with sqrt(D) - 2|c| < r < sqrt(D)
        r = (-b) % m
        top = int(math.floor(sq))
        r += ((top - r) // m) * m
    else:
        r = (-b) % m
        if r > abs(c):
            r -= m
    return c, r, (r * r - D) // (4 * c)


@njit(cache=True)
def cycles_kernel(D, forms):
    """Label rho-cycles.  Returns (cycle id per form, canonical form index per cycle)."""
    n = forms.shape[0]
    label = -np.ones(n, dtype=np.int64)
    key = forms[:, 0] * (4 * D + 1) + forms[:, 1]
    canon = []
    lengths = []
    ncyc = 0
    for i in range(n):
        if label[i] >= 0:
            continue
        a, b, c = forms[i, 0], forms[i, 1], forms[i, 2]
        j = i
        best = i
        length = 0
        while label[j] < 0:
            label[j] = ncyc
            length += 1
            if key[j] < key[best]:
                best = j
            a, b, c = rho_step(a, b, c, D)
            j = np.searchsorted(key, a * (4 * D + 1) + b)
        canon.append(best)
        lengths.append(length)
        ncyc += 1
    return label, np.array(canon, dtype=np.int64), np.array(lengths, dtype=np.int64)


@njit(cache=True)
def census_kernel(t_max, spf):
    """All (trace, u, D, a, b, c, t0, u0) with 3 <= trace <= t_max, one row per hyperbolic class.

    (t0, u0) is the smallest solution of x^2 - D y^2 = 4 seen while scanning traces
    upward, i.e. the fundamental one, and (a, b, c) the canonical reduced form.
    """
    rows = []
    d_max = t_max * t_max - 4
    first_t = np.zeros(d_max + 1, dtype=np.int64)
    first_u = np.zeros(d_max + 1, dtype=np.int64)
    for tr in range(3, t_max + 1):
        d0 = tr * tr - 4
        for u in range(1, _isqrt(d0) + 1):
            if d0 % (u * u) != 0:
                continue
            D = d0 // (u * u)
            if D % 4 != 0 and D % 4 != 1:
                continue
            if first_t[D] == 0:
                first_t[D] = tr
                first_u[D] = u
            forms = reduced_forms_kernel(D, spf)
            _, canon, _ = cycles_kernel(D, forms)
            for k in range(canon.shape[0]):
                f = forms[canon[k]]
                rows.append((tr, u, D, f[0], f[1], f[2], first_t[D], first_u[D]))
    res = np.empty((len(rows), 8), dtype=np.int64)
    for i in range(len(rows)):
        for j in range(8):
            res[i, j] = rows[i][j]
    return res


_SPF_CACHE: dict[int, np.ndarray] = {}


def _spf(n: int) -> np.ndarray:
    for size, arr in _SPF_CACHE.items():
        if size >= n:
            return arr
    size = max(n, 1024)
    arr = spf_sieve(size)
    _SPF_CACHE.clear()
    _SPF_CACHE[size] = arr
    return arr


def reduced_forms(D: int) -> np.ndarray:
    if D <= 0 or math.isqrt(D) ** 2 == D or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a non-square positive discriminant")
    return reduced_forms_kernel(D, _spf(D // 4 + 1))


def form_cycles(D: int) -> list[list[tuple[int, int, int]]]:
    """rho-cycles of primitive reduced forms, each starting at its canonical (smallest) form."""
    forms = reduced_forms(D)
    _, canon, lengths = cycles_kernel(D, forms)
    cycles = []
    for k, length in zip(canon, lengths):
        a, b, c = (int(x) for x in forms[k])
        cyc = []
        for _ in range(int(length)):
            cyc.append((a, b, c))
            a, b, c = (int(x) for x in rho_step(a, b, c, D))
        cycles.append(cyc)
    return cycles


def narrow_class_number(D: int) -> int:
    """Number of proper equivalence classes of primitive forms of discriminant D."""
    return len(form_cycles(D))


def _rho_step_exact(a: int, b: int, c: int, D: int) -> tuple[int, int, int, int]:
    """Python-int reduction step, also returning s with (a,b,c) o [[0,-1],[1,s]] = result."""
    sq = math.isqrt(D)
    m = 2 * abs(c)
    r = (-b) % m
    if abs(c) * abs(c) < D:
        r += ((sq - r) // m) * m
    elif r > abs(c):
        r -= m
    s = (r + b) // (2 * c)
    return c, r, (r * r - D) // (4 * c), s


def fundamental_automorph(a: int, b: int, c: int) -> np.ndarray:
    """Generator of the proper automorphs of a primitive reduced form, from its rho-cycle.

    The result has positive trace and is returned as an object array of Python ints.
    """
    D = b * b - 4 * a * c
    start = (a, b, c)
    m = [[1, 0], [0, 1]]
    f = start
    while True:
        f0, f1, f2, s = _rho_step_exact(*f, D)
        m = [[m[0][1], -m[0][0] + s * m[0][1]], [m[1][1], -m[1][0] + s * m[1][1]]]
        f = (f0, f1, f2)
        if f == start:
            break
    if m[0][0] + m[1][1] < 0:
        m = [[-x for x in row] for row in m]
    return np.array(m, dtype=object)


def pell_fundamental(D: int) -> tuple[int, int]:
    """Smallest (t, u) with t, u > 0 and t^2 - D u^2 = 4 (norm-one fundamental unit (t + u sqrt D)/2)."""
    b = D % 2
    while (b + 2) * (b + 2) < D:
        b += 2
    # principal reduced form (1, b, (b^2 - D)/4) with b maximal of the right parity
    m = fundamental_automorph(1, b, (b * b - D) // 4)
    t = int(m[0][0] + m[1][1])
    u = int(m[1][0])
    return t, abs(u)


def automorph_matrix(t: int, u: int, form: tuple[int, int, int]) -> np.ndarray:
    a, b, c = form
    return np.array([[(t - b * u) // 2, -c * u], [a * u, (t + b * u) // 2]], dtype=np.int64)


def census_rows(t_max: int) -> np.ndarray:
    """Rows (trace, u, D, a, b, c, t0, u0) for every hyperbolic class with 3 <= trace <= t_max."""
    if t_max < 3:
        return np.empty((0, 8), dtype=np.int64)
    return census_kernel(int(t_max), _spf((t_max * t_max) // 4 + 1))
