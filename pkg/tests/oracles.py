"""Independent reference computations used only by the tests.

Each oracle reaches its answer by a route that shares no code with the
package: naive loops, brute-force boxes, Cartesian instead of polar
quadrature, or sympy.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import sympy
from scipy import integrate


def _sl_norm_ok(mats: np.ndarray, t: float, hx=None) -> np.ndarray:
    m = mats.astype(float)
    if hx is not None:
        hinv = np.linalg.inv(hx)
        m = hinv[None] @ m @ hx[None]
    s = np.linalg.svd(m, compute_uv=False)
    return np.linalg.norm(np.log(s), axis=1) <= t


def brute_force_d2(t: float, hx=None) -> set[tuple[int, ...]]:
    """SL(2,Z) elements with ||a_x(gamma)|| <= t by looping over an entry box."""
    cond = 1.0 if hx is None else float(np.linalg.cond(hx))
    b = int(math.floor(cond * math.exp(t / math.sqrt(2.0)))) + 1
    r = np.arange(-b, b + 1)
    a, bb, c, d = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    keep = a * d - bb * c == 1
    mats = np.stack([a[keep], bb[keep], c[keep], d[keep]], axis=1).reshape(-1, 2, 2)
    mats = mats[_sl_norm_ok(mats, t, hx)]
    return {tuple(m.ravel().tolist()) for m in mats}


def brute_force_d3(t: float) -> set[tuple[int, ...]]:
    """SL(3,Z) elements with ||a(gamma)|| <= t from triples of short rows."""
    # the largest coordinate of a sum-zero vector of norm t is t sqrt(2/3)
    cap = math.exp(t * math.sqrt(2.0 / 3.0))
    b = int(math.floor(cap))
    r = np.arange(-b, b + 1)
    rows = np.stack([x.ravel() for x in np.meshgrid(r, r, r, indexing="ij")], axis=1)
    rows = rows[(rows**2).sum(axis=1) <= cap * cap + 1e-9]
    rows = rows[np.any(rows != 0, axis=1)]
    out = set()
    n = rows.shape[0]
    i2, i3 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    r2, r3 = rows[i2.ravel()], rows[i3.ravel()]
    cross = np.cross(r2, r3)
    for r1 in rows:
        ok = cross @ r1 == 1
        if not ok.any():
            continue
        mats = np.stack([np.broadcast_to(r1, (int(ok.sum()), 3)), r2[ok], r3[ok]], axis=1)
        mats = mats[_sl_norm_ok(mats, t)]
        out.update(tuple(m.ravel().tolist()) for m in mats)
    return out


# ---------------------------------------------------------------------------
# indefinite binary quadratic forms, Zagier reduction


def _zagier_reduced(D: int) -> list[tuple[int, int, int]]:
    """Primitive forms (A, B, C) of discriminant D with A, C > 0 and B > A + C."""
    out = []
    for A in range(1, D):
        for C in range(1, D - A):
            B2 = D + 4 * A * C
            B = math.isqrt(B2)
            if B * B == B2 and B > A + C and math.gcd(math.gcd(A, B), C) == 1:
                out.append((A, B, C))
    return out


def _zagier_step(f: tuple[int, int, int], D: int) -> tuple[int, int, int]:
    A, B, C = f
    # n = ceil((B + sqrt D) / 2C), computed in integers
    m = (B + math.isqrt(D)) // (2 * C)
    while 2 * C * (m + 1) - B < 0 or (2 * C * (m + 1) - B) ** 2 < D:
        m += 1
    n = m + 1
    return C, -B + 2 * n * C, A - B * n + C * n * n


def zagier_class_number(D: int) -> int:
    """Narrow class number of primitive forms of non-square discriminant D."""
    reduced = set(_zagier_reduced(D))
    seen: set[tuple[int, int, int]] = set()
    cycles = 0
    for f in sorted(reduced):
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            if g not in reduced:
                raise AssertionError(f"step left the reduced set at {g} for D={D}")
            seen.add(g)
            g = _zagier_step(g, D)
    return cycles


def is_discriminant(D: int) -> bool:
    return D > 0 and D % 4 in (0, 1) and math.isqrt(D) ** 2 != D


def pell_bruteforce(D: int, limit: int = 10**7) -> tuple[int, int]:
    """Smallest (t, u), u >= 1, with t^2 - D u^2 = 4."""
    for u in range(1, limit):
        t2 = D * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
    raise ValueError("no solution below the limit")


# ---------------------------------------------------------------------------
# lattices and geometry


def systole_bruteforce(g, box: int | None = None) -> float:
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if box is None:
        # a shortest vector v = c g has |c_i| <= ||v|| ||g^-1|| <= (shortest row) ||g^-1||
        bound = np.linalg.norm(g, axis=1).min() * np.linalg.norm(np.linalg.inv(g), 2)
        box = int(math.floor(bound + 1e-9))
    r = np.arange(-box, box + 1)
    coeffs = np.stack([x.ravel() for x in np.meshgrid(*([r] * d), indexing="ij")], axis=1)
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    return float(np.linalg.norm(coeffs @ g, axis=1).min())


def flat_distance_grid_d2(hx, g0, span: float = 12.0, n: int = 4001) -> float:
    """min over s of dX(hx.o, g0 exp(s, -s).o): a grid scan then ternary refinement."""
    hx = np.asarray(hx, dtype=float)
    g0 = np.asarray(g0, dtype=float)

    def dist(s):
        p = g0 @ np.diag([math.exp(s), math.exp(-s)])
        sv = np.linalg.svd(np.linalg.solve(hx, p), compute_uv=False)
        return float(np.linalg.norm(np.log(sv)))

    grid = np.linspace(-span, span, n)
    vals = [dist(s) for s in grid]
    j = int(np.argmin(vals))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, n - 1)]
    for _ in range(100):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if dist(m1) < dist(m2):
            hi = m2
        else:
            lo = m1
    return dist(0.5 * (lo + hi))


def irreducible_sympy(coeffs: list[int]) -> bool:
    x = sympy.Symbol("x")
    _, factors = sympy.factor_list(sympy.Poly(coeffs, x))
    return len(factors) == 1 and factors[0][1] == 1


def vol_d3_cartesian(t: float, s: float | None = None) -> float:
    """Chamber integral of prod sinh(v_i - v_j) in orthonormal plane coordinates.

    x runs along (2, -1, -1)/sqrt 6 and y along (0, 1, -1)/sqrt 2; the chamber
    is 0 <= y <= sqrt(3) x.  With s given, only points within s of a wall count.
    """
    e1 = np.array([2.0, -1.0, -1.0]) / math.sqrt(6.0)
    e2 = np.array([0.0, 1.0, -1.0]) / math.sqrt(2.0)

    def f(x, y):
        v = x * e1 + y * e2
        if s is not None:
            gap = min(v[0] - v[1], v[1] - v[2]) / math.sqrt(2.0)
            if gap > s:
                return 0.0
        return math.sinh(v[0] - v[1]) * math.sinh(v[0] - v[2]) * math.sinh(v[1] - v[2])

    ymax = t * math.sin(math.pi / 3)
    val, _ = integrate.dblquad(
        f, 0.0, ymax, lambda y: y / math.sqrt(3.0), lambda y: math.sqrt(max(t * t - y * y, 0.0)),
        epsabs=0.0, epsrel=1e-11,
    )
    return val


def gauss_reduce_2x2(g) -> tuple[float, float]:
    """(x, y) of the row lattice by the textbook swap-and-translate loop, one matrix at a time."""
    b1, b2 = np.array(g[0], dtype=float), np.array(g[1], dtype=float)
    while True:
        if b2 @ b2 < b1 @ b1:
            b1, b2 = b2, -b1
        mu = round(float(b1 @ b2) / float(b1 @ b1))
        if mu == 0:
            break
        b2 = b2 - mu * b1
    n1 = float(b1 @ b1)
    return float(b1 @ b2) / n1, float(b1[0] * b2[1] - b1[1] * b2[0]) / n1


def weyl_min_distance(lam, ax) -> float:
    return min(float(np.linalg.norm(np.asarray(lam)[list(w)] - ax))
               for w in itertools.permutations(range(len(lam))))
