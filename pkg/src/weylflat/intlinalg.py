"""Exact integer linear algebra on small matrices (Python ints)."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def _to_int_rows(m) -> list[list[int]]:
    return [[int(x) for x in row] for row in np.asarray(m, dtype=object)]


def hnf_rows(m) -> list[list[int]]:
    """Row Hermite normal form; zero rows dropped.  Spans the same row lattice."""
    a = _to_int_rows(m)
    if not a:
        return []
    rows, cols = len(a), len(a[0])
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # Euclid on column c among rows r..
        while True:
            nz = [i for i in range(r, rows) if a[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[p] = a[p], a[r]
            done = True
            for i in range(r + 1, rows):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [row for row in a[:r]]


def integer_kernel(m) -> list[list[int]]:
    """Z-basis of {x in Z^n : m x = 0}, via unimodular column reduction."""
    a = _to_int_rows(m)
    rows, n = len(a), len(a[0])
    # work on [m; I] and column-reduce m to echelon form
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    cols = [[a[i][j] for i in range(rows)] + [u[i][j] for i in range(n)] for j in range(n)]
    piv = 0
    for r in range(rows):
        if piv == n:
            break
        while True:
            nz = [j for j in range(piv, n) if cols[j][r] != 0]
            if not nz:
                break
            p = min(nz, key=lambda j: abs(cols[j][r]))
            cols[piv], cols[p] = cols[p], cols[piv]
            done = True
            for j in range(piv + 1, n):
                if cols[j][r]:
                    q = cols[j][r] // cols[piv][r]
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[piv])]
                    if cols[j][r]:
                        done = False
            if done:
                break
        if cols[piv][r] != 0:
            piv += 1
    return [col[rows:] for col in cols[piv:]]


def lll_int(basis, delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """Exact LLL on integer row vectors (textbook, rational Gram-Schmidt)."""
    b = [list(map(int, v)) for v in basis]
    n = len(b)

    def dot(x, y):
        return sum(p * q for p, q in zip(x, y))

    def gso():
        bstar, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bstar[j])) / dot(bstar[j], bstar[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
        return bstar, mu

    bstar, mu = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bstar, mu = gso()
        if dot(bstar[k], bstar[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bstar[k - 1], bstar[k - 1]):
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bstar, mu = gso()
            k = max(k - 1, 1)
    return b


def lll_float(rows: np.ndarray, delta: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """LLL on real row vectors.  Returns (reduced rows, integer transform U) with U @ rows."""
    b = np.array(rows, dtype=float)
    n = b.shape[0]
    u = np.eye(n, dtype=np.int64)

    def gso(b):
        bstar = np.zeros_like(b)
        mu = np.zeros((n, n))
        for i in range(n):
            bstar[i] = b[i]
            for j in range(i):
                mu[i, j] = b[i] @ bstar[j] / (bstar[j] @ bstar[j])
                bstar[i] = bstar[i] - mu[i, j] * bstar[j]
        return bstar, mu

    bstar, mu = gso(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = int(np.rint(mu[k, j]))
            if q:
                b[k] -= q * b[j]
                u[k] -= q * u[j]
                bstar, mu = gso(b)
        if bstar[k] @ bstar[k] >= (delta - mu[k, k - 1] ** 2) * (bstar[k - 1] @ bstar[k - 1]):
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            u[[k, k - 1]] = u[[k - 1, k]]
            bstar, mu = gso(b)
            k = max(k - 1, 1)
    return b, u


def lll_reduce_int(basis) -> list[list[int]]:
    """Reduce integer rows with float LLL; the unimodular transform is applied exactly."""
    b = _to_int_rows(basis)
    if len(b) <= 1:
        return b
    _, u = lll_float(np.array(b, dtype=float))
    return [[sum(int(u[i, k]) * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(b))]


def det_int(m) -> int:
    """Exact determinant by cofactor expansion (intended for d <= 4)."""
    a = _to_int_rows(m)
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = 0
    for j in range(n):
        if a[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in a[1:]]
            total += (-1) ** j * a[0][j] * det_int(minor)
    return total


def batch_det(m: np.ndarray) -> np.ndarray:
    """Exact int64 determinants of a stack of 2x2 or 3x3 integer matrices."""
    if m.shape[-1] == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if m.shape[-1] == 3:
        return (
            m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
        )
    raise ValueError("batch_det supports 2x2 and 3x3 only")


def batch_adjugate(m: np.ndarray) -> np.ndarray:
    """Exact int64 adjugates (adj(m) @ m = det(m) I) of 2x2 or 3x3 stacks."""
    if m.shape[-1] == 2:
        out = np.empty_like(m)
        out[..., 0, 0] = m[..., 1, 1]
        out[..., 1, 1] = m[..., 0, 0]
        out[..., 0, 1] = -m[..., 0, 1]
        out[..., 1, 0] = -m[..., 1, 0]
        return out
    if m.shape[-1] == 3:
        out = np.empty_like(m)
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != j]
                c = [k for k in range(3) if k != i]
                minor = m[..., r[0], c[0]] * m[..., r[1], c[1]] - m[..., r[0], c[1]] * m[..., r[1], c[0]]
                out[..., i, j] = minor if (i + j) % 2 == 0 else -minor
        return out
    raise ValueError("batch_adjugate supports 2x2 and 3x3 only")
