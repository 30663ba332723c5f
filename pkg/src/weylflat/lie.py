"""Cartan subspace geometry and matrix decompositions for SL(d, R).

Cartan vectors are plain 1-d float arrays of length d with zero sum.  The
inner product on the Cartan subspace is the trace form, which on sum-zero
vectors is the Euclidean one; the Killing form differs by sqrt(2 d).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

TOL = 1e-9
CHAMBER_MARGIN = 1e-8
MAX_CONDITION = 1e12


class DegenerateInput(ValueError):
    pass


# ---------------------------------------------------------------------------
# Cartan vectors and the root system of sl(d)


def cartan_vector(entries) -> np.ndarray:
    v = np.asarray(entries, dtype=float).copy()
    v -= v.mean()
    return v


def sorted_descending(v) -> np.ndarray:
    return np.sort(np.asarray(v, dtype=float))[::-1]


def in_closed_chamber(v, margin: float = CHAMBER_MARGIN) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.diff(v) <= margin))


def in_open_chamber(v, margin: float = CHAMBER_MARGIN) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(np.all(-np.diff(v) > margin))


def simple_roots(v) -> np.ndarray:
    """Values alpha_i(v) = v_i - v_{i+1}, i = 1..d-1."""
    v = np.asarray(v, dtype=float)
    return v[:-1] - v[1:]


def alpha_i(v, i: int) -> float:
    v = np.asarray(v, dtype=float)
    return float(v[i - 1] - v[i])


def chi_i(v, i: int) -> float:
    """Fundamental weight chi^i(v) = v_1 + ... + v_i."""
    return float(np.sum(np.asarray(v, dtype=float)[:i]))


def chi_all(v) -> np.ndarray:
    return np.cumsum(np.asarray(v, dtype=float))[:-1]


def from_chi(c) -> np.ndarray:
    """Inverse of `chi_all`: the sum-zero vector with the given partial sums."""
    c = np.asarray(c, dtype=float)
    full = np.concatenate(([0.0], c, [0.0]))
    return np.diff(full)


def rho(v) -> float:
    """Half-sum of positive roots, sum_{i<j} (v_i - v_j) / 2."""
    v = np.asarray(v, dtype=float)
    d = v.size
    return float(np.dot((d + 1 - 2 * np.arange(1, d + 1)) / 2.0, v))


def rho_vector(d: int) -> np.ndarray:
    """Trace-form dual of rho; already sum-zero."""
    return (d + 1 - 2 * np.arange(1, d + 1)) / 2.0


def opposition(v) -> np.ndarray:
    return -np.asarray(v, dtype=float)[::-1]


def weyl_apply(w, v) -> np.ndarray:
    """Permute coordinates: out[i] = v[w[i]]."""
    return np.asarray(v, dtype=float)[np.asarray(w)]


def weyl_group(d: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(d)))


def wall_distance(v) -> float:
    """Euclidean distance from v in the closed chamber to its boundary."""
    return float(np.min(simple_roots(v))) / np.sqrt(2.0)


def chi_comparison_constant(d: int) -> float:
    """Smallest C with ||v||/sqrt(C) <= max_i |chi^i(v)| <= sqrt(C) ||v||."""
    upper = max(i * (d - i) / d for i in range(1, d))
    lower = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=d - 1):
        lower = max(lower, float(np.sum(from_chi(signs) ** 2)))
    return max(upper, lower)


@dataclass(frozen=True)
class WeylGeometry:
    d: int

    def positive_roots(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.d) for j in range(i + 1, self.d)]

    def chi_gram(self) -> np.ndarray:
        basis = np.array([[1.0] * i + [0.0] * (self.d - i) for i in range(1, self.d)])
        basis -= basis.mean(axis=1, keepdims=True)
        return basis @ basis.T

    def weyl_group(self) -> list[tuple[int, ...]]:
        return weyl_group(self.d)


# ---------------------------------------------------------------------------
# Group elements and decompositions


def as_group_element(g) -> np.ndarray:
    """Return a float copy of g rescaled to determinant one."""
    g = np.array(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DegenerateInput("expected a square matrix")
    det = np.linalg.det(g)
    if det <= 0:
        raise DegenerateInput(f"determinant {det} is not positive")
    return g / det ** (1.0 / g.shape[0])


def _check_condition(s: np.ndarray) -> None:
    if s[-1] <= 0 or s[0] / s[-1] > MAX_CONDITION:
        raise DegenerateInput("matrix is numerically singular")


@dataclass(frozen=True)
class KAKDecomposition:
    k: np.ndarray
    a: np.ndarray
    l: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.k * np.exp(self.a)) @ self.l.T


@dataclass(frozen=True)
class IwasawaDecomposition:
    k: np.ndarray
    a: np.ndarray
    n: np.ndarray
    order: str

    def reconstruct(self) -> np.ndarray:
        if self.order == "KAN":
            return (self.k * np.exp(self.a)) @ self.n
        return (self.n * np.exp(self.a)) @ self.k


@dataclass(frozen=True)
class JordanData:
    lam: np.ndarray
    eigenvalues: np.ndarray | None
    eigenbasis: np.ndarray | None

    @property
    def loxodromic(self) -> bool:
        return self.eigenbasis is not None and in_open_chamber(self.lam)


def cartan_kak(g) -> KAKDecomposition:
    g = np.asarray(g, dtype=float)
    u, s, vt = np.linalg.svd(g)
    _check_condition(s)
    k, l = u.copy(), vt.T.copy()
    # per-column sign so the largest-magnitude entry of each column of k is positive
    for j in range(k.shape[1]):
        i = int(np.argmax(np.abs(k[:, j])))
        if k[i, j] < 0:
            k[:, j] *= -1
            l[:, j] *= -1
    if np.linalg.det(k) < 0:
        k[:, -1] *= -1
        l[:, -1] *= -1
    return KAKDecomposition(k, np.log(s), l)


def cartan_projection(g) -> np.ndarray:
    s = np.linalg.svd(np.asarray(g, dtype=float), compute_uv=False)
    _check_condition(s)
    return np.log(s)


def iwasawa(g, order: str = "KAN") -> IwasawaDecomposition:
    """KAN: g = k exp(a) n; NAK: g = n exp(a) k.  n is upper unipotent in both."""
    g = np.asarray(g, dtype=float)
    if order == "KAN":
        q, r = np.linalg.qr(g)
        sign = np.sign(np.diag(r))
        sign[sign == 0] = 1.0
        q, r = q * sign, sign[:, None] * r
        diag = np.diag(r)
        n = r / diag[:, None]
    elif order == "NAK":
        # RQ via QR of the row-reversed transpose
        p = g[::-1, :].T
        q, r = np.linalg.qr(p)
        r = r.T[::-1, ::-1]
        q = q.T[::-1, :]
        sign = np.sign(np.diag(r))
        sign[sign == 0] = 1.0
        r, q = r * sign, sign[:, None] * q
        diag = np.diag(r)
        n = r / diag[None, :]
    else:
        raise ValueError(f"unknown order {order!r}")
    if np.any(diag <= 0):
        raise DegenerateInput("matrix is singular")
    np.fill_diagonal(n, 1.0)
    return IwasawaDecomposition(q, np.log(diag), n, order)


def _polish_root(coeffs: np.ndarray, z: complex, steps: int = 3) -> complex:
    dp = np.polyder(coeffs)
    f = np.polyval(coeffs, z)
    for _ in range(steps):
        df = np.polyval(dp, z)
        if df == 0 or f == 0:
            break
        z_new = z - f / df
        f_new = np.polyval(coeffs, z_new)
        if abs(f_new) >= abs(f):
            break
        z, f = z_new, f_new
    return z


def eigenvalues(g) -> np.ndarray:
    """Eigenvalues ordered by decreasing modulus."""
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if d == 2:
        tr, det = g[0, 0] + g[1, 1], g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        disc = tr * tr - 4 * det
        if disc >= 0:
            r = np.sqrt(disc)
            # avoid cancellation in the small root
            big = (tr + np.copysign(r, tr)) / 2 if tr != 0 else r / 2
            small = det / big if big != 0 else -big
            ev = np.array([big, small], dtype=complex)
        else:
            r = np.sqrt(-disc)
            ev = np.array([complex(tr / 2, r / 2), complex(tr / 2, -r / 2)])
    else:
        ev = np.linalg.eigvals(g).astype(complex)
        if d == 3:
            coeffs = np.poly(g)
            ev = np.array([_polish_root(coeffs, z) for z in ev])
    order = np.argsort(-np.abs(ev), kind="stable")
    return ev[order]


def jordan_projection(g, margin: float = CHAMBER_MARGIN) -> JordanData:
    g = np.asarray(g, dtype=float)
    ev = eigenvalues(g)
    lam = np.log(np.abs(ev))
    lam -= lam.mean()
    if not in_open_chamber(lam, margin):
        real = np.all(np.abs(ev.imag) <= TOL * np.maximum(1.0, np.abs(ev)))
        return JordanData(lam, ev.real.copy() if real else None, None)
    ev = ev.real
    basis = np.empty_like(g)
    for j, mu in enumerate(ev):
        # null vector of g - mu I via SVD
        _, _, vt = np.linalg.svd(g - mu * np.eye(g.shape[0]))
        v = vt[-1]
        i = int(np.argmax(np.abs(v)))
        basis[:, j] = v if v[i] > 0 else -v
    return JordanData(lam, ev, basis)


def jordan_lambda(g) -> np.ndarray:
    lam = np.log(np.abs(eigenvalues(g)))
    return lam - lam.mean()


def is_loxodromic(g, margin: float = CHAMBER_MARGIN) -> bool:
    return in_open_chamber(jordan_lambda(g), margin)


def dX(hx, hy) -> float:
    """Distance between the points hx.o and hy.o of the symmetric space."""
    return float(np.linalg.norm(cartan_projection(np.linalg.solve(hx, hy))))


def a_x(g, hx) -> np.ndarray:
    """Cartan projection of g seen from the basepoint hx.o."""
    hx = np.asarray(hx, dtype=float)
    return cartan_projection(np.linalg.solve(hx, np.asarray(g, dtype=float) @ hx))


def exp_diag(v) -> np.ndarray:
    return np.diag(np.exp(np.asarray(v, dtype=float)))


def random_sl(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    """Gaussian matrix rescaled to determinant one (sign fixed by a row flip)."""
    g = rng.normal(scale=scale, size=(d, d))
    if np.linalg.det(g) < 0:
        g[0] *= -1
    return as_group_element(g)


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q
