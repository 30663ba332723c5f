"""Systoles of unimodular lattices Z^d g, Siegel reduction and the height function 1/s.

Lattices are spanned by the rows of g, and Gamma acts on the left.  With
g = n exp(a) k (n upper unipotent) the last row has length a_d and
Gram-Schmidt runs from the last row upwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import boundary, intlinalg, lie

# Hermite constants gamma_d: s(g)^2 <= gamma_d for unimodular lattices
HERMITE = {1: 1.0, 2: 2.0 / math.sqrt(3.0), 3: 2.0 ** (1.0 / 3.0), 4: math.sqrt(2.0)}

SIEGEL_S0 = 1.0
SIEGEL_U0 = 0.8


def height_floor(d: int) -> float:
    """Smallest possible value of 1/s on unimodular lattices in R^d."""
    return 1.0 / math.sqrt(HERMITE[d])


def _box(bounds) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bounds], indexing="ij")
    return np.array(grids).reshape(len(bounds), -1).T


def systole(g) -> tuple[float, np.ndarray]:
    """Length of the shortest nonzero vector of Z^d g and its integer coefficients.

    Exhaustive within the radius of the shortest reduced basis vector.  Ties
    are broken towards the lexicographically largest coefficient vector with
    a positive leading entry.
    """
    b = np.asarray(g, dtype=float)
    red, u = intlinalg.lll_float(b)
    r = float(np.min(np.linalg.norm(red, axis=1)))
    inv = np.linalg.inv(red)
    bounds = [int(math.floor(r * np.linalg.norm(inv[:, i]) * (1 + 1e-9))) for i in range(b.shape[0])]
    coeffs = _box(bounds)
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    norms = np.linalg.norm(coeffs @ red, axis=1)
    best = norms.min()
    cand = coeffs[norms <= best * (1 + 1e-12)] @ u
    lead = cand[np.arange(cand.shape[0]), np.argmax(cand != 0, axis=1)]
    cand = cand * np.sign(lead)[:, None]
    pick = sorted(map(tuple, cand.tolist()), reverse=True)[0]
    w = np.array(pick, dtype=np.int64)
    return float(np.linalg.norm(w @ b)), w


def systole_value(g) -> float:
    return systole(g)[0]


@dataclass
class SiegelForm:
    """gamma g = n exp(a) k with n size-reduced and consecutive ratios of exp(a) above u0."""

    gamma: np.ndarray
    n: np.ndarray
    a: np.ndarray
    k: np.ndarray
    s0: float = SIEGEL_S0
    u0: float = SIEGEL_U0

    def reduced(self) -> np.ndarray:
        return self.n @ np.diag(np.exp(self.a)) @ self.k

    def n_norm(self) -> float:
        return float(np.abs(np.triu(self.n, 1)).max()) if self.n.shape[0] > 1 else 0.0

    def ratios(self) -> np.ndarray:
        return np.exp(-np.diff(self.a))

    def in_domain(self) -> bool:
        return self.n_norm() <= self.s0 + 1e-12 and bool(np.all(self.ratios() > self.u0))


def siegel_reduce(g, s0: float = SIEGEL_S0, u0: float = SIEGEL_U0) -> SiegelForm:
    """Reduce Gamma g into the Siegel domain N_{s0} A_{u0} K by LLL on the reversed rows."""
    if not (s0 > 0.5 and 0 < u0 < math.sqrt(3.0) / 2.0):
        raise ValueError("Siegel parameters outside the standard range")
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    _, u = intlinalg.lll_float(g[::-1])
    gamma = u[::-1, ::-1].copy()
    if round(np.linalg.det(gamma.astype(float))) < 0:
        gamma[0] = -gamma[0]
    red = gamma @ g
    iw = lie.iwasawa(red, "NAK")
    form = SiegelForm(gamma, iw.n, iw.a, iw.k, s0, u0)
    if not form.in_domain():
        raise RuntimeError("LLL output is outside the requested Siegel domain")
    return form


def siegel_bounds(form: SiegelForm) -> tuple[float, float, float]:
    """(a_d u0^(d-1), s, a_d) for the reduced representative."""
    d = form.a.size
    ad = math.exp(form.a[-1])
    return ad * form.u0 ** (d - 1), systole_value(form.reduced()), ad


def omega_level(x) -> float:
    """Height 1/s of a group element or of a Hopf point."""
    if isinstance(x, boundary.HopfPoint):
        x = boundary.hopf_inverse(x)
    return 1.0 / systole_value(x)


@dataclass
class HeightProfile:
    values: np.ndarray
    d: int

    def quantiles(self, qs=(0.5, 0.9, 0.99, 1.0)) -> dict[float, float]:
        return {float(q): float(np.quantile(self.values, q)) for q in qs}

    def above_floor(self, slack: float = 1e-9) -> bool:
        return bool(np.all(self.values >= height_floor(self.d) - slack))


@dataclass
class TorusHeightReport:
    class_key: str
    lam_norm: float
    max_height: float
    exponent: float
    profile: HeightProfile = field(repr=False)


def torus_heights(record, n_samples: int, rng: np.random.Generator) -> HeightProfile:
    from . import tori

    basis = record.period_basis()
    ys = rng.uniform(size=(n_samples, basis.shape[0])) @ basis
    pts = tori.torus_points(record, ys)
    return HeightProfile(np.array([1.0 / systole_value(p) for p in pts]), record.d)


def torus_height_check(record, n_samples: int, rng: np.random.Generator) -> TorusHeightReport:
    """Sampled maximal height on a torus and the exponent log(max height) / ||lambda||."""
    prof = torus_heights(record, n_samples, rng)
    lam = float(np.linalg.norm(record.lam))
    top = float(prof.values.max())
    return TorusHeightReport(record.class_key, lam, top, math.log(top) / lam, prof)


def fit_height_constant(reports: list[TorusHeightReport]) -> float:
    return max(r.exponent for r in reports)


@dataclass
class GrowthResult:
    b: np.ndarray | None
    height: float
    start_height: float
    weyl: tuple[int, ...] | None
    tried: int


def systole_growth_search(g, target: tuple[float, float], step_bound: float, steps: int = 400,
                          s0: float = SIEGEL_S0, u0: float = SIEGEL_U0) -> GrowthResult:
    """Find b with ||b|| <= step_bound and 1/s(g exp(b)) inside the target band.

    Moves from the Siegel representative towards the walls: the candidate
    directions are the Weyl images of minus the chamber direction of a(g).
    Returns b = None when no direction reaches the band within the bound.
    """
    g = np.asarray(g, dtype=float)
    lo, hi = target
    h0 = omega_level(g)
    if lo < h0 < hi:
        return GrowthResult(np.zeros(g.shape[0]), h0, h0, None, 0)
    form = siegel_reduce(g, s0, u0)
    y = form.a - form.a.mean()
    if np.linalg.norm(y) < 1e-12:
        y = lie.rho_vector(g.shape[0])
    y = y / np.linalg.norm(y)
    tried = 0
    best: GrowthResult | None = None
    for w in lie.weyl_group(g.shape[0]):
        direction = lie.weyl_apply(w, -y)
        for s in np.linspace(0.0, step_bound, steps + 1)[1:]:
            tried += 1
            b = s * direction
            h = omega_level(g * np.exp(b)[None, :])
            if lo < h < hi:
                if best is None or np.linalg.norm(b) < np.linalg.norm(best.b):
                    best = GrowthResult(b, h, h0, tuple(w), tried)
                break
    if best is None:
        return GrowthResult(None, h0, h0, None, tried)
    best.tried = tried
    return best


# ---------------------------------------------------------------------------
# d = 2 quotient coordinates


@dataclass
class QuotientSample:
    """Points of SL(2,Z) \\ SL(2,R) / M in reduced coordinates (x, y, theta)."""

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    acceptance: float = float("nan")

    def heights(self) -> np.ndarray:
        return np.sqrt(self.y)

    def elements(self) -> np.ndarray:
        return element_from_coordinates(self.x, self.y, self.theta)


def element_from_coordinates(x, y, theta) -> np.ndarray:
    x, y, theta = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (x, y, theta))
    c, s = np.cos(theta), np.sin(theta)
    sy = np.sqrt(y)
    b1 = np.stack([c / sy, s / sy], axis=1)
    b2 = np.stack([x / sy * c - sy * s, x / sy * s + sy * c], axis=1)
    return np.stack([b1, b2], axis=1)


def haar_sample_quotient(rng: np.random.Generator, n: int, d: int = 2) -> QuotientSample:
    """Haar probability samples via the modular fundamental domain times a uniform rotation."""
    if d != 2:
        raise NotImplementedError("quotient sampling is implemented for d = 2 only")
    xs, ys = [], []
    drawn = 0
    have = 0
    while have < n:
        m = max(16, int((n - have) * 1.15))
        x = rng.uniform(-0.5, 0.5, m)
        y = (math.sqrt(3.0) / 2.0) / rng.uniform(0.0, 1.0, m)
        ok = x * x + y * y >= 1.0
        drawn += m
        xs.append(x[ok])
        ys.append(y[ok])
        have += int(ok.sum())
    x = np.concatenate(xs)[:n]
    y = np.concatenate(ys)[:n]
    accepted = sum(a.size for a in xs)
    theta = rng.uniform(0.0, math.pi, n)
    return QuotientSample(x, y, theta, accepted / drawn)


def reduce_d2(g) -> QuotientSample:
    """Reduced coordinates of a stack of SL(2,R) elements (Gauss reduction of the row lattice)."""
    g = np.array(g, dtype=float).reshape(-1, 2, 2)
    b1, b2 = g[:, 0].copy(), g[:, 1].copy()
    for _ in range(200):
        n1 = np.einsum("ij,ij->i", b1, b1)
        mu = np.rint(np.einsum("ij,ij->i", b1, b2) / n1)
        b2 -= mu[:, None] * b1
        n2 = np.einsum("ij,ij->i", b2, b2)
        swap = n2 < n1 * (1 - 1e-14)
        if not swap.any() and not mu.any():
            break
        # (b1, b2) -> (b2, -b1) keeps the determinant
        t = b1[swap].copy()
        b1[swap] = b2[swap]
        b2[swap] = -t
    n1 = np.einsum("ij,ij->i", b1, b1)
    det = b1[:, 0] * b2[:, 1] - b1[:, 1] * b2[:, 0]
    y = det / n1
    x = np.einsum("ij,ij->i", b1, b2) / n1
    theta = np.mod(np.arctan2(b1[:, 1], b1[:, 0]), math.pi)
    return QuotientSample(x, y, theta)
