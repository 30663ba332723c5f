"""Full flags of R^d, their metrics, and the cocycles living on them.

A flag is stored as an orthonormal frame whose first i columns span the
i-dimensional subspace.  Metrics go through the Plücker (wedge) lines of
those subspaces, so the sign ambiguity of the frame never matters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import lie


class TransversalityError(ValueError):
    pass


class RegularityError(ValueError):
    pass


def _canonical_signs(frame: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(frame), axis=0)
    signs = np.sign(frame[idx, np.arange(frame.shape[1])])
    signs[signs == 0] = 1.0
    return frame * signs


@dataclass(frozen=True, eq=False)
class Flag:
    frame: np.ndarray

    @classmethod
    def from_basis(cls, basis) -> "Flag":
        """Flag whose i-th subspace is spanned by the first i columns of basis."""
        q, r = np.linalg.qr(np.asarray(basis, dtype=float))
        return cls(_canonical_signs(q * np.sign(np.diag(r))))

    @property
    def d(self) -> int:
        return self.frame.shape[0]

    def act(self, g) -> "Flag":
        return Flag.from_basis(np.asarray(g, dtype=float) @ self.frame)

    def rotation(self) -> np.ndarray:
        """An element of SO(d) sending the standard flag to this one."""
        k = self.frame.copy()
        if np.linalg.det(k) < 0:
            k[:, -1] *= -1
        return k

    def opposite_at_origin(self) -> "Flag":
        """The flag opposite to this one as seen from the basepoint o."""
        return Flag(_canonical_signs(self.frame[:, ::-1].copy()))


def eta0(d: int) -> Flag:
    return Flag(np.eye(d))


def zeta0(d: int) -> Flag:
    return Flag(np.eye(d)[:, ::-1].copy())


@dataclass(frozen=True)
class TransversePair:
    xi: Flag
    eta: Flag


@dataclass(frozen=True)
class HopfPoint:
    xi: Flag
    eta: Flag
    coordinate: np.ndarray = field(repr=False)

    @property
    def pair(self) -> TransversePair:
        return TransversePair(self.xi, self.eta)


# ---------------------------------------------------------------------------
# Plücker lines and the two flag metrics


def wedge(vectors: np.ndarray) -> np.ndarray:
    """Plücker coordinates of the columns of a d x i matrix."""
    d, i = vectors.shape
    rows = itertools.combinations(range(d), i)
    return np.array([np.linalg.det(vectors[list(r), :]) for r in rows])


def wedge_line(flag: Flag, i: int) -> np.ndarray:
    if not 1 <= i <= flag.d - 1:
        raise ValueError(f"index {i} out of range for d={flag.d}")
    v = wedge(flag.frame[:, :i])
    return v / np.linalg.norm(v)


def proj_dist(x, y) -> float:
    """Sine of the angle between the lines R x and R y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("zero vector has no projective class")
    x, y = x / nx, y / ny
    return float(min(1.0, np.linalg.norm(x - np.dot(x, y) * y)))


def flag_dist(xi: Flag, eta: Flag) -> float:
    return max(proj_dist(wedge_line(xi, i), wedge_line(eta, i)) for i in range(1, xi.d))


def delta_components(xi: Flag, eta: Flag) -> np.ndarray:
    """|<x^i(xi), x^i(eta_o^perp)>| for i = 1..d-1: the linear-form quotient."""
    opp = eta.opposite_at_origin()
    return np.array(
        [abs(np.dot(wedge_line(xi, i), wedge_line(opp, i))) for i in range(1, xi.d)]
    )


def flag_delta(xi: Flag, eta: Flag) -> float:
    return float(np.min(delta_components(xi, eta)))


# ---------------------------------------------------------------------------
# Cocycles


def iwasawa_cocycle(g, xi: Flag) -> np.ndarray:
    """sigma(g, xi), defined by g k_xi in K exp(sigma) N."""
    r = np.linalg.qr(np.asarray(g, dtype=float) @ xi.frame, mode="r")
    return np.log(np.abs(np.diag(r)))


def iwasawa_cocycle_wedge(g, xi: Flag) -> np.ndarray:
    """Same cocycle from chi^i(sigma) = log ||wedge^i g v^i|| / ||v^i||."""
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    chis = [np.log(np.linalg.norm(wedge(g @ xi.frame[:, :i]))) for i in range(1, d)]
    return lie.from_chi(chis)


def busemann(xi: Flag, hx, hy) -> np.ndarray:
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    return iwasawa_cocycle(np.linalg.solve(hx, hy), xi.act(np.linalg.inv(hy)))


def gromov_product(xi: Flag, eta: Flag, hx=None) -> np.ndarray:
    """The Cartan-subspace valued Gromov product (xi|eta) at the point hx.o.

    chi^i of the result is -log delta_i(eta, xi); with this pairing
    (g xi|g eta) - (xi|eta) = iota sigma(g, xi) + sigma(g, eta).
    """
    if hx is not None:
        hinv = np.linalg.inv(np.asarray(hx, dtype=float))
        xi, eta = xi.act(hinv), eta.act(hinv)
    deltas = delta_components(eta, xi)
    if np.min(deltas) < 1e-14:
        raise TransversalityError("flags are not transverse")
    return lie.from_chi(-np.log(deltas))


def gromov_kernel(xi: Flag, eta: Flag, hx=None) -> float:
    """exp(-2 rho((xi|eta))): the density of mu x mu against the invariant measure."""
    return float(np.exp(-2.0 * lie.rho(gromov_product(xi, eta, hx))))


# ---------------------------------------------------------------------------
# Hopf coordinates


def hopf_forward(g) -> HopfPoint:
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    return HopfPoint(eta0(d).act(g), zeta0(d).act(g), iwasawa_cocycle(g, eta0(d)))


def hopf_g_action(h, p: HopfPoint) -> HopfPoint:
    return HopfPoint(p.xi.act(h), p.eta.act(h), p.coordinate + iwasawa_cocycle(h, p.xi))


def hopf_a_action(p: HopfPoint, v) -> HopfPoint:
    return HopfPoint(p.xi, p.eta, p.coordinate + np.asarray(v, dtype=float))


def pair_element(xi: Flag, eta: Flag) -> np.ndarray:
    """Some g in SL(d) with g eta0 = xi and g zeta0 = eta."""
    d = xi.d
    cols = []
    for i in range(1, d + 1):
        a = xi.frame[:, :i]
        constraints = eta.frame[:, d - i + 1 :]
        if constraints.shape[1] == 0:
            c = np.array([1.0])
        else:
            m = constraints.T @ a
            _, s, vt = np.linalg.svd(m)
            if i > 1 and s[-1] < 1e-12 * max(1.0, s[0]):
                raise TransversalityError("flags are not transverse")
            c = vt[-1]
        v = a @ c
        cols.append(v / np.linalg.norm(v))
    g0 = np.column_stack(cols)
    det = np.linalg.det(g0)
    if abs(det) < 1e-14:
        raise TransversalityError("flags are not transverse")
    if det < 0:
        g0[:, -1] *= -1
        det = -det
    return g0 / det ** (1.0 / d)


def hopf_inverse(p: HopfPoint) -> np.ndarray:
    g0 = pair_element(p.xi, p.eta)
    shift = p.coordinate - iwasawa_cocycle(g0, eta0(p.xi.d))
    return g0 * np.exp(shift)


def xi_perp(hx, xi: Flag) -> Flag:
    """The flag opposite to xi as seen from the point hx.o."""
    hx = np.asarray(hx, dtype=float)
    k = xi.act(np.linalg.inv(hx)).rotation()
    return Flag.from_basis(hx @ k[:, ::-1])


def flat_distance(hx, pair: TransversePair) -> tuple[float, np.ndarray]:
    """Distance from hx.o to the flat of a transverse pair, and the argmin.

    The flat is g exp(v).o with g = pair_element(xi, eta).  d(x, .)^2 is
    convex along the flat, so a quasi-Newton descent finds the minimum.
    """
    hx = np.asarray(hx, dtype=float)
    g = pair_element(pair.xi, pair.eta)
    d = g.shape[0]
    q = np.linalg.solve(g, hx)
    basis = np.linalg.svd(np.eye(d) - 1.0 / d)[0][:, : d - 1]

    def f(w):
        v = basis @ w
        return float(np.sum(lie.cartan_projection(q * np.exp(-v)[:, None]) ** 2))

    v0 = 0.5 * np.log(np.diag(q @ q.T))
    w0 = basis.T @ (v0 - v0.mean())
    res = optimize.minimize(f, w0, method="BFGS", options={"gtol": 1e-12})
    res = optimize.minimize(f, res.x, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    return float(np.sqrt(max(res.fun, 0.0))), basis @ res.x


# ---------------------------------------------------------------------------
# The K-invariant probability on the boundary


def mu_o_sample(rng: np.random.Generator, d: int) -> Flag:
    return Flag.from_basis(rng.normal(size=(d, d)))


def mu_o_samples(rng: np.random.Generator, d: int, n: int) -> list[Flag]:
    return [mu_o_sample(rng, d) for _ in range(n)]


def quasi_density(g, xi: Flag) -> float:
    """Radon-Nikodym derivative of g_* mu_o against mu_o at xi.

    Equals exp(-2 rho(sigma(g^-1, xi))) with rho the half-sum of positive roots.
    """
    return float(np.exp(-2.0 * lie.rho(iwasawa_cocycle(np.linalg.inv(g), xi))))


# ---------------------------------------------------------------------------
# Attracting and repelling flags


def gamma_x_flags(g, hx=None, margin: float = lie.CHAMBER_MARGIN) -> tuple[Flag, Flag]:
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    hx = np.eye(d) if hx is None else np.asarray(hx, dtype=float)
    kak = lie.cartan_kak(np.linalg.solve(hx, g @ hx))
    if not lie.in_open_chamber(kak.a, margin):
        raise RegularityError("Cartan projection is not regular")
    return Flag.from_basis(hx @ kak.k), Flag.from_basis(hx @ kak.l[:, ::-1])


def eigenflags(g, margin: float = lie.CHAMBER_MARGIN) -> tuple[Flag, Flag]:
    jd = lie.jordan_projection(g, margin)
    if not jd.loxodromic:
        raise RegularityError("element is not loxodromic")
    v = jd.eigenbasis
    return Flag.from_basis(v), Flag.from_basis(v[:, ::-1])


def default_t0(eps: float, cx: float = 1.0) -> float:
    return 2.0 * np.log(cx) - 2.0 * np.log(eps)


@dataclass
class LoxodromicReport:
    wall_distance: float
    chamber_ok: bool
    flat_distance: float | None
    flat_ok: bool
    loxodromic: bool | None
    flag_errors: tuple[float, float] | None
    within_eps: bool | None


def loxodromic_config_check(g, hx, r: float, eps: float, t0: float | None = None) -> LoxodromicReport:
    """Evaluate the deep-chamber and near-flat conditions; if both hold, test
    that g is loxodromic with eigenflags eps-close to the flags seen from hx."""
    g = np.asarray(g, dtype=float)
    hx = np.asarray(hx, dtype=float)
    if t0 is None:
        t0 = default_t0(eps)
    ax = lie.a_x(g, hx)
    wd = lie.wall_distance(ax)
    chamber_ok = bool(lie.in_open_chamber(ax) and wd >= t0)
    if not chamber_ok:
        return LoxodromicReport(wd, False, None, False, None, None, None)
    plus, minus = gamma_x_flags(g, hx)
    fd, _ = flat_distance(hx, TransversePair(plus, minus))
    if fd >= r:
        return LoxodromicReport(wd, True, fd, False, None, None, None)
    lox = lie.is_loxodromic(g)
    if not lox:
        return LoxodromicReport(wd, True, fd, True, False, None, None)
    gp, gm = eigenflags(g)
    errs = (flag_dist(gp, plus), flag_dist(gm, minus))
    return LoxodromicReport(wd, True, fd, True, True, errs, bool(max(errs) <= eps))
