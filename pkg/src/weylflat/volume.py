"""Harish-Chandra volumes of Cartan balls K exp(B(0, t)) K and their wall strips.

Volumes are integrals of prod_{i<j} sinh(v_i - v_j) over the positive chamber
intersected with a ball, written in polar coordinates: a radial integral
along each chamber direction, then an integral over directions.  Only
ratios are ever consumed, so the K-factor normalization is fixed to 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import integrate, special

from . import lie

QUAD_EPSREL = 1e-10


def hc_density(v) -> float:
    v = np.asarray(v, dtype=float)
    if not lie.in_closed_chamber(v, margin=1e-12):
        raise ValueError("vector lies outside the closed positive chamber")
    diffs = (v[:, None] - v[None, :])[np.triu_indices(v.size, 1)]
    return float(np.prod(np.sinh(diffs)))


def delta0(d: int) -> float:
    return 2.0 * float(np.linalg.norm(lie.rho_vector(d)))


def _sum_zero_basis(d: int) -> np.ndarray:
    """Orthonormal basis (columns) of the sum-zero hyperplane."""
    return np.linalg.svd(np.eye(d) - 1.0 / d)[0][:, : d - 1]


def _radial_integral(direction: np.ndarray, rmax: float, power: int) -> float:
    """int_0^rmax prod sinh(r * alpha(direction)) r^power dr, factored by exp(2 rho)."""
    diffs = (direction[:, None] - direction[None, :])[np.triu_indices(direction.size, 1)]
    growth = float(np.sum(diffs))

    def f(r):
        # prod sinh(r c) = exp(r sum c) prod (1 - exp(-2 r c)) / 2
        return np.prod(-np.expm1(-2.0 * r * diffs) / 2.0) * r**power * math.exp(growth * (r - rmax))

    val, _ = integrate.quad(f, 0.0, rmax, epsrel=QUAD_EPSREL, epsabs=0.0, limit=200)
    return val * math.exp(growth * rmax)


def _d3_direction(phi: float) -> np.ndarray:
    """Unit chamber vector at angle phi in [0, pi/3] from the wall v_2 = v_3."""
    e1 = np.array([2.0, -1.0, -1.0]) / math.sqrt(6.0)
    e2 = np.array([0.0, 1.0, -1.0]) / math.sqrt(2.0)
    return math.cos(phi) * e1 + math.sin(phi) * e2


def _d3_wall_gap(phi: float) -> float:
    """Distance to the chamber walls of the unit vector at angle phi."""
    return min(math.sin(phi), math.sin(math.pi / 3 - phi))


def _volume(d: int, t: float, s: float | None) -> float:
    if t <= 0:
        return 0.0
    if d == 2:
        # the chamber is a single ray; the wall is the origin
        rmax = t if s is None else min(s, t)
        return _radial_integral(np.array([1.0, -1.0]) / math.sqrt(2.0), rmax, 0)
    if d == 3:

        def inner(phi):
            rmax = t
            if s is not None:
                gap = _d3_wall_gap(phi)
                if gap > 0:
                    rmax = min(t, s / gap)
            return _radial_integral(_d3_direction(phi), rmax, 1)

        # the integrand is symmetric about the chamber bisector
        scale = _radial_integral(_d3_direction(math.pi / 6), t, 1)
        val, _ = integrate.quad(
            lambda p: inner(p) / scale, 0.0, math.pi / 6, epsrel=QUAD_EPSREL, epsabs=0.0, limit=200
        )
        return 2.0 * val * scale
    return _volume_mc(d, t, s, np.random.default_rng(0), 4000)[0]


def _volume_mc(d: int, t: float, s: float | None, rng: np.random.Generator, n: int) -> tuple[float, float]:
    """Directions sampled uniformly in the chamber, exact radial quadrature."""
    basis = _sum_zero_basis(d)
    sphere = 2 * math.pi ** ((d - 1) / 2) / special.gamma((d - 1) / 2)
    area = sphere / math.factorial(d)
    vals = np.empty(n)
    for j in range(n):
        u = basis @ rng.normal(size=d - 1)
        u = np.sort(u / np.linalg.norm(u))[::-1]
        rmax = t
        if s is not None:
            gap = lie.wall_distance(u)
            if gap > 0:
                rmax = min(t, s / gap)
        vals[j] = _radial_integral(u, rmax, d - 2)
    return area * float(vals.mean()), area * float(vals.std(ddof=1) / math.sqrt(n))


def vol_Dt(t: float, d: int = 2) -> float:
    return _volume(d, t, None)


def vol_Dt_s(t: float, s: float, d: int = 2) -> float:
    """Volume of the part of D_t whose Cartan projection is within s of the walls."""
    return _volume(d, t, s)


def vol_Dt_closed_form_d2(t: float) -> float:
    return math.sqrt(2.0) * (math.cosh(math.sqrt(2.0) * t) - 1.0) / 2.0


@dataclass
class VolumeTable:
    d: int
    s_frac: float
    rows: list[tuple[float, float, float, float]] = field(default_factory=list)

    @classmethod
    def build(cls, d: int, ts: Iterable[float], s_frac: float = 0.1, h: float = 1e-3) -> "VolumeTable":
        table = cls(d, s_frac)
        for t in ts:
            v = vol_Dt(t, d)
            strip = vol_Dt_s(t, s_frac * t, d)
            slope = (math.log(vol_Dt(t + h, d)) - math.log(vol_Dt(t - h, d))) / (2 * h)
            table.rows.append((float(t), v, strip, slope))
        return table

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "vol", "vol_strip_s", "logslope"])
            for row in self.rows:
                w.writerow([repr(x) for x in row])
