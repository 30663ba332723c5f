"""Enumeration of SL(d, Z) inside Cartan balls D_t(x) = h_x K exp(B(0, t)) K h_x^-1.

d = 2 walks coprime top rows (a, b); the bottom rows with a d - b c = 1 form
the family (c0 + k a, d0 + k b), and the Frobenius bound cuts k to an interval.
Since det = 1, ||gamma||_F^2 = 2 cosh(2 s) with ||a(gamma)|| = sqrt(2) s, so
the ball condition is exactly ||gamma||_F^2 <= 2 cosh(sqrt(2) t).

d = 3 backtracks over rows: rows and pairwise cross products are bounded by
the top singular value cap, and the third row is solved from the determinant.

Off the basepoint o the scan runs at radius t + 2 dX(o, x), which contains
D_t(x), and each survivor is tested exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numba import njit

from . import lie, volume

MAX_FROBENIUS_D2 = float(2**52)
MAX_ENTRY_D3 = 60
SINGULAR_TOL = 1e-9

HARMONICS = {
    "one": 0,
    "cos2_plus": 1,
    "cos4_plus": 2,
    "cos8_plus": 3,
    "cos4_minus": 4,
    "cos4_plus_cos4_minus": 5,
    "cos2_plus_cos2_minus": 6,
    "cos2_diff": 7,
}
_NFEAT = len(HARMONICS)


class EnumerationBoundError(ValueError):
    pass


@dataclass(frozen=True)
class EnumConfig:
    d: int
    t: float
    basepoint: np.ndarray | None = None
    level: int = 0
    strip: float | None = None
    shard: int = 0
    shards: int = 1

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("t must be positive")
        if not 0 <= self.shard < self.shards:
            raise ValueError("shard index out of range")

    def hx(self) -> np.ndarray:
        if self.basepoint is None:
            return np.eye(self.d)
        return lie.as_group_element(self.basepoint)

    def at_origin(self) -> bool:
        return self.basepoint is None or np.allclose(self.hx(), np.eye(self.d), atol=0, rtol=0)


# ---------------------------------------------------------------------------
# numba kernels, d = 2


@njit(cache=True)
def _egcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


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
def _d2_scan(a_lo, a_hi, f_int, f_exact, f_strip, conj, hinv, h, level, mode, out, counts, feats):
    """Visit gamma in Gamma with a in [a_lo, a_hi] and ||gamma||_F^2 <= f_int.

    mode 0: counts only; mode 1: also write rows of out; mode 2: also angular
    feature sums over the regular elements.  counts = (total, regular, strip).
    """
    n_out = 0
    amax = _isqrt(f_int)
    for a in range(max(a_lo, -amax), min(a_hi, amax) + 1):
        bmax = _isqrt(f_int - a * a)
        for b in range(-bmax, bmax + 1):
            g, x, y = _egcd(a, b)
            if g != 1:
                continue
            n = a * a + b * b
            c0, d0 = -y, x
            m = a * c0 + b * d0
            # shift to the centre of the Bezout family
            ks = -int(math.floor(m / n + 0.5))
            c0 += ks * a
            d0 += ks * b
            m = a * c0 + b * d0
            cc = c0 * c0 + d0 * d0
            disc = float(m) * m - float(n) * (n + cc - f_int)
            if disc < 0:
                continue
            r = math.sqrt(disc)
            k_lo = int(math.ceil((-m - r) / n)) - 1
            k_hi = int(math.floor((-m + r) / n)) + 1
            while n * k_lo * k_lo + 2 * m * k_lo + n + cc > f_int and k_lo <= k_hi:
                k_lo += 1
            while n * k_hi * k_hi + 2 * m * k_hi + n + cc > f_int and k_hi >= k_lo:
                k_hi -= 1
            if k_lo > k_hi:
                continue
            nk = k_hi - k_lo + 1
            for j in range(nk):
                # lexicographic order in (c, d)
                if a > 0 or (a == 0 and b > 0):
                    k = k_lo + j
                else:
                    k = k_hi - j
                c = c0 + k * a
                d = d0 + k * b
                if level > 0:
                    if (a - 1) % level != 0 or b % level != 0 or c % level != 0 or (d - 1) % level != 0:
                        continue
                if conj:
                    p = hinv[0, 0] * (a * h[0, 0] + b * h[1, 0]) + hinv[0, 1] * (c * h[0, 0] + d * h[1, 0])
                    q = hinv[0, 0] * (a * h[0, 1] + b * h[1, 1]) + hinv[0, 1] * (c * h[0, 1] + d * h[1, 1])
                    rr = hinv[1, 0] * (a * h[0, 0] + b * h[1, 0]) + hinv[1, 1] * (c * h[0, 0] + d * h[1, 0])
                    s = hinv[1, 0] * (a * h[0, 1] + b * h[1, 1]) + hinv[1, 1] * (c * h[0, 1] + d * h[1, 1])
                else:
                    p, q, rr, s = float(a), float(b), float(c), float(d)
                fm = p * p + q * q + rr * rr + s * s
                if conj and fm > f_exact:
                    continue
                counts[0] += 1
                regular = fm - 2.0 > SINGULAR_TOL
                if regular:
                    counts[1] += 1
                if fm <= f_strip:
                    counts[2] += 1
                if mode == 1:
                    out[n_out, 0] = a
                    out[n_out, 1] = b
                    out[n_out, 2] = c
                    out[n_out, 3] = d
                    n_out += 1
                elif mode == 2 and regular:
                    tk = 0.5 * math.atan2(2.0 * (p * rr + q * s), (p * p + q * q) - (rr * rr + s * s))
                    tl = 0.5 * math.atan2(2.0 * (p * q + rr * s), (p * p + rr * rr) - (q * q + s * s))
                    tl += 0.5 * math.pi
                    if conj:
                        ux, uy = math.cos(tk), math.sin(tk)
                        tp = math.atan2(h[1, 0] * ux + h[1, 1] * uy, h[0, 0] * ux + h[0, 1] * uy)
                        ux, uy = math.cos(tl), math.sin(tl)
                        tm = math.atan2(h[1, 0] * ux + h[1, 1] * uy, h[0, 0] * ux + h[0, 1] * uy)
                    else:
                        tp, tm = tk, tl
                    feats[0] += 1.0
                    feats[1] += math.cos(2 * tp)
                    feats[2] += math.cos(4 * tp)
                    feats[3] += math.cos(8 * tp)
                    feats[4] += math.cos(4 * tm)
                    feats[5] += math.cos(4 * tp) * math.cos(4 * tm)
                    feats[6] += math.cos(2 * tp) * math.cos(2 * tm)
                    feats[7] += math.cos(2 * (tp - tm))
    return n_out


# ---------------------------------------------------------------------------
# numba kernels, d = 3


@njit(cache=True)
def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def _d3_scan(x_lo, x_hi, rb, r2, t_exact, strip, conj, hinv, h, level, mode, out, counts):
    """Rows r1, r2, r3 with |r_i|^2 <= r2 and |r_i x r_j|^2 <= r2, det = 1."""
    n_out = 0
    g = np.empty((3, 3))
    for x1 in range(max(x_lo, -rb), min(x_hi, rb) + 1):
        for y1 in range(-rb, rb + 1):
            for z1 in range(-rb, rb + 1):
                n1 = x1 * x1 + y1 * y1 + z1 * z1
                if n1 > r2 or n1 == 0 or _gcd(_gcd(x1, y1), z1) != 1:
                    continue
                for x2 in range(-rb, rb + 1):
                    for y2 in range(-rb, rb + 1):
                        for z2 in range(-rb, rb + 1):
                            if x2 * x2 + y2 * y2 + z2 * z2 > r2:
                                continue
                            cx = y1 * z2 - z1 * y2
                            cy = z1 * x2 - x1 * z2
                            cz = x1 * y2 - y1 * x2
                            if cx * cx + cy * cy + cz * cz > r2:
                                continue
                            if _gcd(_gcd(cx, cy), cz) != 1:
                                continue
                            # solve cx u + cy v + cz w = 1 along the largest |c|
                            ac = (abs(cx), abs(cy), abs(cz))
                            j = 0
                            if ac[1] > ac[j]:
                                j = 1
                            if ac[2] > ac[j]:
                                j = 2
                            for u in range(-rb, rb + 1):
                                for v in range(-rb, rb + 1):
                                    if j == 0:
                                        rem = 1 - cy * u - cz * v
                                        if rem % cx != 0:
                                            continue
                                        x3, y3, z3 = rem // cx, u, v
                                    elif j == 1:
                                        rem = 1 - cx * u - cz * v
                                        if rem % cy != 0:
                                            continue
                                        x3, y3, z3 = u, rem // cy, v
                                    else:
                                        rem = 1 - cx * u - cy * v
                                        if rem % cz != 0:
                                            continue
                                        x3, y3, z3 = u, v, rem // cz
                                    if x3 * x3 + y3 * y3 + z3 * z3 > r2:
                                        continue
                                    if level > 0:
                                        if ((x1 - 1) % level or y1 % level or z1 % level or x2 % level
                                                or (y2 - 1) % level or z2 % level or x3 % level
                                                or y3 % level or (z3 - 1) % level):
                                            continue
                                    g[0, 0], g[0, 1], g[0, 2] = x1, y1, z1
                                    g[1, 0], g[1, 1], g[1, 2] = x2, y2, z2
                                    g[2, 0], g[2, 1], g[2, 2] = x3, y3, z3
                                    m = hinv @ g @ h if conj else g
                                    ev = np.linalg.eigvalsh(m @ m.T)
                                    a0 = 0.5 * math.log(ev[2])
                                    a1 = 0.5 * math.log(ev[1])
                                    a2 = 0.5 * math.log(ev[0])
                                    if a0 * a0 + a1 * a1 + a2 * a2 > t_exact * t_exact:
                                        continue
                                    counts[0] += 1
                                    gap = min(a0 - a1, a1 - a2) / math.sqrt(2.0)
                                    if gap > SINGULAR_TOL:
                                        counts[1] += 1
                                    if gap <= strip:
                                        counts[2] += 1
                                    if mode == 1:
                                        out[n_out, 0], out[n_out, 1], out[n_out, 2] = x1, y1, z1
                                        out[n_out, 3], out[n_out, 4], out[n_out, 5] = x2, y2, z2
                                        out[n_out, 6], out[n_out, 7], out[n_out, 8] = x3, y3, z3
                                        n_out += 1
    return n_out


# ---------------------------------------------------------------------------
# Python front end


def _scan_radius(config: EnumConfig) -> float:
    if config.at_origin():
        return config.t
    return config.t + 2.0 * lie.dX(np.eye(config.d), config.hx())


def _d2_bounds(config: EnumConfig) -> tuple[int, float, float]:
    r2 = math.sqrt(2.0)
    f_pre = 2.0 * math.cosh(r2 * _scan_radius(config))
    if f_pre > MAX_FROBENIUS_D2:
        raise EnumerationBoundError(
            f"Frobenius bound {f_pre:.3g} exceeds the exact integer range {MAX_FROBENIUS_D2:.3g}"
        )
    f_exact = 2.0 * math.cosh(r2 * config.t)
    s = config.strip if config.strip is not None else -1.0
    f_strip = 2.0 * math.cosh(r2 * s) if s >= 0 else -1.0
    return int(math.floor(f_pre)), f_exact, f_strip


def _shard_range(lo: int, hi: int, shard: int, shards: int) -> tuple[int, int]:
    size = hi - lo + 1
    start = lo + (size * shard) // shards
    stop = lo + (size * (shard + 1)) // shards - 1
    return start, stop


def _d3_cap(radius: float) -> tuple[int, float]:
    # max of v_1 and of v_1 + v_2 on the unit sphere of sum-zero vectors
    cap = math.exp(radius * math.sqrt(2.0 / 3.0))
    rb = int(math.floor(cap + 1e-9))
    if rb > MAX_ENTRY_D3:
        raise EnumerationBoundError(f"entry bound {rb} exceeds the d=3 limit {MAX_ENTRY_D3}")
    return rb, cap * cap * (1 + 1e-12)


def _run(config: EnumConfig, a_lo: int, a_hi: int, mode: int, cap: int = 0):
    hx = config.hx()
    hinv = np.linalg.inv(hx)
    conj = not config.at_origin()
    counts = np.zeros(3, dtype=np.int64)
    if config.d == 2:
        f_int, f_exact, f_strip = _d2_bounds(config)
        out = np.empty((max(cap, 1), 4), dtype=np.int64)
        feats = np.zeros(_NFEAT)
        n = _d2_scan(a_lo, a_hi, f_int, f_exact, f_strip, conj, hinv, hx, config.level, mode, out, counts, feats)
        return counts, out[:n], feats
    if config.d == 3:
        rb, r2 = _d3_cap(_scan_radius(config))
        out = np.empty((max(cap, 1), 9), dtype=np.int64)
        s = config.strip if config.strip is not None else -1.0
        n = _d3_scan(a_lo, a_hi, rb, r2, config.t, s, conj, hinv, hx, config.level, mode, out, counts)
        return counts, out[:n], None
    raise EnumerationBoundError("only d = 2 and d = 3 are supported")


def _first_row_range(config: EnumConfig) -> tuple[int, int]:
    if config.d == 2:
        f_int = _d2_bounds(config)[0]
        amax = math.isqrt(f_int)
    else:
        amax = _d3_cap(_scan_radius(config))[0]
    return _shard_range(-amax, amax, config.shard, config.shards)


def enumerate_chunks(config: EnumConfig, block: int = 64) -> Iterator[np.ndarray]:
    """Stream Gamma cap D_t(x) as int64 arrays of shape (m, d, d), in lexicographic order."""
    lo, hi = _first_row_range(config)
    d = config.d
    for start in range(lo, hi + 1, block):
        stop = min(hi, start + block - 1)
        counts, _, _ = _run(config, start, stop, 0)
        if counts[0] == 0:
            continue
        _, rows, _ = _run(config, start, stop, 1, int(counts[0]))
        if d == 3:
            rows = rows[np.lexsort(rows.T[::-1])]
        yield rows.reshape(-1, d, d)


def enumerate_gamma(config: EnumConfig) -> Iterator[np.ndarray]:
    for chunk in enumerate_chunks(config):
        yield from chunk


def enumerate_array(config: EnumConfig) -> np.ndarray:
    chunks = list(enumerate_chunks(config))
    if not chunks:
        return np.empty((0, config.d, config.d), dtype=np.int64)
    return np.concatenate(chunks)


@dataclass(frozen=True)
class StripCounts:
    total: int
    regular: int
    strip: int


def count_strip(config: EnumConfig) -> StripCounts:
    """Sizes of Gamma cap D_t(x), its Cartan-regular part and its wall strip."""
    lo, hi = _first_row_range(config)
    counts, _, _ = _run(config, lo, hi, 0)
    return StripCounts(int(counts[0]), int(counts[1]), int(counts[2]))


@dataclass(frozen=True)
class AngularResult:
    t: float
    names: tuple[str, ...]
    empirical: np.ndarray
    reference: np.ndarray
    reference_se: np.ndarray
    regular_count: int

    @property
    def error(self) -> np.ndarray:
        return np.abs(self.empirical - self.reference)


def _reference_mc(names, hx: np.ndarray, covolume: float, rng: np.random.Generator, n: int):
    """(1/vol) * int psi d(mu_x x mu_x) by Monte-Carlo over pairs of K_x-uniform lines."""
    th1 = rng.uniform(0, np.pi, n)
    th2 = rng.uniform(0, np.pi, n)

    def push(th):
        v = hx @ np.vstack([np.cos(th), np.sin(th)])
        return np.arctan2(v[1], v[0])

    tp, tm = push(th1), push(th2)
    vals = _feature_values(tp, tm)
    idx = [HARMONICS[k] for k in names]
    mean = vals[idx].mean(axis=1) / covolume
    se = vals[idx].std(axis=1, ddof=1) / math.sqrt(n) / covolume
    return mean, se


def _feature_values(tp, tm) -> np.ndarray:
    return np.array([
        np.ones_like(tp),
        np.cos(2 * tp),
        np.cos(4 * tp),
        np.cos(8 * tp),
        np.cos(4 * tm),
        np.cos(4 * tp) * np.cos(4 * tm),
        np.cos(2 * tp) * np.cos(2 * tm),
        np.cos(2 * (tp - tm)),
    ])


def angular_statistic(
    config: EnumConfig,
    names: tuple[str, ...] = ("one", "cos4_plus"),
    covolume: float = math.sqrt(2.0) / 24.0,
    rng: np.random.Generator | None = None,
    mc_samples: int = 100_000,
) -> AngularResult:
    """(1/vol D_t) sum over regular gamma of psi(gamma_x^+, gamma_x^-), d = 2.

    psi is chosen by name from HARMONICS; `angular_statistic_callable` takes
    arbitrary functions of two flags.
    """
    if config.d != 2:
        raise ValueError("the fast angular path is d = 2 only")
    lo, hi = _first_row_range(config)
    counts, _, feats = _run(config, lo, hi, 2)
    idx = [HARMONICS[k] for k in names]
    emp = feats[idx] / volume.vol_Dt(config.t, 2)
    if config.at_origin():
        ref = np.array([1.0 / covolume if k == "one" else 0.0 for k in names])
        se = np.zeros(len(names))
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        ref, se = _reference_mc(names, config.hx(), covolume, rng, mc_samples)
    return AngularResult(config.t, tuple(names), emp, ref, se, int(counts[1]))


def angular_statistic_callable(config: EnumConfig, psi: Callable) -> float:
    """Generic path: psi(plus_flag, minus_flag) summed over the regular elements."""
    from . import boundary

    hx = config.hx()
    total = 0.0
    for g in enumerate_gamma(config):
        gf = g.astype(float)
        try:
            plus, minus = boundary.gamma_x_flags(gf, hx, margin=SINGULAR_TOL)
        except boundary.RegularityError:
            continue
        total += psi(plus, minus)
    return total / volume.vol_Dt(config.t, config.d)


def log_count_slope(ts, d: int = 2) -> tuple[float, list[int]]:
    counts = [count_strip(EnumConfig(d, float(t))).total for t in ts]
    slope = np.polyfit(np.asarray(ts, dtype=float), np.log(counts), 1)[0]
    return float(slope), counts
