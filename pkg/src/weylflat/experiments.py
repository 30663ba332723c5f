"""Desk-scale experiments: census, counting ratio, equidistribution, angular statistics, volumes."""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import lattice, systole, tori, volume
from .config import Config
from .report import FAIL, INCONCLUSIVE, PASS, ExperimentReport, report_to_csv

# measured anchors for the cost envelope (records, seconds) on one core
_ANCHOR_D2 = (11.0, 393_648, 3.0)
_ANCHOR_D3 = (4.5, 6_503, 48.0)


class CostEnvelopeError(ValueError):
    pass


def census_estimate(d: int, T: float) -> tuple[float, float]:
    """Rough (records, seconds) for a census run, scaled from measured anchors."""
    if d == 2:
        T0, n0, s0 = _ANCHOR_D2
        f = (tori.max_trace_d2(T) / tori.max_trace_d2(T0)) ** 2
    elif d == 3:
        T0, n0, s0 = _ANCHOR_D3
        f = math.exp(2.0 * math.sqrt(2.0) * (T - T0))
    else:
        raise ValueError("census supports d = 2 and d = 3")
    return n0 * f, s0 * f


def _census_options(cfg: Config) -> tori.CensusOptions:
    return tori.CensusOptions(cfg.index_bound, cfg.conjugator_bound, cfg.conjugator_coeff, cfg.coeff_bound)


def run_census(d: int, T: float, cfg: Config) -> list[tori.TorusRecord]:
    limit = cfg.max_T_d2 if d == 2 else cfg.max_T_d3
    if T > limit:
        n, s = census_estimate(d, T)
        raise CostEnvelopeError(
            f"T = {T} exceeds the configured envelope {limit} for d = {d} "
            f"(estimate: {n:.3g} records, {s:.3g} s); raise max_T_d{d} to proceed"
        )
    return tori.class_census(d, T, _census_options(cfg))


def cmd_census(d: int, T: float, out, cfg: Config) -> ExperimentReport:
    start = time.perf_counter()
    records = run_census(d, T, cfg)
    tori.write_jsonl(records, out)
    wall = time.perf_counter() - start
    rep = ExperimentReport("census", {"d": d, "T": T, "out": str(out), "config": cfg.to_dict()}, seed=cfg.seed)
    stab = sum(r.stabilized for r in records)
    rep.rows.append({"d": d, "T": float(T), "records": len(records), "stabilized": stab, "seconds": wall})
    if d == 2:
        rep.add_check("all records stabilized", PASS if stab == len(records) else FAIL)
    else:
        rep.add_check(
            "stabilized fraction",
            PASS if stab == len(records) else INCONCLUSIVE,
            f"{stab}/{len(records)} period lattices stable under bound doubling",
        )
    rep.wall_time = wall
    return rep


# ---------------------------------------------------------------------------
# counting


def _record_arrays(records: Sequence[tori.TorusRecord]) -> tuple[np.ndarray, np.ndarray]:
    lam = np.array([np.linalg.norm(r.lam) for r in records])
    vol = np.array([r.vol_a for r in records], dtype=float)
    return lam, vol


def primitive_identity_sum(records: Sequence[tori.TorusRecord], T: float) -> float:
    """sum over primitive d = 2 classes of count_regular_periods * vol_a, grouped by period."""
    groups: dict[tuple, list] = {}
    for r in records:
        if np.linalg.norm(r.lam) <= T and r.primitive:
            key = tuple(r.periods[0])
            groups.setdefault(key, [0, r.vol_a])[0] += 1
    total = 0.0
    for key, (mult, vol) in groups.items():
        total += mult * tori.count_regular_periods(np.array([key]), T) * vol
    return total


def cmd_count_check(d: int, t_grid: Sequence[float], records: Sequence[tori.TorusRecord], cfg: Config) -> ExperimentReport:
    """R(T) = sum over classes with ||lambda|| <= T of vol_a, divided by vol(D_T).

    Each class is one regular period of its torus, so the numerator equals the
    sum over tori of |periods in the open chamber of norm <= T| * vol_a.
    """
    start = time.perf_counter()
    t_grid = sorted(float(t) for t in t_grid)
    lam, vol = _record_arrays(records)
    usable = ~np.isnan(vol)
    rep = ExperimentReport("count-check", {"d": d, "t_grid": t_grid, "config": cfg.to_dict()}, seed=cfg.seed)
    prev = None
    changes = []
    for T in t_grid:
        m = (lam <= T) & usable
        s = float(vol[m].sum())
        v = volume.vol_Dt(T, d)
        R = s / v
        gap = float("nan")
        if d == 2:
            gap = s - primitive_identity_sum([r for r, k in zip(records, m) if k], T)
        change = float("nan") if prev is None else R / prev - 1.0
        if prev is not None:
            changes.append(abs(change))
        rep.rows.append({"T": T, "classes": int(m.sum()), "weighted_sum": s, "vol": v, "R": R,
                         "rel_change": change, "identity_gap": gap})
        prev = R
    Rs = [row["R"] for row in rep.rows]
    rep.fitted = {"R_top": Rs[-1], "R_mean_top2": float(np.mean(Rs[-2:])), "abs_rel_changes": changes}
    strict = FAIL if d == 2 else INCONCLUSIVE
    rep.add_check("R positive", PASS if all(r > 0 for r in Rs) else FAIL)
    if changes:
        dec = all(b < a for a, b in zip(changes, changes[1:]))
        rep.add_check("relative changes decreasing", PASS if dec else strict,
                      "changes " + ", ".join(f"{c:.3g}" for c in changes))
        rep.add_check(f"top relative change <= {cfg.count_tol}", PASS if changes[-1] <= cfg.count_tol else strict,
                      f"{changes[-1]:.3g}")
    if d == 2:
        worst = max(abs(row["identity_gap"]) / row["weighted_sum"] for row in rep.rows if row["weighted_sum"] > 0)
        rep.add_check("floor(T/l0) l0 identity", PASS if worst <= 1e-9 else FAIL, f"max relative gap {worst:.3g}")
    else:
        n_stab = sum(r.stabilized for r in records)
        rep.fitted["stabilized_fraction"] = n_stab / max(1, len(records))
    rep.wall_time = time.perf_counter() - start
    return rep


# ---------------------------------------------------------------------------
# equidistribution, d = 2


def _ramp(x, lo, hi):
    return np.clip((x - lo) / (hi - lo), 0.0, 1.0)


def _band(h):
    # smoothed indicator of 1.2 <= height <= 2
    return _ramp(h, 1.1, 1.2) * _ramp(-h, -2.1, -2.0)


OBSERVABLES: dict[str, Callable[[systole.QuotientSample], np.ndarray]] = {
    "one": lambda q: np.ones_like(q.y),
    "height_band": lambda q: _band(q.heights()),
    "inv_height_sq": lambda q: 1.0 / q.y,
    "height_cap": lambda q: np.minimum(q.heights(), 3.0),
    # the shortest vector is unique above y = 1, so this is continuous on the quotient
    "cos2theta_cusp": lambda q: np.cos(2.0 * q.theta) * _ramp(q.y, 1.1, 1.5),
}
RATIO_OBSERVABLES = ("height_band", "inv_height_sq", "height_cap")


def d2_frames(mats: np.ndarray) -> np.ndarray:
    """Unimodular eigenbasis frames (columns by decreasing modulus) for a stack of hyperbolic 2x2."""
    ev, vec = np.linalg.eig(mats.astype(float))
    ev, vec = ev.real, vec.real
    order = np.argsort(-np.abs(ev), axis=1)
    vec = np.take_along_axis(vec, order[:, None, :], axis=2)
    det = vec[:, 0, 0] * vec[:, 1, 1] - vec[:, 0, 1] * vec[:, 1, 0]
    vec = vec / np.sqrt(np.abs(det))[:, None, None]
    vec[det < 0, :, 1] *= -1.0
    return vec


def sample_tori_d2(records: Sequence[tori.TorusRecord], T: float, n: int, rng: np.random.Generator,
                   multiplicity_one: bool = False) -> systole.QuotientSample:
    """Points from the measure sum_F count * Leb_F, restricted to ||lambda|| <= T, in reduced coordinates."""
    lam, vol = _record_arrays(records)
    keep = lam <= T
    if multiplicity_one:
        keep &= np.array([r.primitive for r in records])
    idx = np.nonzero(keep)[0]
    p = vol[idx] / vol[idx].sum()
    pick = idx[rng.choice(idx.size, size=n, p=p)]
    mats = np.array([records[i].repr for i in pick], dtype=float).reshape(n, 2, 2)
    frames = d2_frames(mats)
    period = np.array([records[i].periods[0] for i in pick])
    ys = rng.uniform(size=(n, 1)) * period
    g = frames * np.exp(ys)[:, None, :]
    return systole.reduce_d2(g)


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def _ratio_se(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    ma, mb = a.mean(), b.mean()
    r = ma / mb
    resid = (a - r * b) / mb
    return float(r), float(resid.std(ddof=1) / math.sqrt(a.size))


def cmd_equidist_check(T: float, records: Sequence[tori.TorusRecord], cfg: Config,
                       t_grid: Sequence[float] = (8.0, 9.0, 10.0, 11.0),
                       observables: Sequence[str] = RATIO_OBSERVABLES) -> ExperimentReport:
    """Ratios M^T(f)/M^T(1) against Haar ratios m(f)/m(1); the unknown constant cancels."""
    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    rep = ExperimentReport("equidist-check", {"d": 2, "T": T, "t_grid": list(t_grid), "observables": list(observables),
                                              "multiplicity_one": cfg.multiplicity_one, "config": cfg.to_dict()},
                           seed=cfg.seed)
    haar = systole.haar_sample_quotient(rng, cfg.haar_samples)
    tor = sample_tori_d2(records, T, cfg.torus_samples, rng, cfg.multiplicity_one)
    one_t, one_h = OBSERVABLES["one"](tor), OBSERVABLES["one"](haar)
    for name in observables:
        rt, se_t = _ratio_se(OBSERVABLES[name](tor), one_t)
        rh, se_h = _ratio_se(OBSERVABLES[name](haar), one_h)
        se = math.hypot(se_t, se_h)
        rep.rows.append({"kind": "ratio", "T": float(T), "label": name, "value": rt, "reference": rh, "stderr": se})
        rel = abs(rt - rh) / abs(rh)
        budget = cfg.equidist_tol / 3.0
        if se / abs(rh) > budget:
            status = INCONCLUSIVE
        elif rel <= cfg.equidist_tol:
            status = PASS
        else:
            status = FAIL
        rep.add_check(f"{name} ratio within {cfg.equidist_tol:.0%}", status,
                      f"torus {rt:.4g} haar {rh:.4g} rel {rel:.3g} se {se:.2g}")
    cusp_t = _mean_se(OBSERVABLES["cos2theta_cusp"](tor))
    cusp_h = _mean_se(OBSERVABLES["cos2theta_cusp"](haar))
    rep.rows.append({"kind": "mean", "T": float(T), "label": "cos2theta_cusp", "value": cusp_t[0],
                     "reference": cusp_h[0], "stderr": math.hypot(cusp_t[1], cusp_h[1])})
    # non-escape along the schedule R = exp(theta T)
    above = []
    for t in sorted(t_grid):
        q = sample_tori_d2(records, t, cfg.torus_samples, rng, cfg.multiplicity_one)
        h = q.heights()
        R = math.exp(cfg.theta * t)
        frac, se = _mean_se((h > R).astype(float))
        band, _ = _mean_se(((h > math.exp(cfg.theta * t / 8.0)) & (h <= R)).astype(float))
        above.append((frac, se))
        rep.rows.append({"kind": "escape", "T": float(t), "label": f"above exp({cfg.theta}T)", "value": frac,
                         "reference": 3.0 / (math.pi * R * R), "stderr": se})
        rep.rows.append({"kind": "key", "T": float(t), "label": "above/band", "value": frac / band if band else float("inf"),
                         "reference": float("nan"), "stderr": float("nan")})
    for R in (1.5, 2.0, 3.0, 5.0):
        frac, se = _mean_se((tor.heights() > R).astype(float))
        rep.rows.append({"kind": "profile", "T": float(T), "label": f"above {R}", "value": frac,
                         "reference": 3.0 / (math.pi * R * R), "stderr": se})
    prof = [row["value"] for row in rep.rows if row["kind"] == "profile"]
    rep.add_check("escape mass decreasing in R", PASS if all(b <= a for a, b in zip(prof, prof[1:])) else FAIL)
    dec = all(b[0] < a[0] for a, b in zip(above, above[1:]))
    noise = all(b[0] < a[0] + 3 * math.hypot(a[1], b[1]) for a, b in zip(above, above[1:]))
    rep.add_check("escape mass decreasing in T along exp(theta T)", PASS if dec else (INCONCLUSIVE if noise else FAIL),
                  ", ".join(f"{a[0]:.4g}" for a in above))
    rep.fitted = {"haar_acceptance": haar.acceptance, "escape_schedule": [a[0] for a in above]}
    rep.wall_time = time.perf_counter() - start
    return rep


# ---------------------------------------------------------------------------
# angular statistic, volumes, plot data


MEAN_ZERO = {k for k in lattice.HARMONICS if k != "one"}


def _angular_sharded(t: float, names, shards: int) -> lattice.AngularResult:
    parts = [lattice.angular_statistic(lattice.EnumConfig(2, t, shard=s, shards=shards), names) for s in range(shards)]
    emp = sum(p.empirical for p in parts)
    return lattice.AngularResult(t, tuple(names), emp, parts[0].reference, parts[0].reference_se,
                                 sum(p.regular_count for p in parts))


def cmd_angular(t_grid: Sequence[float], psi_names: Sequence[str], cfg: Config) -> ExperimentReport:
    start = time.perf_counter()
    t_grid = sorted(float(t) for t in t_grid)
    names = tuple(psi_names)
    rep = ExperimentReport("angular", {"d": 2, "t_grid": t_grid, "psi": list(names), "config": cfg.to_dict()},
                           seed=cfg.seed)
    errs = {k: [] for k in names}
    for t in t_grid:
        res = _angular_sharded(t, names, cfg.shards)
        for k, e, r, se, err in zip(names, res.empirical, res.reference, res.reference_se, res.error):
            errs[k].append(float(err))
            rep.rows.append({"t": t, "psi": k, "empirical": float(e), "reference": float(r),
                             "reference_se": float(se), "error": float(err), "regular_count": res.regular_count})
    for k in names:
        e = errs[k]
        if len(e) >= 2 and min(e) > 0:
            rep.fitted[f"decay_slope_{k}"] = float(np.polyfit(t_grid, np.log(e), 1)[0])
        if len(e) >= 2:
            rep.add_check(f"{k}: error at t={t_grid[-1]:g} below error at t={t_grid[0]:g}",
                          PASS if e[-1] < e[0] else FAIL, f"{e[0]:.3g} -> {e[-1]:.3g}")
        if k in MEAN_ZERO:
            rep.add_check(f"{k}: error <= {cfg.angular_tol}", PASS if e[-1] <= cfg.angular_tol else FAIL, f"{e[-1]:.3g}")
    rep.wall_time = time.perf_counter() - start
    return rep


def cmd_volume(d: int, t_grid: Sequence[float], cfg: Config, out_csv=None) -> ExperimentReport:
    start = time.perf_counter()
    t_grid = sorted(float(t) for t in t_grid)
    table = volume.VolumeTable.build(d, t_grid, cfg.strip_frac)
    if out_csv is not None:
        table.write_csv(out_csv)
    rep = ExperimentReport("volume", {"d": d, "t_grid": t_grid, "s_frac": cfg.strip_frac, "config": cfg.to_dict()},
                           seed=cfg.seed)
    for t, v, s, slope in table.rows:
        rep.rows.append({"t": t, "vol": v, "vol_strip_s": s, "logslope": slope})
    d0 = volume.delta0(d)
    t, v, _, slope = table.rows[-1]
    growth = math.log(v) / t
    rep.fitted = {"delta0": d0, "log_vol_over_t": growth, "logslope_top": slope}
    rel = abs(growth - d0) / d0
    rep.add_check(f"log vol / t within {cfg.delta0_tol:.0%} of delta0 at t={t:g}",
                  PASS if rel <= cfg.delta0_tol else FAIL, f"{growth:.4g} vs {d0:.4g}")
    ratios = [s / v for _, v, s, _ in table.rows]
    rep.add_check("strip ratio strictly decreasing", PASS if all(b < a for a, b in zip(ratios, ratios[1:])) else FAIL,
                  ", ".join(f"{r:.3g}" for r in ratios))
    rep.wall_time = time.perf_counter() - start
    return rep


def cmd_plotdata(report: ExperimentReport, out) -> Path:
    path = Path(out)
    path.write_text(report_to_csv(report))
    return path
