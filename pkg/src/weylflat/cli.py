"""Command-line front end.  Exit status: 0 pass, 1 fail, 3 inconclusive, 2 usage error."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments, lattice, tori
from .config import dump_config, load_config
from .report import FAIL, INCONCLUSIVE, ROW_SCHEMAS, ExperimentReport

_EXIT = {"pass": 0, FAIL: 1, INCONCLUSIVE: 3}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _columns_help() -> str:
    lines = ["CSV columns by experiment id:"]
    lines += [f"  {k}: {', '.join(v)}" for k, v in ROW_SCHEMAS.items()]
    return "\n".join(lines)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--shards", type=int)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--out", help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weylflat", description="Periodic flat tori in SL(d,Z)\\SL(d,R): desk experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="write one JSONL record per loxodromic class with ||lambda|| <= T")
    _common(p)
    p.add_argument("--d", type=int, default=2, choices=(2, 3))
    p.add_argument("--T", type=float, required=True)

    p = sub.add_parser("count-check", help="counting ratio R(T) over a grid")
    _common(p)
    p.add_argument("--d", type=int, default=2, choices=(2, 3))
    p.add_argument("--t-grid", type=_floats, default=[8.0, 9.0, 10.0, 11.0])
    p.add_argument("--census", help="census JSONL covering the top of the grid (built in memory if omitted)")

    p = sub.add_parser("equidist-check", help="torus-weighted observables against Haar Monte-Carlo (d = 2)")
    _common(p)
    p.add_argument("--d", type=int, default=2, choices=(2,))
    p.add_argument("--T", type=float, default=11.0)
    p.add_argument("--t-grid", type=_floats, default=[8.0, 9.0, 10.0, 11.0], help="non-escape schedule")
    p.add_argument("--census", help="census JSONL at T or above (built in memory if omitted)")
    p.add_argument("--observables", default=",".join(experiments.RATIO_OBSERVABLES),
                   help="comma list from: " + ", ".join(experiments.OBSERVABLES))

    p = sub.add_parser("angular", help="angular statistic of lattice points over a t grid (d = 2)")
    _common(p)
    p.add_argument("--d", type=int, default=2, choices=(2,))
    p.add_argument("--t-grid", type=_floats, default=[6.0, 10.0])
    p.add_argument("--psi", default="one,cos4_plus,cos4_plus_cos4_minus",
                   help="comma list from: " + ", ".join(lattice.HARMONICS))

    p = sub.add_parser("volume", help="volume table of Cartan balls and wall strips (CSV)")
    _common(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--t-grid", type=_floats, default=[10.0, 20.0, 30.0, 40.0])
    p.add_argument("--report", help="also write the JSON report here")

    p = sub.add_parser("plot-data", help="flatten a JSON report to CSV", epilog=_columns_help(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("report")
    p.add_argument("--out", required=True)
    return parser


def _config(args):
    overrides = dict(s.split("=", 1) for s in args.set)
    for key in ("seed", "shards"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    cfg = load_config(args.config, overrides)
    # internal radii use the trace form
    if getattr(args, "T", None) is not None:
        args.T = args.T / cfg.norm_scale
    if getattr(args, "t_grid", None) is not None:
        args.t_grid = [t / cfg.norm_scale for t in args.t_grid]
    return cfg


def _records(args, cfg, T: float):
    if args.census:
        recs = tori.read_jsonl(args.census)
        if recs and recs[0].d != args.d:
            raise SystemExit(f"census file has d = {recs[0].d}, expected {args.d}")
        return recs
    return experiments.run_census(args.d, T, cfg)


def _finish(rep: ExperimentReport, out) -> int:
    for c in rep.checks:
        print(f"[{c.status}] {c.name}" + (f"  ({c.detail})" if c.detail else ""))
    print(f"{rep.experiment}: {rep.status} in {rep.wall_time:.1f} s")
    if out:
        rep.save(out)
    return _EXIT[rep.status]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plot-data":
        experiments.cmd_plotdata(ExperimentReport.load(args.report), args.out)
        return 0
    cfg = _config(args)
    try:
        if args.command == "census":
            out = args.out or f"census_d{args.d}_T{args.T:g}.jsonl"
            rep = experiments.cmd_census(args.d, args.T, out, cfg)
            Path(out + ".config").write_text(dump_config(cfg))
            return _finish(rep, out + ".report.json")
        if args.command == "count-check":
            recs = _records(args, cfg, max(args.t_grid))
            return _finish(experiments.cmd_count_check(args.d, args.t_grid, recs, cfg), args.out)
        if args.command == "equidist-check":
            recs = _records(args, cfg, max([args.T] + list(args.t_grid)))
            names = [s for s in args.observables.split(",") if s]
            return _finish(experiments.cmd_equidist_check(args.T, recs, cfg, args.t_grid, names), args.out)
        if args.command == "angular":
            names = [s for s in args.psi.split(",") if s]
            return _finish(experiments.cmd_angular(args.t_grid, names, cfg), args.out)
        if args.command == "volume":
            out = args.out or f"volume_d{args.d}.csv"
            return _finish(experiments.cmd_volume(args.d, args.t_grid, cfg, out), args.report)
    except experiments.CostEnvelopeError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
