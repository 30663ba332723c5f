"""Plain key = value configuration.  Every tolerance and search bound lives here."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass
class Config:
    seed: int = 0
    shards: int = 1
    # unit and conjugacy searches
    coeff_bound: int = 6
    conjugator_bound: int = 50
    conjugator_coeff: int = 3
    index_bound: int = 4
    # growth and escape exponents
    theta: float = 0.05
    zeta: float = 0.1
    # Monte-Carlo budgets
    torus_samples: int = 200_000
    haar_samples: int = 400_000
    angular_mc_samples: int = 100_000
    # cost envelope for census runs
    max_T_d2: float = 12.5
    max_T_d3: float = 5.0
    # headline tolerances
    count_tol: float = 0.20
    equidist_tol: float = 0.15
    delta0_tol: float = 0.05
    angular_tol: float = 0.05
    strip_frac: float = 0.1
    # CLI radii are read in this norm: 1 = trace form, sqrt(2d) = Killing form
    norm_scale: float = 1.0
    # labelled conjecture: weight tori by multiplicity one instead of the period count
    multiplicity_one: bool = False

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def override(self, **kw) -> "Config":
        return dataclasses.replace(self, **{k: _coerce(self, k, v) for k, v in kw.items() if v is not None})


def _coerce(cfg: Config, key: str, value):
    fields = {f.name: f for f in dataclasses.fields(cfg)}
    if key not in fields:
        raise KeyError(f"unknown config key {key!r}")
    kind = type(getattr(Config(), key))
    if kind is bool and isinstance(value, str):
        low = value.strip().lower()
        if low not in ("1", "0", "true", "false", "yes", "no"):
            raise ValueError(f"{key}: expected a boolean, got {value!r}")
        return low in ("1", "true", "yes")
    if kind is int and isinstance(value, str):
        return int(value.replace("_", ""))
    return kind(value)


def parse_pairs(lines) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    cfg = Config()
    if path is not None:
        cfg = cfg.override(**parse_pairs(Path(path).read_text().splitlines()))
    if overrides:
        cfg = cfg.override(**overrides)
    return cfg


def dump_config(cfg: Config) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())
