"""Experiment reports: JSON persistence and flattening to plot-ready CSV."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

# CSV columns per experiment id
ROW_SCHEMAS: dict[str, tuple[str, ...]] = {
    "census": ("d", "T", "records", "stabilized", "seconds"),
    "count-check": ("T", "classes", "weighted_sum", "vol", "R", "rel_change", "identity_gap"),
    "equidist-check": ("kind", "T", "label", "value", "reference", "stderr"),
    "angular": ("t", "psi", "empirical", "reference", "reference_se", "error", "regular_count"),
    "volume": ("t", "vol", "vol_strip_s", "logslope"),
}


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict
    rows: list[dict] = field(default_factory=list)
    fitted: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    seed: int = 0
    wall_time: float = 0.0

    @property
    def status(self) -> str:
        states = {c.status for c in self.checks}
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states:
            return INCONCLUSIVE
        return PASS

    def add_check(self, name: str, status: str, detail: str = "") -> None:
        self.checks.append(Check(name, status, detail))

    def to_json(self) -> str:
        o = asdict(self)
        o["status"] = self.status
        return json.dumps(o, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        o = json.loads(text)
        o.pop("status", None)
        o["checks"] = [Check(**c) for c in o.get("checks", [])]
        return cls(**o)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ExperimentReport":
        return cls.from_json(Path(path).read_text())


def report_to_csv(report: ExperimentReport) -> str:
    cols = ROW_SCHEMAS[report.experiment]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in report.rows:
        w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
