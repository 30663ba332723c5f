"""Closed flat tori of SL(2,Z)\\SL(2,R): census, periods and the counting ratio.

Run: python demos/modular_tori.py
"""

from __future__ import annotations

import math
from collections import Counter

from weylflat import experiments, forms, tori, volume
from weylflat.config import Config


def main() -> None:
    recs = tori.class_census(2, 11.0)
    print(f"{len(recs)} loxodromic conjugacy classes with ||lambda|| <= 11")

    first = min(recs, key=lambda r: r.vol_a)
    phi = (1 + math.sqrt(5)) / 2
    print(f"shortest torus: trace {first.repr[0] + first.repr[3]}, vol_a {first.vol_a:.10f}"
          f" (2 sqrt 2 log phi = {2 * math.sqrt(2) * math.log(phi):.10f})")

    # trace t classes split over form discriminants (t^2 - 4) / u^2, each contributing h+(D)
    per_trace = Counter(abs(r.repr[0] + r.repr[3]) for r in recs)
    for tr in (3, 4, 7, 11, 18):
        n = tr * tr - 4
        parts = {n // (u * u): forms.narrow_class_number(n // (u * u))
                 for u in range(1, math.isqrt(n) + 1) if n % (u * u) == 0 and (n // (u * u)) % 4 in (0, 1)}
        print(f"trace {tr:2d}: {per_trace[tr]} classes; h+ by discriminant {parts}, total {sum(parts.values())}")

    rep = experiments.cmd_count_check(2, [8.0, 9.0, 10.0, 11.0], recs, Config())
    print("\n   T   classes   sum vol_a / vol(D_T)")
    for row in rep.rows:
        print(f"{row['T']:5.1f} {row['classes']:9d}   {row['R']:.6f}")
    print(f"vol(D_11) = {volume.vol_Dt(11.0, 2):.6g}")
    for c in rep.checks:
        print(f"[{c.status}] {c.name} {c.detail}")


if __name__ == "__main__":
    main()
