"""Counting SL(2,Z) in Cartan balls and the angular distribution of the counted points.

Run: python demos/lattice_points.py
"""

from __future__ import annotations

import math

from weylflat import lattice, volume
from weylflat.lattice import EnumConfig


def main() -> None:
    print("  t        count     vol(D_t)   count / vol")
    for t in (4.0, 6.0, 8.0, 10.0, 11.0):
        n = lattice.count_strip(EnumConfig(2, t)).total
        v = volume.vol_Dt(t, 2)
        print(f"{t:4.1f} {n:12d} {v:12.5g} {n / v:10.4f}")
    slope, _ = lattice.log_count_slope([8.0, 9.0, 10.0, 11.0])
    print(f"log-count slope {slope:.4f}, volume growth rate sqrt 2 = {math.sqrt(2):.4f}")

    names = ("one", "cos4_plus", "cos4_plus_cos4_minus")
    for t in (6.0, 8.0, 10.0):
        res = lattice.angular_statistic(EnumConfig(2, t), names)
        print(f"t = {t:4.1f}: " + "  ".join(f"{k} err {e:.4f}" for k, e in zip(names, res.error)))


if __name__ == "__main__":
    main()
