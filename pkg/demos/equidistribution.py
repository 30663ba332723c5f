"""Where do periodic tori live? Heights of torus points against Haar measure on the modular surface.

Run: python demos/equidistribution.py
"""

from __future__ import annotations

import numpy as np

from weylflat import experiments, systole, tori


def main() -> None:
    rng = np.random.default_rng(0)
    recs = tori.class_census(2, 10.0)
    haar = systole.haar_sample_quotient(rng, 200_000)
    print(f"Haar rejection acceptance {haar.acceptance:.4f} (pi sqrt 3 / 6 = {np.pi * np.sqrt(3) / 6:.4f})")

    for T in (4.0, 7.0, 10.0):
        pts = experiments.sample_tori_d2(recs, T, 100_000, rng)
        h, hh = pts.heights(), haar.heights()
        row = "  ".join(f"P(h>{R}) {np.mean(h > R):.4f}/{np.mean(hh > R):.4f}" for R in (1.5, 2.0, 3.0))
        print(f"T = {T:4.1f}: torus/Haar  {row}")

    # one torus on its own: heights along the orbit stay bounded
    rec = max(recs, key=lambda r: r.vol_a)
    rep = systole.torus_height_check(rec, 2000, rng)
    print(f"\nlongest torus (vol_a {rec.vol_a:.3f}): max height {rep.max_height:.3f},"
          f" log(max)/||lambda|| = {rep.exponent:.3f}")
    q = rep.profile.quantiles((0.5, 0.9, 0.99))
    print("height quantiles", {k: round(v, 3) for k, v in q.items()})


if __name__ == "__main__":
    main()
