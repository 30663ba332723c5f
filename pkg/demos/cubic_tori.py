"""Flat 2-tori in SL(3,Z)\\SL(3,R) from totally real cubic units, and a non-compact counterexample.

Run: python demos/cubic_tori.py
"""

from __future__ import annotations

import numpy as np

from weylflat import lie, tori


def main() -> None:
    g = np.array([[0, 1, 0], [0, 0, 1], [1, 1, -4]], dtype=np.int64)
    lat = tori.period_lattice(g)
    print("companion of", tori.char_poly(g), "->", tori.is_compact_torus(g))
    print("period lattice basis\n", np.round(lat.basis, 6), "\ncovolume", round(tori.covolume(lat.basis), 6))

    block = np.array([[2, 1, 0], [1, 1, 0], [0, 0, 1]], dtype=np.int64)
    lam = lie.jordan_lambda(block.astype(float))
    print("\nblock matrix lambda", np.round(lam, 4), "zero-sum subset", tori.subset_sum_zero(lam),
          "->", tori.is_compact_torus(block))

    recs = tori.class_census(3, 3.0)
    stab = sum(r.stabilized for r in recs)
    print(f"\ncensus ||lambda|| <= 3: {len(recs)} classes, {stab} with stabilized period lattices")
    for r in sorted(recs, key=lambda r: r.vol_a if r.stabilized else np.inf)[:5]:
        print(f"  charpoly {r.charpoly}  ||lambda|| {np.linalg.norm(r.lam):.3f}  vol_a {r.vol_a:.4f}")


if __name__ == "__main__":
    main()
