"""Weak crossings across the critical point.

Each bond is strong with probability p.  On a (n+1) x n window a weak
left-right crossing happens exactly when no strong dual top-bottom crossing
does, so p = 1/2 gives frequency one half, and the curve sharpens with size.
"""

import numpy as np

from rigidperc.clusters import threshold_scan
from rigidperc.lattice import Window

grid = np.round(np.linspace(0.3, 0.7, 9), 3)

for n in (16, 32, 64):
    rows = threshold_scan(Window(n + 1, n), grid, trials=400, seed=1)
    curve = " ".join(f"{r.crossing_freq:5.3f}" for r in rows)
    print(f"n={n:3d}  {curve}")

print("p      ", " ".join(f"{p:5.3f}" for p in grid))

# the largest weak cluster holds most weak bonds below 1/2 and a vanishing share above
rows = threshold_scan(Window(129, 128), [0.4, 0.5, 0.6], trials=100, seed=2)
for r in rows:
    print(f"p={r.p}: largest cluster share {r.largest_fraction:.3f} +- {r.largest_fraction_se:.3f}")
