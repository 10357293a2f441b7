"""Chemical distance in the weak cluster and the limit energy of a polygon.

D(0, m tau) / m settles to a norm lambda_p(tau).  At p = 0 it is the l1 norm
(plus a 1/m offset from counting both end bonds); strong bonds force detours
and inflate it, most along the axes.
"""

import math

from rigidperc.estimators import (LambdaTable, PolygonalPhase, continuity_sweep, estimate_lambda,
                                  limit_functional)

m, trials = 120, 40

for p in (0.0, 0.1, 0.2, 0.3):
    e1 = estimate_lambda(p, (1, 0), m, trials, seed=3, extrapolate=True)
    d = estimate_lambda(p, (1, 1), m, trials, seed=3)
    print(f"p={p}: lambda(e1)={e1.mean:.4f} +- {e1.std_error:.4f} "
          f"(1/m corrected {e1.extrapolated:.4f}), lambda(1,1)/sqrt2={d.mean / math.sqrt(2):.4f}")

# direction table over one quadrant; symmetry under 90 degree turns covers the rest
table = LambdaTable.estimate(0.2, 60, 20, seed=4, per_quadrant=8)
for a, v in zip(table.angles, table.values):
    print(f"  angle {math.degrees(a):5.1f} deg: lambda = {v:.4f}")

square = PolygonalPhase(((0, 0), (1, 0), (1, 1), (0, 1)))
diamond = PolygonalPhase(((0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5)))
print(f"limit energy, unit square : {limit_functional(square, table):.4f}")
print(f"limit energy, diamond     : {limit_functional(diamond, table):.4f}")

# weighted lattice: strong bonds cost beta; the surface tension climbs towards lambda
sweep = continuity_sweep(0.2, (0, 1), 80, [1, 4, 16, 64, 256], 30, seed=5)
for row in sweep.rows:
    print(f"beta={row.beta:6.0f}: phi={row.estimate.mean:.4f}  gap to lambda {row.gap:+.4f}")
