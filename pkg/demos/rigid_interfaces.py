"""Ground states with frozen half-plane boundary data.

Top half of the boundary ring is +1, bottom half -1.  Below p = 1/2 the
minimal interface threads weak bonds and its energy per unit length tracks
lambda_p; above 1/2 a strong dual crossing pins both phases and every
admissible state breaks a strong bond.
"""

from rigidperc.lattice import Window, sample_config
from rigidperc.spin import ground_state, halves_boundary, interface_vs_lambda, rigidity_probe

w = Window(24, 12)
cfg = sample_config(w, 0.25, 11)
u, e = ground_state(cfg, halves_boundary(w))
print(u.to_text())
print("energy:", e.to_json())

for p in (0.3, 0.45, 0.55, 0.7):
    print(f"p={p}: infinite-energy fraction {rigidity_probe(p, 32, 60, seed=12):.2f}")

cmp_ = interface_vs_lambda(0.2, 64, 40, seed=13)
print(f"interface density {cmp_.interface.mean:.4f} vs lambda {cmp_.lam.mean:.4f} "
      f"(difference {cmp_.difference:+.4f}, tolerance {cmp_.tolerance:.4f})")
