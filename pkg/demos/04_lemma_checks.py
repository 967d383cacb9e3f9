# Checking the probabilistic facts behind the convergence proofs by direct
# simulation. Each check returns a LemmaReport; concentration checks are gated
# on the fraction of random matrices that violate the stated bound.

import numpy as np

from pwfkit import lemma_lab as ll
from pwfkit.harness import LEMMA_SUITE

u, v = np.array([1.0, 0, 0]), np.array([1.0, 1.0, 0])
print("E|<u,a><a,v>| closed form:", ll.closed_form_abs_moment(u, v))
print("Monte Carlo (est, stderr):", ll.mc_abs_moment(u, v, 200_000, 0))

print("\nb_m = E||g||, with m - 1/2 <= b_m^2 <= m")
for m in (1, 2, 10, 1000, 10**6):
    b = ll.compute_bm(m)
    print(f"  m={m:>8}  b_m^2={b * b:.9f}  m-b_m^2={m - b * b:.3e}")

print("\ndefault suite")
for k, (name, check) in enumerate(LEMMA_SUITE.items()):
    if name in ("regularity", "mixed_fourth_moment"):
        continue  # the slower two; run `pwfkit verify --config configs/verify_all.yaml`
    r = check(k)
    print(f"  {name:<24} passed={r.passed}  worst={r.worst_violation:.3g}  ({r.notes})")
