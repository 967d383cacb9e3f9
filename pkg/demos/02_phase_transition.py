# Empirical success rate over (s, m) for amplitude PWF with hard thresholding.
# The boundary tracks m ~ s log(n/s); compare with s^2 on the right.

import numpy as np

from pwfkit.geometry import m0_l1_sparse
from pwfkit.harness import TrialSpec, run_grid
from pwfkit.solver import SolverConfig

n = 256
s_values = [2, 4, 8, 16]
factors = [0.5, 1, 2, 3, 6]
base = TrialSpec(n=n, m=1, regularizer="l0", init="oracle", rho=1 / 15,
                 solver=SolverConfig("amplitude", max_iters=200, tol_rel=1e-5))

rows = run_grid(base, s_values, lambda s: [int(np.ceil(f * m0_l1_sparse(n, s))) for f in factors],
                trials=20, base_seed=7)

print("success rate; columns are m / (2 s ln(n/s))")
print("   s " + "".join(f"{f:>8}" for f in factors) + "     s^2")
for s in s_values:
    rates = [r["successes"] / r["trials"] for r in rows if r["s"] == s]
    print(f"{s:4d} " + "".join(f"{p:8.2f}" for p in rates) + f"{s * s:8d}")

# same grid from the command line:  pwfkit grid --config configs/grid_barrier.yaml
