# Recovering a sparse vector from squared Gaussian measurements.
#
# We only see y_r = (a_r . x)^2, so x and -x look identical. Distances are
# therefore measured up to sign.

import numpy as np

from pwfkit import (
    SolverConfig,
    gen_structured_signal,
    init_oracle,
    make_measurements,
    m0_l1_sparse,
    pwf_run,
    sublevel_from_signal,
)

n, s = 128, 4
m = 4 * int(np.ceil(m0_l1_sparse(n, s)))
print(f"n={n}, s={s}, m={m}  (2 s ln(n/s) = {m0_l1_sparse(n, s):.2f})")

x = gen_structured_signal("sparse", n, 1, s=s).values
meas = make_measurements(x, m, 2)
K = sublevel_from_signal("l0", x)   # keep the s largest entries
print("constraint:", K)

# amplitude loss, unit step after a projection-only first update
z0 = init_oracle(x, 1 / 15, 3)
trace = pwf_run(meas, K, SolverConfig("amplitude", max_iters=200, tol_rel=1e-10), z0, x_true=x)

d = trace.column("dist") / np.linalg.norm(x)
for tau, dist in zip(trace.column("tau").astype(int), d):
    print(f"  tau={tau:2d}  dist/|x| = {dist:.3e}")
print("per-step ratios:", np.round(d[1:] / d[:-1], 3))

# the intensity loss needs many more, much smaller steps
K1 = sublevel_from_signal("l1", x)
meas1 = make_measurements(x, int(np.ceil(8 * m0_l1_sparse(n, s) * np.log(n))), 4)
tr1 = pwf_run(meas1, K1, SolverConfig("intensity", max_iters=20000, tol_rel=1e-4, record_every=500),
              init_oracle(x, 1 / 8, 5), x_true=x)
print(f"intensity PWF on the l1 ball: m={meas1.m}, {tr1.iterations_used} iterations, "
      f"converged={tr1.converged}")
