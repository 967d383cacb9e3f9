# How many measurements does a structure "cost"? The statistical dimension of
# the descent cone, E||P_C(g)||^2, against the closed-form guess 2 s ln(n/s).

import numpy as np

from pwfkit.geometry import l1_descent_cone, m0_l1_sparse, orthant_cone, statistical_dimension_mc, subspace_cone
from pwfkit.model import gen_structured_signal

print("sanity: a 7-dim subspace and the orthant in R^64")
print(statistical_dimension_mc(subspace_cone(np.random.default_rng(0).standard_normal((50, 7))), 20000, 1))
print(statistical_dimension_mc(orthant_cone(64), 20000, 2))

print("\n  n    s   E|P_C g|^2   2 s ln(n/s)")
for n in (100, 400):
    for s in (1, 4, 16):
        x = gen_structured_signal("sparse", n, 10 + s, s=s).values
        est = statistical_dimension_mc(l1_descent_cone(x), 20000, 3)
        print(f"{n:4d} {s:4d} {est.mean_sq:10.2f} +- {est.stderr:.2f} {m0_l1_sparse(n, s):10.2f}")

# the estimate only depends on the sign pattern of x
x = gen_structured_signal("sparse", 100, 5, s=4).values
a = statistical_dimension_mc(l1_descent_cone(x), 5000, 9).mean_sq
b = statistical_dimension_mc(l1_descent_cone(3 * np.sign(x)), 5000, 9).mean_sq
print("\nrescaled nonzeros, same cone:", a == b)
