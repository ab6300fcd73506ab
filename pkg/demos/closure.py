# Does differentiation close on determinant monomials of X and X'?
#
# With X'' = X E every derivative of a product of crossed invariants in X, X'
# and their products with powers of E is again such a product, times
# invariants of E. For n = 2 two states suffice; for n >= 3 the family keeps
# growing.

import numpy as np

from reflectinv import closure, reflection

report = closure.explore(2, 6)
print("n=2 closed:", report.closed)
print("states:", [s.label() for s in report.states])
print("transition:", report.transition_labels())

rng = np.random.default_rng(2)
sys = reflection.random_system(rng, 2, e_norm_max=4.0)
grid = np.linspace(0.0, 1.5, 7)
print("numeric check on a random system:", closure.numeric_verify(report, sys, grid))

# %% the n = 3 family does not close
for n in (3, 4):
    r = closure.explore(n, 6)
    print(f"n={n} closed: {r.closed}  cumulative states per depth: {closure.cumulative_counts(r)}")
