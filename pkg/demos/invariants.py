# Crossed invariants Z_{m1..mk}(X1..Xk)
#
# det(I + s1 X1 + ... + sk Xk) is a polynomial in s; its coefficients are the
# invariants. Z_n(X) = det X, Z_1(X) = tr X, and mixed indices blend the
# arguments the same way the mixed discriminant does.

import numpy as np

from reflectinv import invariants, numcore
from reflectinv.invariants import z_value

rng = np.random.default_rng(5)
x, y = rng.uniform(-1, 1, (2, 3, 3))

print("Z_3(X) vs det X:", z_value((3,), [x]), np.linalg.det(x))
print("Z_1(X) vs tr X:", z_value((1,), [x]), np.trace(x))

# %% three routes to the same number
for ms in [(1, 1), (2, 1), (1, 2)]:
    print(ms, z_value(ms, [x, y]), invariants.z_via_tracelog(ms, [x, y]),
          invariants.tracelog_polynomial([x, y]).coefficient(ms))

# %% closed forms in traces
print("Z_3 closed form:", invariants.closed_form((3,), [x]))

# %% the sum of indices can not exceed n
print("Z_{2,2} for 3x3:", z_value((2, 2), [x, y]))

# %% Jacobi/Liouville: (log det X)' = tr(X^-1 X') along a polynomial path
path = numcore.PolyPath(list(rng.uniform(-1, 1, (3, 3, 3))))
print("Liouville residual at t=0.2:", invariants.liouville_residual(path, 0.2))
