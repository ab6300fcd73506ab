# Linear systems in z and conj(z)
#
# z' + A z + B conj(z) = 0 is not complex linear, but elements a0 + a1 C
# with C z = conj(z) form an algebra. rho maps that algebra into real 2n x 2n
# matrices, so the system becomes an ordinary real linear ODE.

import numpy as np

from reflectinv import conjalg
from reflectinv.conjalg import ComplexSystem, GradedElement

rng = np.random.default_rng(11)
n = 2
a = GradedElement.random(rng, n)
b = GradedElement.random(rng, n)
z = rng.normal(size=n) + 1j * rng.normal(size=n)

# %% products act like composition of the maps z -> a0 z + a1 conj(z)
print("(ab)z - a(bz):", np.abs((a @ b).apply(z) - a.apply(b.apply(z))).max())
print("rho is multiplicative:", np.abs(conjalg.rho(a @ b) - conjalg.rho(a) @ conjalg.rho(b)).max())

# %% inverses stay inside the algebra
inv = conjalg.ginv(a)
print("a^-1 a - 1:", (inv @ a - GradedElement.identity(n)).norm())

# %% solving z' + A z + B conj(z) = 0 by the fundamental pair
sys = ComplexSystem(0.5 * rng.normal(size=(n, n)) + 0.5j * rng.normal(size=(n, n)),
                    0.5 * rng.normal(size=(n, n)))
pair = conjalg.solve_fundamental_pair(sys, 1.0)
z_pair = pair.z(z)
times, z_rho = conjalg.integrate_rho(sys, z, 1.0)
print("pair vs real embedding at t=1:", np.abs(z_pair[-1] - z_rho[-1]).max())

# %% B z' + A z = 0 reduces to the canonical form when B is invertible
big_b = GradedElement.random(rng, n) + GradedElement.identity(n).scale(3.0)
canonical = conjalg.reduce_to_canonical(big_a=a, big_b=big_b)
print("canonical A:\n", np.round(canonical.a, 3))
