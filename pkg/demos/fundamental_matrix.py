# Fundamental matrix of F u'(t) + G u'(-t) + A u(t) + B u(-t) = 0
#
# Mixing t and -t turns the problem into a second order one. The package
# builds X(t) from hyperbolic series in E and checks the result against the
# original equation.

import numpy as np

from reflectinv import reflection
from reflectinv.reflection import ReflectionSystem

rng = np.random.default_rng(3)
sys = reflection.random_system(rng, 3, e_norm_max=10.0)
print("E =\n", np.round(sys.E, 3))

# %% X(t) and its residual in the reflection equation
for t in (-1.0, -0.25, 0.0, 0.5, 2.0):
    x = reflection.fundamental_matrix(sys, t)
    print(f"t={t:+.2f}  |X|={np.linalg.norm(x):9.3e}  residual={np.abs(reflection.fundamental_residual(sys, t)).max():.1e}")

# %% a scalar sanity check: u' + u = 0 decays like exp(-t)
decay = ReflectionSystem.identity_decay(1)
print("X(1) =", reflection.fundamental_matrix(decay, 1.0)[0, 0], "exp(-1) =", np.exp(-1.0))

# %% the determinant pair (det X, det X') for n = 2 follows a linear system
sys2 = reflection.random_system(rng, 2, e_norm_max=4.0)
traj = reflection.ajl_integrate(sys2, 1.0)
x, xp = reflection.fundamental_pair(sys2, 1.0)
print("integrated det X(1):", traj.final[0], " direct:", np.linalg.det(x))
print("integrated det X'(1):", traj.final[1], " direct:", np.linalg.det(xp))

# %% the Riccati variable Y = X' X^-1
t = 0.3
print("Y(0.3) direct vs closed form:",
      np.abs(reflection.y_direct(sys2, t) - reflection.y_closed_form(sys2, t)).max())
print("Riccati residual:", np.abs(reflection.riccati_residual(sys2, t)).max())
