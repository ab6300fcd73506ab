"""The Z2-graded algebra of complex matrices extended by conjugation.

An element A0 + A1 C acts on z in C^n as A0 z + A1 conj(z). The relations
C^2 = I and C A = conj(A) C give the product

    (A0 + A1 C)(B0 + B1 C) = (A0 B0 + A1 conj(B1)) + (A0 B1 + A1 conj(B0)) C.

``rho`` realises the algebra faithfully as real 2n x 2n matrices acting on
(Re z, Im z).
"""

from dataclasses import dataclass

import numpy as np

from . import numcore
from .errors import DimensionMismatch, NotContractive, NotInvertible, SingularMatrix


@dataclass(frozen=True, eq=False)
class GradedElement:
    a0: np.ndarray
    a1: np.ndarray

    def __post_init__(self):
        a0 = np.asarray(self.a0, dtype=complex)
        a1 = np.asarray(self.a1, dtype=complex)
        numcore.as_square(a0, "a0")
        if a1.shape != a0.shape:
            raise DimensionMismatch(f"components have shapes {a0.shape} and {a1.shape}")
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)

    @property
    def n(self):
        return self.a0.shape[0]

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), np.zeros((n, n)))

    @classmethod
    def conjugation(cls, n):
        """The bare involution C."""
        return cls(np.zeros((n, n)), np.eye(n))

    @classmethod
    def random(cls, rng, n):
        parts = rng.uniform(-1.0, 1.0, size=(4, n, n))
        return cls(parts[0] + 1j * parts[1], parts[2] + 1j * parts[3])

    def __matmul__(self, other):
        return gmul(self, other)

    def __add__(self, other):
        _check_sizes(self, other)
        return GradedElement(self.a0 + other.a0, self.a1 + other.a1)

    def __sub__(self, other):
        _check_sizes(self, other)
        return GradedElement(self.a0 - other.a0, self.a1 - other.a1)

    def __neg__(self):
        return GradedElement(-self.a0, -self.a1)

    def scale(self, c):
        """Left multiplication by the complex scalar ``c`` (c I, not c C)."""
        return GradedElement(c * self.a0, c * self.a1)

    def apply(self, z):
        """A0 z + A1 conj(z); works for vectors and for stacks of column vectors."""
        z = np.asarray(z, dtype=complex)
        return self.a0 @ z + self.a1 @ np.conj(z)

    def norm(self):
        return max(numcore.max_norm(self.a0), numcore.max_norm(self.a1))


@dataclass(frozen=True, eq=False)
class ComplexSystem:
    """z' + a z + b conj(z) = 0."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        numcore.as_square(a, "a")
        if b.shape != a.shape:
            raise DimensionMismatch(f"a and b have shapes {a.shape} and {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.a.shape[0]

    def as_element(self):
        return GradedElement(self.a, self.b)

    def rhs(self, z):
        return -(self.a @ z + self.b @ np.conj(z))


def _check_sizes(a, b):
    if a.a0.shape != b.a0.shape:
        raise DimensionMismatch(f"graded elements of sizes {a.n} and {b.n}")


def gmul(a, b):
    _check_sizes(a, b)
    return GradedElement(
        a.a0 @ b.a0 + a.a1 @ np.conj(b.a1),
        a.a0 @ b.a1 + a.a1 @ np.conj(b.a0),
    )


def gpow(a, k):
    if k < 0:
        raise ValueError("power must be non-negative")
    out = GradedElement.identity(a.n)
    for _ in range(k):
        out = gmul(out, a)
    return out


def _delta(p, q):
    # (P - Q conj(P^-1 Q))^-1
    return numcore.inverse(p - q @ np.conj(numcore.solve(p, q)))


def ginv(a):
    """Inverse in the graded algebra.

    Pure elements are inverted directly; mixed ones use
    (A0 + A1 C)^-1 = D(A0, A1) + D(conj A1, conj A0) C with
    D(P, Q) = (P - Q conj(P^-1 Q))^-1. When an intermediate inverse in that
    route is singular the element is inverted through ``rho`` instead.
    """
    zero0 = not np.any(a.a0)
    zero1 = not np.any(a.a1)
    try:
        if zero1:
            return GradedElement(numcore.inverse(a.a0), np.zeros_like(a.a1))
        if zero0:
            return GradedElement(np.zeros_like(a.a0), numcore.inverse(np.conj(a.a1)))
        return GradedElement(_delta(a.a0, a.a1), _delta(np.conj(a.a1), np.conj(a.a0)))
    except SingularMatrix as exc:
        route_error = exc
    try:
        return unrho(numcore.inverse(rho(a)))
    except SingularMatrix:
        raise NotInvertible(f"graded element is not invertible ({route_error})") from None


def rho(a):
    """Real 2n x 2n matrix of A0 + A1 C acting on (Re z, Im z)."""
    if not isinstance(a, GradedElement):
        a = GradedElement(a, np.zeros_like(np.asarray(a)))
    r0, i0 = a.a0.real, a.a0.imag
    r1, i1 = a.a1.real, a.a1.imag
    # rho(A1) rho(C) = [[Re, Im], [Im, -Re]]
    return np.block([[r0 + r1, -i0 + i1], [i0 + i1, r0 - r1]])


def unrho(m):
    """Inverse of :func:`rho`; every real 2n x 2n matrix is in its image."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0] // 2
    if m.shape != (2 * n, 2 * n):
        raise DimensionMismatch(f"expected an even square matrix, got {m.shape}")
    p, q = m[:n, :n], m[:n, n:]
    r, s = m[n:, :n], m[n:, n:]
    a0 = (p + s) / 2 + 1j * (r - q) / 2
    a1 = (p - s) / 2 + 1j * (r + q) / 2
    return GradedElement(a0, a1)


def rho_vec(z):
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag])


def unrho_vec(v):
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    return v[:n] + 1j * v[n:]


def rho_conjugation(n):
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def spectral_radius_estimate(m, iterations=8):
    """Gelfand estimate ||M^(2^k)||^(1/2^k) by repeated squaring (an upper bound)."""
    m = np.asarray(m)
    log_scale = 0.0
    p = m.copy()
    for k in range(iterations):
        s = np.linalg.norm(p, 2)
        if s == 0.0:
            return 0.0
        p = p / s
        log_scale += np.log(s) / 2**k
        p = p @ p
    s = np.linalg.norm(p, 2)
    if s == 0.0:
        return 0.0
    return float(np.exp(log_scale + np.log(s) / 2**iterations))


def neumann_identity_check(a, t, kmax):
    """Defect of (I - t A)^-1 against the truncated series sum_{k<=kmax} (t A)^k.

    The precondition is checked with a Gelfand estimate of the spectral
    radius of rho(t A).
    """
    ta = a.scale(t)
    radius = spectral_radius_estimate(rho(ta))
    if radius >= 1.0:
        raise NotContractive(f"spectral radius estimate {radius:.4g} of t*A is not below 1")
    lhs = ginv(GradedElement.identity(a.n) - ta)
    term = GradedElement.identity(a.n)
    total = term
    for _ in range(kmax):
        term = gmul(term, ta)
        total = total + term
    return (lhs - total).norm()


def reduce_to_canonical(big_a, big_b):
    """Bz' + Az = 0 becomes z' + (B^-1 A) z = 0; returns the canonical system."""
    c = gmul(ginv(big_b), big_a)
    return ComplexSystem(c.a0, c.a1)


@dataclass(frozen=True)
class FundamentalPair:
    """Samples of z(t) = X0(t) z0 + X1(t) conj(z0) on an equally spaced grid."""

    times: np.ndarray
    x0: np.ndarray
    x1: np.ndarray

    def z(self, z0):
        """Trajectory z(t_k) for the initial value ``z0``; rows follow ``times``."""
        z0 = np.asarray(z0, dtype=complex)
        return self.x0 @ z0 + self.x1 @ np.conj(z0)


def _pack(x0, x1):
    return np.concatenate([x0.ravel().view(float), x1.ravel().view(float)])


def _unpack(v, n):
    half = v.size // 2
    x0 = np.ascontiguousarray(v[:half]).view(complex).reshape(n, n)
    x1 = np.ascontiguousarray(v[half:]).view(complex).reshape(n, n)
    return x0, x1


def _pair_field(sys):
    n = sys.n
    a, b = sys.a, sys.b

    def field(_, v):
        x0, x1 = _unpack(v, n)
        return _pack(-(a @ x0 + b @ np.conj(x1)), -(a @ x1 + b @ np.conj(x0)))

    return field


def _split_states(states, n):
    half = 2 * n * n
    x0 = np.ascontiguousarray(states[:, :half]).view(complex).reshape(-1, n, n)
    x1 = np.ascontiguousarray(states[:, half:]).view(complex).reshape(-1, n, n)
    return x0, x1


def solve_fundamental_pair(sys, t1, h=1e-3):
    """Integrate X0' = -(A X0 + B conj(X1)), X1' = -(A X1 + B conj(X0)).

    X0(0) = I, X1(0) = 0. The state is integrated by RK4 as a real vector of
    length 4 n^2.
    """
    n = sys.n
    v0 = _pack(np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex))
    traj = numcore.rk4_integrate(_pair_field(sys), v0, 0.0, float(t1), h)
    return FundamentalPair(traj.times, *_split_states(traj.states, n))


def fundamental_pair_at(sys, times, h=1e-3):
    """The pair sampled at increasing non-negative ``times``.

    Each interval between requested times is integrated with step ``h``, the
    last step of an interval being shortened to land on the sample.
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0.0 or np.any(np.diff(times) < 0.0)):
        raise ValueError("sample times must be non-negative and increasing")
    n = sys.n
    field = _pair_field(sys)
    v = _pack(np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex))
    t = 0.0
    rows = []
    for target in times:
        v = numcore.rk4_integrate(field, v, t, float(target), h).final
        t = float(target)
        rows.append(v)
    states = np.array(rows).reshape(len(rows), -1)
    return FundamentalPair(times, *_split_states(states, n))


def integrate_rho(sys, z0, t1, h=1e-3):
    """Integrate the real 2n system w' = -rho(A + B C) w from rho_vec(z0).

    ``z0`` may be a vector or an (n, k) stack of initial values in columns.
    """
    m = -rho(sys.as_element())
    traj = numcore.rk4_integrate(lambda _, w: m @ w, rho_vec(z0), 0.0, float(t1), h)
    n = sys.n
    return traj.times, traj.states[:, :n] + 1j * traj.states[:, n:]


def second_order_coeffs(sys):
    """(F, G) with X'' + F X' + G X = 0 for both components of the pair.

    Eliminating conj(X1) from the first-order system gives
    F = A + B conj(A) B^-1 and G = B conj(A) B^-1 A - B conj(B). Writing the
    system as z' + A z + conj(P z) with P = conj(B) these read
    F = A + conj(P A P^-1), G = conj(P A P^-1) A - conj(P) P.
    """
    a, b = sys.a, sys.b
    try:
        b_inv = numcore.inverse(b)
    except SingularMatrix:
        raise SingularMatrix("B is singular; only the first-order system is available") from None
    twisted = b @ np.conj(a) @ b_inv
    return a + twisted, twisted @ a - b @ np.conj(b)


def ansatz_coeffs(x0, xp0, gamma, omega):
    """alpha, beta with X = alpha e^((Gamma+Omega)t) + beta e^((Gamma-Omega)t).

    Matches X(0) = alpha + beta and X'(0) = alpha (Gamma+Omega) + beta (Gamma-Omega).
    """
    try:
        omega_inv = numcore.inverse(omega)
    except SingularMatrix:
        raise SingularMatrix("Omega is singular") from None
    alpha = 0.5 * (xp0 - x0 @ (gamma - omega)) @ omega_inv
    beta = -0.5 * (xp0 - x0 @ (gamma + omega)) @ omega_inv
    return alpha, beta
