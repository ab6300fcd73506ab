"""Linear systems with reflection, F u'(t) + G u'(-t) + A u(t) + B u(-t) = 0.

The fundamental matrix is built from the square-root-free series

    X(t) = C(t) - M+ S(t),   C = sum E^k t^2k/(2k)!,  S = sum E^k t^(2k+1)/(2k+1)!

with E = (F-G)^-1 (A-B) (F+G)^-1 (A+B) and M+ = (F+G)^-1 (A+B). Since C and S
are power series in E, X'' = X E (E acting from the right).
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import numcore
from .errors import DimensionMismatch, SingularCoefficient, SingularMatrix

AJL_MODES = ("section45", "paper-theorem2")


class ReflectionOperators(NamedTuple):
    E: np.ndarray
    M_plus: np.ndarray


@dataclass(frozen=True, eq=False)
class ReflectionSystem:
    """The four real coefficient matrices of a reflection system."""

    F: np.ndarray
    G: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        mats = [np.asarray(getattr(self, k), dtype=float) for k in "FGAB"]
        n = numcore.as_square(mats[0], "F").shape[0]
        for name, m in zip("FGAB", mats):
            if m.shape != (n, n):
                raise DimensionMismatch(f"{name} has shape {m.shape}, expected {(n, n)}")
            object.__setattr__(self, name, m)

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def norm(self):
        return max(numcore.max_norm(m) for m in (self.F, self.G, self.A, self.B))

    @cached_property
    def operators(self):
        return derive_operators(self)

    @property
    def E(self):
        return self.operators.E

    @property
    def M_plus(self):
        return self.operators.M_plus

    @classmethod
    def identity_decay(cls, n):
        """F = I, G = 0, A = I, B = 0: E = I, M+ = I and X(t) = e^-t I."""
        eye = np.eye(n)
        return cls(eye, np.zeros((n, n)), eye, np.zeros((n, n)))


def random_system(rng, n, cond_max=100.0, e_norm_max=None, max_tries=10_000):
    """Entries uniform in [-1, 1], resampled until cond(F +- G) < ``cond_max``.

    With ``e_norm_max`` set, systems whose E has spectral norm above it are
    rejected as well.
    """
    for _ in range(max_tries):
        F, G, A, B = rng.uniform(-1.0, 1.0, size=(4, n, n))
        if np.linalg.cond(F - G) >= cond_max or np.linalg.cond(F + G) >= cond_max:
            continue
        sys = ReflectionSystem(F, G, A, B)
        if e_norm_max is None or np.linalg.norm(sys.E, 2) <= e_norm_max:
            return sys
    raise RuntimeError("could not sample a well-conditioned reflection system")


def derive_operators(sys):
    try:
        inv_minus = numcore.inverse(sys.F - sys.G)
    except SingularMatrix:
        raise SingularCoefficient("F-G") from None
    try:
        inv_plus = numcore.inverse(sys.F + sys.G)
    except SingularMatrix:
        raise SingularCoefficient("F+G") from None
    m_plus = inv_plus @ (sys.A + sys.B)
    e = inv_minus @ (sys.A - sys.B) @ m_plus
    return ReflectionOperators(e, m_plus)


def fundamental_matrix(sys, t):
    c, s = numcore.hyperbolic_series(sys.E, t)
    return c - sys.M_plus @ s


def fundamental_matrix_derivative(sys, t):
    c, s = numcore.hyperbolic_series(sys.E, t)
    return s @ sys.E - sys.M_plus @ c


def fundamental_pair(sys, t):
    """(X(t), X'(t)) sharing one series evaluation."""
    c, s = numcore.hyperbolic_series(sys.E, t)
    return c - sys.M_plus @ s, s @ sys.E - sys.M_plus @ c


def reflection_residual(sys, t, u):
    """F u'(t) + G u'(-t) + A u(t) + B u(-t).

    ``u(s)`` returns ``(value, derivative)`` at ``s``; values may be vectors
    or matrices (then the residual is taken column by column).
    """
    u_pos, du_pos = u(t)
    u_neg, du_neg = u(-t)
    return sys.F @ du_pos + sys.G @ du_neg + sys.A @ u_pos + sys.B @ u_neg


def fundamental_residual(sys, t):
    return reflection_residual(sys, t, lambda s: fundamental_pair(sys, s))


class AjlState(NamedTuple):
    x: float
    y: float
    dx: float
    dy: float


def ajl_initial_state(sys, mode="section45"):
    """One-point conditions for (det X, det X') at t = 0, n = 2."""
    _check_ajl(sys, mode)
    e, m = sys.E, sys.M_plus
    tr_adj = float(np.trace(numcore.adjugate(m) @ e))
    if mode == "section45":
        y0 = float(np.linalg.det(-m))
        return AjlState(1.0, y0, -float(np.trace(m)), -tr_adj)
    return AjlState(1.0, float(np.linalg.det(m)), -float(np.trace(m)), tr_adj)


def ajl_matrix(sys, mode="section45"):
    """Coefficients K of (x, y)'' = K (x, y)."""
    _check_ajl(sys, mode)
    tr_e = float(np.trace(sys.E))
    det_e = float(np.linalg.det(sys.E))
    if mode == "section45":
        return np.array([[tr_e, 2.0], [2.0 * det_e, tr_e]])
    return np.array([[tr_e, -2.0], [-2.0 * det_e, tr_e]])


def _check_ajl(sys, mode):
    if sys.n != 2:
        raise DimensionMismatch(f"the determinant system needs n = 2, got n = {sys.n}")
    if mode not in AJL_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {AJL_MODES}")


def ajl_integrate(sys, t1, h=1e-3, mode="section45"):
    """Integrate the n = 2 determinant system; states are rows (x, y, x', y').

    ``section45`` is the system obtained by differentiating det X and det X'
    twice under X'' = X E. ``paper-theorem2`` keeps the alternative sign
    convention (coupling -2y, -2 det E x and y'(0) = +tr(Adj(M+) E)); it does
    not reproduce det X in general.
    """
    k = ajl_matrix(sys, mode)
    y0 = np.array(ajl_initial_state(sys, mode))

    def field(_, s):
        pos = s[:2]
        return np.concatenate([s[2:], k @ pos])

    return numcore.rk4_integrate(field, y0, 0.0, float(t1), h)


def y_direct(sys, t):
    """Y = X^-1 X'."""
    x, xp = fundamental_pair(sys, t)
    try:
        return numcore.solve(x, xp)
    except SingularMatrix:
        raise SingularMatrix(f"fundamental matrix is singular at t = {t}") from None


def y_closed_form(sys, t):
    """Y(t) = (-C M+ + E S)(-S M+ + C)^-1, the Riccati solution with Y(0) = -M+."""
    c, s = numcore.hyperbolic_series(sys.E, t)
    m = sys.M_plus
    num = -c @ m + sys.E @ s
    den = -s @ m + c
    try:
        # num @ den^-1 == (den^T \ num^T)^T
        return numcore.solve(den.T, num.T).T
    except SingularMatrix:
        raise SingularMatrix(f"Riccati denominator is singular at t = {t}") from None


def riccati_residual(sys, t, h=1e-4):
    """Central difference of Y minus the right-hand side E - Y^2."""
    dy = numcore.central_diff(lambda s: y_direct(sys, s), t, h)
    y = y_direct(sys, t)
    return dy - (sys.E - y @ y)


TRACE_CONVENTIONS = ("liouville", "printed")


def y_trace_identity(sys, t, h=1e-4, convention="liouville", accuracy=4):
    """Return ``(lhs, rhs)`` for the trace identity of Y at ``t``.

    lhs = Tr(Y^-1 E). With Y' = E - Y^2, Liouville's formula gives
    (log|det Y|)' = Tr(Y^-1 E) - Tr(Y), so the ``liouville`` convention uses
    rhs = Tr(Y) + (log|det Y|)'. The ``printed`` convention uses
    rhs = Tr(Y) - (log|det Y|)', which only agrees when det Y is stationary.
    The logarithmic derivative is a central difference of order ``accuracy``.
    """
    if convention not in TRACE_CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {TRACE_CONVENTIONS}")
    y = y_direct(sys, t)
    try:
        lhs = float(np.trace(numcore.solve(y, sys.E)))
    except SingularMatrix:
        raise SingularMatrix(f"Y is singular at t = {t}") from None

    def log_abs_det(s):
        sign, logdet = np.linalg.slogdet(y_direct(sys, s))
        if sign == 0:
            raise SingularMatrix(f"Y is singular at t = {s}")
        return logdet

    dlog = float(numcore.central_diff(log_abs_det, t, h, accuracy))
    sign = 1.0 if convention == "liouville" else -1.0
    return lhs, float(np.trace(y)) + sign * dlog


def random_riccati_system(rng, n, bound=3.0, t_range=(-1.0, 1.0), samples=41, batch=512, max_batches=2000):
    """Random system whose Y stays bounded away from blow-up and singularity.

    Draws entries uniform in [-1, 1] (cond(F +- G) < 100, spectral norm of E
    at most 4) and keeps the first draw for which both ||Y(t)|| and
    ||Y(t)^-1|| stay below ``bound`` on a slightly widened ``t_range``.
    Finite-difference checks of the Riccati equation are only meaningful away
    from the poles of Y and of Y^-1. Draws are screened in batches.
    """
    lo, hi = t_range
    pad = 0.01 * (hi - lo)
    ts = np.linspace(lo - pad, hi + pad, samples)
    order = np.argsort(np.abs(ts - (lo + hi) / 2))[::-1]
    for _ in range(max_batches):
        F, G, A, B = np.moveaxis(rng.uniform(-1.0, 1.0, size=(batch, 4, n, n)), 1, 0)
        plus, minus = F + G, F - G
        ok = (np.linalg.cond(plus) < 100.0) & (np.linalg.cond(minus) < 100.0)
        idx = np.flatnonzero(ok)
        m_plus = np.linalg.solve(plus[idx], A[idx] + B[idx])
        # Y(0) = -M+
        sv = np.linalg.svd(m_plus, compute_uv=False)
        keep = (sv[:, 0] <= bound) & (sv[:, -1] >= 1.0 / bound)
        idx, m_plus = idx[keep], m_plus[keep]
        e = np.linalg.solve(minus[idx], (A[idx] - B[idx]) @ m_plus)
        keep = np.linalg.norm(e, 2, axis=(1, 2)) <= 4.0
        for i in idx[keep]:
            sys = ReflectionSystem(F[i], G[i], A[i], B[i])
            try:
                for t in ts[order]:
                    y = y_direct(sys, t)
                    if np.linalg.norm(y, 2) > bound or np.linalg.norm(numcore.inverse(y), 2) > bound:
                        break
                else:
                    return sys
            except SingularMatrix:
                continue
    raise RuntimeError("could not sample a system with a well-behaved Riccati matrix")
