"""Dense linear algebra, matrix power series and small numerical helpers.

Matrices are plain ``numpy`` arrays throughout. Real inputs stay real,
complex inputs stay complex.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonFiniteState, SeriesDiverged, SingularMatrix, Unsupported

PIVOT_RTOL = 1e-12
SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 300


def as_square(m, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def max_norm(m):
    """Largest absolute entry; 0 for empty input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def determinant(m):
    """Determinant through LU with partial pivoting (LAPACK ``getrf``)."""
    m = as_square(m)
    return np.linalg.det(m)


def _lu(m):
    m = as_square(m)
    with warnings.catch_warnings():
        # singularity is reported below with our own tolerance
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=True)
    tol = PIVOT_RTOL * max_norm(m)
    pivots = np.abs(np.diag(lu))
    if m.size == 0 or np.min(pivots) <= tol:
        raise SingularMatrix(
            f"pivot {np.min(pivots) if m.size else 0.0:.3e} below tolerance {tol:.3e}"
        )
    return lu, piv


def inverse(m):
    """Inverse via LU; raises SingularMatrix when a pivot is below 1e-12 * max|m|."""
    lu, piv = _lu(m)
    n = lu.shape[0]
    return scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=lu.dtype))


def solve(m, rhs):
    """Solve ``m @ x = rhs`` with the same singularity policy as :func:`inverse`."""
    lu, piv = _lu(m)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(rhs, dtype=np.result_type(lu, rhs)))


def _cofactor_adjugate(m):
    n = m.shape[0]
    if n == 1:
        return np.ones_like(m)
    adj = np.empty_like(m)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def adjugate(m):
    """Transpose of the cofactor matrix, so that ``adjugate(m) @ m == det(m) I``."""
    m = as_square(m)
    n = m.shape[0]
    if n <= 4:
        return _cofactor_adjugate(m)
    try:
        return determinant(m) * inverse(m)
    except SingularMatrix:
        if n <= 6:
            return _cofactor_adjugate(m)
        raise Unsupported(f"adjugate of a singular {n}x{n} matrix is not supported") from None


def _series_sum(e, t):
    n = e.shape[0]
    dtype = np.result_type(e, float)
    c_term = np.eye(n, dtype=dtype)
    s_term = t * np.eye(n, dtype=dtype)
    c_sum = c_term.copy()
    s_sum = s_term.copy()
    c_done = s_done = False
    c_size = s_size = 1.0
    t2 = t * t
    for k in range(1, SERIES_MAX_TERMS):
        if not c_done:
            c_term = (e @ c_term) * (t2 / ((2 * k - 1) * (2 * k)))
            c_sum += c_term
            c_size = abs(c_sum).max()
            c_done = abs(c_term).max() <= SERIES_RTOL * c_size
        if not s_done:
            s_term = (e @ s_term) * (t2 / ((2 * k) * (2 * k + 1)))
            s_sum += s_term
            s_size = abs(s_sum).max()
            s_done = abs(s_term).max() <= SERIES_RTOL * s_size
        if not (np.isfinite(c_size) and np.isfinite(s_size)):
            break
        if c_done and s_done:
            return c_sum, s_sum
    raise SeriesDiverged(
        f"series in E did not settle within {SERIES_MAX_TERMS} terms "
        f"(max|E| t^2 = {max_norm(e) * t2:.3g})"
    )


def hyperbolic_series(e, t):
    """Return ``(C, S)`` with C = sum E^k t^2k/(2k)! and S = sum E^k t^(2k+1)/(2k+1)!.

    Both series are summed term by term until the newest term is negligible
    against the running sum (relative 1e-16 in max-norm), for at most
    ``SERIES_MAX_TERMS`` terms each. When ||E||_inf t^2 exceeds 1 the series
    is summed at t / 2^s and doubled back with C(2t) = C^2 + E S^2 and
    S(2t) = 2 S C; direct summation would lose all digits to cancellation
    when E has large negative eigenvalues.
    """
    e = as_square(e, "E")
    t = float(t)
    size = np.linalg.norm(e, np.inf) * t * t
    steps = 0
    if np.isfinite(size) and size > 1.0:
        steps = int(np.ceil(0.5 * np.log2(size)))
    c, s = _series_sum(e, t / 2.0**steps)
    for _ in range(steps):
        c, s = c @ c + e @ s @ s, 2.0 * s @ c
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
        raise SeriesDiverged(f"series overflow (||E|| t^2 = {size:.3g})")
    return c, s


def even_series(e, t):
    return hyperbolic_series(e, t)[0]


def odd_series(e, t):
    return hyperbolic_series(e, t)[1]


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]


def rk4_integrate(field, y0, t0, t1, h):
    """Classical fixed-step fourth-order Runge-Kutta from ``t0`` to ``t1``.

    ``field(t, y)`` returns dy/dt with the shape of ``y``. The grid is
    ``t0 + k h``; the last step is shortened to land on ``t1``. The state
    may be an array of any shape and dtype.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    y = np.array(y0, dtype=np.result_type(np.asarray(y0), float), copy=True)
    steps = int(np.ceil((t1 - t0) / h - 1e-9)) if t1 > t0 else 0
    times = np.minimum(t0 + h * np.arange(steps + 1), t1)
    if steps:
        times[-1] = t1
    states = np.empty((steps + 1,) + y.shape, dtype=y.dtype)
    states[0] = y
    for k in range(steps):
        t, dt = times[k], times[k + 1] - times[k]
        k1 = field(t, y)
        k2 = field(t + dt / 2, y + (dt / 2) * k1)
        k3 = field(t + dt / 2, y + (dt / 2) * k2)
        k4 = field(t + dt, y + dt * k3)
        y = y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"state became non-finite at t = {times[k + 1]:.6g}")
        states[k + 1] = y
    return Trajectory(times, states)


def central_diff(f, t, h, accuracy=2):
    """Symmetric first difference.

    ``accuracy=2`` is (f(t+h) - f(t-h)) / 2h; ``accuracy=4`` uses the
    five-point stencil.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    if accuracy == 2:
        return (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2 * h)
    if accuracy == 4:
        samples = [np.asarray(f(t + k * h)) for k in (-2, -1, 1, 2)]
        return (samples[0] - 8 * samples[1] + 8 * samples[2] - samples[3]) / (12 * h)
    raise ValueError("accuracy must be 2 or 4")


def central_diff2(f, t, h, accuracy=2):
    """Symmetric second difference.

    ``accuracy=2`` is (f(t+h) - 2 f(t) + f(t-h)) / h^2; ``accuracy=4`` uses
    the five-point stencil.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    if accuracy == 2:
        return (np.asarray(f(t + h)) - 2 * np.asarray(f(t)) + np.asarray(f(t - h))) / (h * h)
    if accuracy == 4:
        samples = [np.asarray(f(t + k * h)) for k in (-2, -1, 0, 1, 2)]
        return grid_second_derivative(np.stack(samples), h)[0]
    raise ValueError("accuracy must be 2 or 4")


def grid_derivative(samples, h):
    """Fourth-order accurate first derivative of equally spaced samples.

    Returns derivatives at the interior points ``samples[2:-2]``.
    """
    y = np.asarray(samples)
    return (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)


def grid_second_derivative(samples, h):
    """Fourth-order accurate second derivative at ``samples[2:-2]``."""
    y = np.asarray(samples)
    return (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)


class PolyPath:
    """Matrix path X(t) = sum_k t^k X_k given by its coefficient matrices."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = tuple(np.asarray(c) for c in coefficients)
        if not coeffs:
            raise ValueError("a path needs at least one coefficient")
        n = as_square(coeffs[0]).shape[0]
        for c in coeffs:
            if c.shape != (n, n):
                raise DimensionMismatch("path coefficients must be square of equal size")
        self.coefficients = coeffs

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def size(self):
        return self.coefficients[0].shape[0]

    def derivative(self, order=1):
        coeffs = list(self.coefficients)
        for _ in range(order):
            if len(coeffs) == 1:
                return PolyPath([np.zeros_like(coeffs[0])])
            coeffs = [k * c for k, c in enumerate(coeffs)][1:]
        return PolyPath(coeffs)

    def __call__(self, t):
        out = np.zeros_like(self.coefficients[-1], dtype=np.result_type(self.coefficients[-1], float))
        for c in reversed(self.coefficients):
            out = out * t + c
        return out

    def derivatives(self, t, count):
        """X(t), X'(t), ..., the first ``count`` derivatives including order 0."""
        return [self.derivative(k)(t) for k in range(count)]
