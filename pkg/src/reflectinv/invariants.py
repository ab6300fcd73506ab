"""Crossed matrix invariants.

Z_{m_1..m_N}(X_1..X_N) is the coefficient of a_1^m_1 ... a_N^m_N in
det(I + sum_i a_i X_i). It vanishes for a negative index and for order
sum(m_i) > n; a zero index simply drops its argument.

Two independent evaluators are provided: :func:`z_value` interpolates the
determinant on an integer grid, :func:`z_via_tracelog` expands
exp(Tr log(I + M)) with truncated polynomial entries.
"""

import warnings
from collections import defaultdict

import numpy as np

from . import numcore
from .errors import ConditioningWarning, DimensionMismatch, SingularMatrix, Unsupported
from .polynomial import TruncatedMultiPoly, binomial, poly_matrix


def _prepare(ms, xs):
    ms = tuple(int(m) for m in ms)
    xs = [np.asarray(x) for x in xs]
    if len(ms) != len(xs):
        raise DimensionMismatch(f"{len(ms)} indices for {len(xs)} matrices")
    if not xs:
        return ms, xs, None
    n = numcore.as_square(xs[0]).shape[0]
    for x in xs:
        if x.shape != (n, n):
            raise DimensionMismatch("all arguments must be square of equal size")
    return ms, xs, n


def symmetric_nodes(count):
    """0, 1, -1, 2, -2, ... truncated to ``count`` nodes."""
    nodes = [0]
    k = 1
    while len(nodes) < count:
        nodes.extend([k, -k])
        k += 1
    return np.array(nodes[:count], dtype=float)


def _monomial_coefficient(values, nodes, m):
    """Coefficient of x^m of the interpolant through ``values`` along axis 0."""
    c = np.array(values, dtype=np.result_type(values, float))
    d = len(nodes) - 1
    for j in range(1, d + 1):
        denom = (nodes[j:] - nodes[:-j]).reshape((-1,) + (1,) * (c.ndim - 1))
        c[j:] = (c[j:] - c[j - 1 : -1]) / denom
    mono = np.zeros_like(c)
    mono[0] = c[d]
    for k in range(d - 1, -1, -1):
        shifted = np.zeros_like(mono)
        shifted[1:] = mono[:-1]
        mono = shifted - nodes[k] * mono
        mono[0] += c[k]
    return mono[m]


def z_value(ms, xs, short_circuit=True):
    """Crossed invariant by evaluation and Newton interpolation.

    The determinant det(I + sum a_i X_i) is sampled on the tensor grid of
    symmetric integer nodes scaled by 1 / (1 + max_i max|X_i|), and the wanted
    coefficient is extracted one variable at a time, innermost first. With
    ``short_circuit=False`` an order above n is computed rather than returned
    as an exact zero.
    """
    ms, xs, n = _prepare(ms, xs)
    if any(m < 0 for m in ms):
        return 0.0
    keep = [i for i, m in enumerate(ms) if m > 0]
    if not keep:
        return 1.0
    if short_circuit and sum(ms) > n:
        return 0.0
    if n > 8:
        warnings.warn(f"interpolation on a {n}x{n} grid is poorly conditioned", ConditioningWarning)
    ms = [ms[i] for i in keep]
    xs = [xs[i] for i in keep]
    degree = max([n] + ms)
    nodes = symmetric_nodes(degree + 1)
    scale = 1.0 / (1.0 + max(numcore.max_norm(x) for x in xs))

    axes = np.meshgrid(*([nodes * scale] * len(xs)), indexing="ij")
    mats = np.broadcast_to(np.eye(n), axes[0].shape + (n, n)).astype(np.result_type(*xs, float))
    for alpha, x in zip(axes, xs):
        mats = mats + alpha[..., None, None] * x
    values = np.linalg.det(mats)

    for m in reversed(ms):
        values = _monomial_coefficient(np.moveaxis(values, -1, 0), nodes, m)
    result = values / scale ** sum(ms)
    return complex(result) if np.iscomplexobj(result) else float(result)


def _trace(p):
    total = p[0, 0]
    for i in range(1, p.shape[0]):
        total = total + p[i, i]
    return total


def tracelog_polynomial(xs, caps=None, total_cap=None):
    """det(I + sum a_i X_i) as exp(sum_k (-1)^(k+1) Tr(M^k)/k), M = sum a_i X_i."""
    xs = [np.asarray(x) for x in xs]
    n = xs[0].shape[0]
    total_cap = n if total_cap is None else total_cap
    caps = caps if caps is not None else (total_cap,) * len(xs)
    m = poly_matrix(xs, caps, total_cap)
    log = TruncatedMultiPoly(len(xs), total_cap, caps=caps)
    power = m
    for k in range(1, min(n, total_cap) + 1):
        log = log + _trace(power) * ((-1) ** (k + 1) / k)
        if k < min(n, total_cap):
            power = power.dot(m)
    return log.exp()


def z_via_tracelog(ms, xs):
    ms, xs, n = _prepare(ms, xs)
    if any(m < 0 for m in ms):
        return 0.0
    keep = [i for i, m in enumerate(ms) if m > 0]
    if not keep:
        return 1.0
    if sum(ms) > n:
        return 0.0
    ms = tuple(ms[i] for i in keep)
    xs = [xs[i] for i in keep]
    value = tracelog_polynomial(xs, caps=ms, total_cap=sum(ms)).coefficient(ms)
    return complex(value) if isinstance(value, complex) else float(value)


def closed_form(ms, xs):
    """Trace formulas for Z_1, Z_2, Z_3, Z_{1,1} and Z_n = det."""
    ms, xs, n = _prepare(ms, xs)
    tr = np.trace
    if ms == (1,):
        return tr(xs[0])
    if ms == (2,):
        x = xs[0]
        return (tr(x) ** 2 - tr(x @ x)) / 2
    if ms == (3,):
        x = xs[0]
        x2 = x @ x
        return (tr(x) ** 3 - 3 * tr(x2) * tr(x) + 2 * tr(x2 @ x)) / 6
    if ms == (1, 1):
        x, y = xs
        return tr(x) * tr(y) - tr(x @ y)
    if ms == (n,):
        return numcore.determinant(xs[0])
    raise Unsupported(f"no closed trace form for index {ms}")


def dual_arguments(l, ms, a, bs):
    """Map (l, ms; A, B_i) to the dual (n - l - sum ms, ms; A^-1, A^-1 B_i) with factor det A."""
    a = np.asarray(a)
    n = a.shape[0]
    try:
        a_inv = numcore.inverse(a)
    except SingularMatrix:
        raise SingularMatrix("duality needs an invertible first argument") from None
    ms = tuple(ms)
    return numcore.determinant(a), n - l - sum(ms), ms, a_inv, [a_inv @ np.asarray(b) for b in bs]


def duality_pair(l, ms, a, bs):
    ms = tuple(ms)
    lhs = z_value((l,) + ms, [a] + list(bs))
    factor, l_dual, ms, a_inv, bs_dual = dual_arguments(l, ms, a, bs)
    rhs = factor * z_value((l_dual,) + ms, [a_inv] + bs_dual)
    return lhs, rhs


def det_factorization(ms, x, ys):
    """(Z_{n - sum ms, ms}(X, X Y_1, ...), det X * Z_ms(Y_1, ...))."""
    ms = tuple(ms)
    x = np.asarray(x)
    n = numcore.as_square(x).shape[0]
    lhs = z_value((n - sum(ms),) + ms, [x] + [x @ np.asarray(y) for y in ys])
    rhs = numcore.determinant(x) * z_value(ms, ys)
    return lhs, rhs


def collapse_repeated(a, b, w):
    """(Z_{a,b}(W, W), C(a+b, a) Z_{a+b}(W))."""
    lhs = z_value((a, b), [w, w])
    rhs = binomial(a + b, a) * z_value((a + b,), [w])
    return lhs, rhs


def epsilon_first_order(l, ms, a1, a2, bs, eps=1e-3):
    """Exact change of Z_{l,ms}(A1 + eps A2, B) against eps Z_{l-1,1,ms}(A1, A2, B)."""
    ms = tuple(ms)
    a1, a2 = np.asarray(a1), np.asarray(a2)
    bs = list(bs)
    base = z_value((l,) + ms, [a1] + bs)
    exact = z_value((l,) + ms, [a1 + eps * a2] + bs) - base
    predicted = eps * z_value((l - 1, 1) + ms, [a1, a2] + bs)
    return exact, predicted, eps


def epsilon_richardson_ratio(l, ms, a1, a2, bs, eps=(1e-3, 5e-4)):
    """Ratio of first-order errors at two step sizes; close to 4 for an O(eps^2) error."""
    errs = []
    for e in eps:
        exact, predicted, _ = epsilon_first_order(l, ms, a1, a2, bs, e)
        errs.append(abs(exact - predicted))
    return errs[0] / errs[1]


def _strip(sig):
    sig = list(sig)
    while len(sig) > 1 and sig[-1] == 0:
        sig.pop()
    return tuple(sig)


def derivative_expand(sig):
    """d/dt Z^(m0, m1, ...) = sum_i (m_i + 1) Z^(..., m_{i-1} - 1, m_i + 1, ...).

    Terms that would carry a negative index are dropped.
    """
    sig = tuple(sig)
    padded = sig + (0,)
    out = []
    for i in range(1, len(padded)):
        if padded[i - 1] < 1:
            continue
        new = list(padded)
        new[i - 1] -= 1
        new[i] += 1
        out.append((padded[i] + 1, _strip(new)))
    return out


def derivative_series(sig, order):
    """Aggregated k-th derivative as {signature: integer coefficient}."""
    current = {_strip(sig): 1}
    for _ in range(order):
        nxt = defaultdict(int)
        for s, c in current.items():
            for coeff, t in derivative_expand(s):
                nxt[t] += c * coeff
        current = {s: c for s, c in nxt.items() if c}
    return current


def signature_order(sig):
    return sum(sig)


def signature_value(sig, path, t):
    """Z^(m0, m1, ...) evaluated on X(t), X'(t), ... of a polynomial path."""
    sig = tuple(sig)
    return z_value(sig, path.derivatives(t, len(sig)))


def liouville_residual(path, t):
    """|Z_{n-1,1}(X, X') - det X Tr(X^-1 X')| at ``t``."""
    x, xp = path.derivatives(t, 2)
    n = path.size
    lhs = z_value((n - 1, 1), [x, xp])
    try:
        rhs = numcore.determinant(x) * np.trace(numcore.solve(x, xp))
    except SingularMatrix:
        raise SingularMatrix(f"X is singular at t = {t}") from None
    return float(abs(lhs - rhs))
