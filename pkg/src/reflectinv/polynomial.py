"""Sparse multivariate polynomials truncated by per-variable and total degree."""

import math

import numpy as np

DROP_TOL = 1e-14


class TruncatedMultiPoly:
    """Polynomial in ``var_count`` variables, exponents capped on every product.

    Coefficients live in a dict keyed by exponent tuples. Terms whose
    exponent exceeds ``caps[i]`` in some variable, or whose total degree
    exceeds ``total_cap``, are discarded silently, as are coefficients with
    magnitude below ``DROP_TOL``.

    Example
    -------
    >>> x = TruncatedMultiPoly.variable(0, 2, total_cap=2)
    >>> y = TruncatedMultiPoly.variable(1, 2, total_cap=2)
    >>> ((1 + x + y) ** 3).coefficient((1, 1))
    6.0
    """

    __slots__ = ("var_count", "caps", "total_cap", "coeffs")

    def __init__(self, var_count, total_cap, coeffs=None, caps=None):
        self.var_count = var_count
        self.total_cap = total_cap
        self.caps = tuple(caps) if caps is not None else (total_cap,) * var_count
        if len(self.caps) != var_count:
            raise ValueError("need one cap per variable")
        self.coeffs = {}
        for exps, c in (coeffs or {}).items():
            if self._admissible(exps) and abs(c) >= DROP_TOL:
                self.coeffs[tuple(exps)] = c

    def _admissible(self, exps):
        return sum(exps) <= self.total_cap and all(e <= cap for e, cap in zip(exps, self.caps))

    def _like(self, coeffs):
        out = TruncatedMultiPoly.__new__(TruncatedMultiPoly)
        out.var_count, out.total_cap, out.caps = self.var_count, self.total_cap, self.caps
        out.coeffs = coeffs
        return out

    @classmethod
    def constant(cls, value, var_count, total_cap, caps=None):
        return cls(var_count, total_cap, {(0,) * var_count: value}, caps)

    @classmethod
    def variable(cls, index, var_count, total_cap, caps=None, coefficient=1.0):
        exps = tuple(1 if i == index else 0 for i in range(var_count))
        return cls(var_count, total_cap, {exps: coefficient}, caps)

    def coefficient(self, exps):
        return self.coeffs.get(tuple(exps), 0.0)

    def _coerce(self, other):
        if isinstance(other, TruncatedMultiPoly):
            return other
        return self._like({(0,) * self.var_count: other} if abs(other) >= DROP_TOL else {})

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return self._like({k: c for k, c in out.items() if abs(c) >= DROP_TOL})

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncatedMultiPoly):
            if abs(other) < DROP_TOL:
                return self._like({})
            return self._like({k: c * other for k, c in self.coeffs.items() if abs(c * other) >= DROP_TOL})
        out = {}
        caps, total = self.caps, self.total_cap
        for ka, ca in self.coeffs.items():
            sa = sum(ka)
            for kb, cb in other.coeffs.items():
                if sa + sum(kb) > total:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                if any(e > cap for e, cap in zip(k, caps)):
                    continue
                out[k] = out.get(k, 0.0) + ca * cb
        return self._like({k: c for k, c in out.items() if abs(c) >= DROP_TOL})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __pow__(self, k):
        result = self._coerce(1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def exp(self):
        """Truncated exponential; requires a vanishing constant term."""
        if abs(self.coefficient((0,) * self.var_count)) >= DROP_TOL:
            raise ValueError("exp of a polynomial with a constant term is not truncatable")
        result = self._coerce(1.0)
        term = self._coerce(1.0)
        for j in range(1, self.total_cap + 1):
            term = term * self / j
            result = result + term
        return result

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs):
            mono = "*".join(f"a{i}^{e}" if e > 1 else f"a{i}" for i, e in enumerate(k) if e)
            parts.append(f"{self.coeffs[k]:.6g}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def poly_matrix(xs, caps, total_cap, with_identity=False):
    """Object array with entries sum_i a_i X_i[r, c] (+ delta_rc if requested)."""
    n = xs[0].shape[0]
    var_count = len(xs)
    out = np.empty((n, n), dtype=object)
    for r in range(n):
        for c in range(n):
            coeffs = {}
            if with_identity and r == c:
                coeffs[(0,) * var_count] = 1.0
            for i, x in enumerate(xs):
                exps = tuple(1 if j == i else 0 for j in range(var_count))
                coeffs[exps] = x[r, c]
            out[r, c] = TruncatedMultiPoly(var_count, total_cap, coeffs, caps)
    return out


def binomial(n, k):
    return math.comb(n, k) if 0 <= k <= n else 0
