"""Closure of the second-derivative system of determinant invariants.

Along a fundamental matrix X'' = X E, every derivative X^(k) is X E^q
(k = 2q) or X' E^q (k = 2q + 1), so an invariant Z^(m0, m1, ...) is a crossed
invariant over the symbols {X E^q, X' E^q}. Starting from det X, the explorer
differentiates each discovered invariant twice, reduces the result with

  R1  drop zero indices,
  R2  merge repeated arguments, Z_{a,b}(W, W) = C(a+b, a) Z_{a+b}(W),
  R3  X^(k) -> X E^q or X' E^q (built into the symbols),
  R4  when every slot has the same parity p and the order is n, factor
      Z(X_p E^q0, X_p E^q1, ...) = det(X_p) det(E)^q0 Z(E^(q1-q0), ...),

and records whatever does not reduce to det X or det X' as a new state.
"""

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import numcore
from .errors import DimensionMismatch, ReflectInvError
from .invariants import z_value
from .polynomial import binomial


class ArgSymbol(NamedTuple):
    """X E^epower (parity 0) or X' E^epower (parity 1)."""

    parity: int
    epower: int

    @classmethod
    def from_derivative_order(cls, k):
        return cls(k % 2, k // 2)

    def target(self):
        """Symbol of the time derivative: X E^q -> X' E^q, X' E^q -> X E^(q+1)."""
        return ArgSymbol(1 - self.parity, self.epower + self.parity)

    def label(self):
        base = "X'" if self.parity else "X"
        if self.epower == 0:
            return base
        return f"{base}E" if self.epower == 1 else f"{base}E^{self.epower}"


def _canonical_slots(items):
    return tuple(sorted((ArgSymbol(*s), int(m)) for s, m in items))


@dataclass(frozen=True)
class CanonicalSignature:
    """Crossed invariant over distinct symbols with positive indices."""

    slots: tuple
    n: int

    @classmethod
    def from_map(cls, mapping, n):
        items = [(s, m) for s, m in dict(mapping).items() if m != 0]
        return cls(_canonical_slots(items), n)

    @classmethod
    def from_derivative_signature(cls, sig, n):
        """Z^(m0, m1, ...) with m_k attached to the k-th derivative of X."""
        merged = defaultdict(int)
        for k, m in enumerate(sig):
            if m:
                merged[ArgSymbol.from_derivative_order(k)] += m
        return cls.from_map(merged, n)

    @classmethod
    def det(cls, parity, n):
        return cls(((ArgSymbol(parity, 0), n),), n)

    def as_dict(self):
        return dict(self.slots)

    @property
    def order(self):
        return sum(m for _, m in self.slots)

    def label(self):
        return "{" + ", ".join(f"{s.label()}: {m}" for s, m in self.slots) + "}"

    def to_json(self):
        return {s.label(): m for s, m in self.slots}

    def is_base(self):
        return len(self.slots) == 1 and self.slots[0][0].epower == 0 and self.slots[0][1] == self.n


class RawSignature(NamedTuple):
    """Unreduced invariant: slots may repeat a symbol or carry index 0."""

    slots: tuple
    n: int


@dataclass(frozen=True)
class ConstantFactor:
    """Product of invariants of powers of E, e.g. det(E)^2 Z_1(E^2)."""

    # ((((epower, index), ...), exponent), ...): Z_{indices}(E^epowers) ** exponent
    factors: tuple = ()

    def __mul__(self, other):
        merged = defaultdict(int)
        for key, e in self.factors + other.factors:
            merged[key] += e
        return ConstantFactor(tuple(sorted((k, e) for k, e in merged.items() if e)))

    @classmethod
    def invariant(cls, pairs, exponent=1):
        if exponent == 0 or not pairs:
            return cls()
        return cls(((tuple(sorted(pairs)), exponent),))

    def label(self, n):
        if not self.factors:
            return "1"
        parts = []
        for key, e in self.factors:
            if len(key) == 1 and key[0][0] == 1 and key[0][1] == n:
                text = "det(E)"
            else:
                idx = ",".join(str(m) for _, m in key)
                args = ",".join("E" if q == 1 else f"E^{q}" for q, _ in key)
                text = f"Z_{{{idx}}}({args})"
            parts.append(text if e == 1 else f"{text}^{e}")
        return "*".join(parts)

    def evaluate(self, e):
        e = np.asarray(e)
        value = 1.0
        for key, exponent in self.factors:
            ms = [m for _, m in key]
            xs = [np.linalg.matrix_power(e, q) for q, _ in key]
            value *= z_value(ms, xs) ** exponent
        return value


class CanonicalTerm(NamedTuple):
    coeff: int
    constant: ConstantFactor
    signature: CanonicalSignature


def differentiate_signature(sig):
    """First time derivative of a canonical signature as [(coeff, RawSignature)].

    One unit of index moves from each slot to the symbol of its derivative,
    with coefficient (target index before the move) + 1.
    """
    base = sig.as_dict()
    out = []
    for sym, m in sig.slots:
        tgt = sym.target()
        coeff = base.get(tgt, 0) + 1
        new = dict(base)
        new[sym] = m - 1
        new[tgt] = new.get(tgt, 0) + 1
        out.append((coeff, RawSignature(tuple(sorted(new.items())), sig.n)))
    return out


def canonicalize(term):
    """Reduce ``(coeff, raw signature)`` with R1, R2 and R4.

    Returns a :class:`CanonicalTerm`; a zero coefficient is returned for
    invariants that vanish (negative index or order above n).
    """
    coeff, raw = term
    if isinstance(raw, CanonicalSignature):
        slots, n = raw.slots, raw.n
    else:
        slots, n = raw.slots, raw.n
    merged = defaultdict(int)
    for sym, m in slots:
        sym = ArgSymbol(*sym)
        if m < 0:
            return CanonicalTerm(0, ConstantFactor(), CanonicalSignature((), n))
        if m == 0:
            continue
        coeff *= binomial(merged[sym] + m, m)
        merged[sym] += m
    sig = CanonicalSignature.from_map(merged, n)
    if sig.order > n:
        return CanonicalTerm(0, ConstantFactor(), CanonicalSignature((), n))
    parities = {s.parity for s, _ in sig.slots}
    if len(parities) == 1 and sig.order == n and not sig.is_base():
        (parity,) = parities
        q0 = sig.slots[0][0].epower
        constant = ConstantFactor.invariant([(1, n)], q0) * ConstantFactor.invariant(
            [(s.epower - q0, m) for s, m in sig.slots[1:]]
        )
        return CanonicalTerm(coeff, constant, CanonicalSignature.det(parity, n))
    return CanonicalTerm(coeff, ConstantFactor(), sig)


def second_derivative(sig):
    """Canonical terms of the second derivative, aggregated by (constant, signature)."""
    acc = defaultdict(int)
    for c1, raw1 in differentiate_signature(sig):
        first = canonicalize((c1, raw1))
        if first.coeff == 0:
            continue
        inner = CanonicalSignature.from_map(dict(raw1.slots), sig.n)
        for c2, raw2 in differentiate_signature(inner):
            term = canonicalize((c1 * c2, raw2))
            if term.coeff:
                acc[(term.constant, term.signature)] += term.coeff
    return [CanonicalTerm(c, k[0], k[1]) for k, c in acc.items() if c]


@dataclass
class ClosureReport:
    n: int
    max_depth: int
    states: list
    depth_counts: list
    closed: bool
    # row i: {state index j: {ConstantFactor: int}} expressing state_i'' in the state basis
    transition: list = field(default_factory=list)
    expansions: dict = field(default_factory=dict)

    def transition_matrix(self, e):
        """Numeric transition matrix for a concrete E."""
        if not self.closed:
            raise ReflectInvError("transition is only defined for a closed report")
        k = len(self.states)
        out = np.zeros((k, k))
        for i, row in enumerate(self.transition):
            for j, entry in row.items():
                out[i, j] = sum(c * cf.evaluate(e) for cf, c in entry.items())
        return out

    def transition_labels(self):
        k = len(self.states)
        labels = [["0"] * k for _ in range(k)]
        for i, row in enumerate(self.transition):
            for j, entry in row.items():
                parts = []
                for cf, c in sorted(entry.items(), key=lambda kv: kv[0].factors):
                    text = cf.label(self.n)
                    if text == "1":
                        parts.append(str(c))
                    else:
                        parts.append(text if c == 1 else f"{c}*{text}")
                labels[i][j] = " + ".join(parts) if parts else "0"
        return labels

    def to_dict(self):
        return {
            "n": self.n,
            "max_depth": self.max_depth,
            "closed": self.closed,
            "depth_counts": list(self.depth_counts),
            "states": [s.to_json() for s in self.states],
            "transition": self.transition_labels() if self.closed else None,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def explore(n, max_depth=6):
    """Breadth-first search over second derivatives starting from det X.

    ``depth_counts[d]`` is the number of states first discovered at depth d
    (depth 0 holds det X). The report is closed when a depth adds no state.
    """
    if n < 1:
        raise ValueError("matrix size must be positive")
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    start = CanonicalSignature.det(0, n)
    index = {start: 0}
    states = [start]
    depth_counts = [1]
    expansions = {}
    frontier = deque([start])
    closed = False
    for _depth in range(1, max_depth + 1):
        next_frontier = deque()
        for sig in frontier:
            terms = second_derivative(sig)
            expansions[sig] = terms
            for term in terms:
                if term.signature not in index:
                    index[term.signature] = len(states)
                    states.append(term.signature)
                    next_frontier.append(term.signature)
        depth_counts.append(len(next_frontier))
        frontier = next_frontier
        if not frontier:
            closed = True
            break

    transition = []
    if closed:
        for sig in states:
            row = defaultdict(lambda: defaultdict(int))
            for term in expansions[sig]:
                row[index[term.signature]][term.constant] += term.coeff
            transition.append({j: dict(v) for j, v in sorted(row.items())})
    return ClosureReport(n, max_depth, states, depth_counts, closed, transition, expansions)


def cumulative_counts(report):
    return [int(c) for c in np.cumsum(report.depth_counts)]


def evaluate_signature(sig, x, xp, e):
    """Numeric value of a canonical signature given X, X' and E."""
    if not sig.slots:
        return 1.0
    ms, xs = [], []
    for sym, m in sig.slots:
        base = xp if sym.parity else x
        xs.append(base @ np.linalg.matrix_power(e, sym.epower))
        ms.append(m)
    return z_value(ms, xs)


def chain_signature(n, k):
    """Z^(n-2, 1, 0, ..., 0, 1) with the last 1 on the k-th derivative."""
    sig = [0] * (k + 1)
    sig[0] += n - 2
    sig[1] += 1
    sig[k] += 1
    return CanonicalSignature.from_derivative_signature(sig, n)


def numeric_verify(report, sys, t_grid, h=1e-3):
    """Largest |s_i'' - sum_j T_ij s_j| over ``t_grid`` along the fundamental matrix of ``sys``.

    Second derivatives come from the five-point central stencil with step ``h``.
    """
    from . import reflection

    if not report.closed:
        raise ReflectInvError("numeric verification needs a closed report")
    if sys.n != report.n:
        raise DimensionMismatch(f"report has n = {report.n}, system has n = {sys.n}")
    e = sys.E
    k_mat = report.transition_matrix(e)

    def states_at(t):
        x, xp = reflection.fundamental_pair(sys, t)
        return np.array([evaluate_signature(s, x, xp, e) for s in report.states])

    worst = 0.0
    for t in t_grid:
        d2 = numcore.central_diff2(states_at, t, h, accuracy=4)
        worst = max(worst, float(np.max(np.abs(d2 - k_mat @ states_at(t)))))
    return worst
