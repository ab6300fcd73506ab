"""Seeded property suites behind ``reflectinv verify``.

Each suite returns a list of :class:`Check` records. A check whose
``expected_failure`` flag is set documents a known sign discrepancy; it is
reported but does not affect the exit status.
"""

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from . import closure, conjalg, invariants, numcore, reflection

# growth filter for the absolute residual bound; see suite_reflection
E_NORM_MAX = 100.0

SUITES = ("reflection", "ajl", "riccati", "graded", "invariants", "derivatives", "closure")


@dataclass
class Check:
    name: str
    paper_ref: str
    residual: float
    tolerance: float
    expected_failure: bool = False
    note: str = ""

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def counts_as_failure(self):
        return not self.passed and not self.expected_failure

    def to_dict(self):
        d = asdict(self)
        d["residual"] = float(self.residual)
        d["pass"] = self.passed
        if not d["note"]:
            del d["note"]
        if not d["expected_failure"]:
            del d["expected_failure"]
        return d


def make_rng(seed, suite):
    """PCG64 stream keyed by (seed, suite position)."""
    return np.random.Generator(np.random.PCG64([seed, SUITES.index(suite)]))


def _grid(start, stop, step):
    count = int(round((stop - start) / step))
    return np.round(start + step * np.arange(count + 1), 12)


def suite_reflection(rng, trials, mode="section45"):
    residual = x0 = xpp = 0.0
    for n in (1, 2, 3, 4):
        for _ in range(trials):
            sys = reflection.random_system(rng, n, e_norm_max=E_NORM_MAX)
            scale = 1.0 + sys.norm
            for t in _grid(-1.0, 1.0, 0.1):
                r = numcore.max_norm(reflection.fundamental_residual(sys, t))
                residual = max(residual, r / scale)
            x0 = max(x0, numcore.max_norm(reflection.fundamental_matrix(sys, 0.0) - np.eye(n)))
            for t in (-0.7, 0.3, 0.7):
                d2 = numcore.central_diff2(lambda s: reflection.fundamental_matrix(sys, s), t, 1e-3, accuracy=4)
                target = reflection.fundamental_matrix(sys, t) @ sys.E
                xpp = max(xpp, numcore.max_norm(d2 - target) / (1.0 + numcore.max_norm(target)))

    hyper = derivs = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        e = rng.uniform(-1.0, 1.0, size=(n, n))
        e *= rng.uniform(0.0, 4.0) / np.linalg.norm(e, 2)
        t = rng.uniform(-2.0, 2.0)
        c, s = numcore.hyperbolic_series(e, t)
        hyper = max(hyper, numcore.max_norm(c @ c - e @ s @ s - np.eye(n)))
        dc = numcore.central_diff(lambda u: numcore.even_series(e, u), t, 1e-4)
        ds = numcore.central_diff(lambda u: numcore.odd_series(e, u), t, 1e-4)
        derivs = max(derivs, numcore.max_norm(dc - e @ s), numcore.max_norm(ds - c))
    return [
        Check("reflection/fundamental-residual", "F X'(t) + G X'(-t) + A X(t) + B X(-t) = 0, scaled by 1 + |sys|", residual, 1e-8),
        Check("reflection/initial-value", "X(0) = I", x0, 1e-13),
        Check("reflection/second-derivative", "X'' = X E (relative)", xpp, 1e-7),
        Check("reflection/hyperbolic-identity", "C(t)^2 - E S(t)^2 = I", hyper, 1e-10),
        Check("reflection/series-derivatives", "C' = E S, S' = C", derivs, 1e-7),
    ]


def suite_ajl(rng, trials, mode="section45"):
    worst = 0.0
    for _ in range(trials):
        sys = reflection.random_system(rng, 2, e_norm_max=4.0)
        traj = reflection.ajl_integrate(sys, 2.0, 1e-3, mode=mode)
        for t, state in zip(traj.times[::20], traj.states[::20]):
            x, xp = reflection.fundamental_pair(sys, t)
            worst = max(worst, abs(np.linalg.det(x) - state[0]), abs(np.linalg.det(xp) - state[1]))
    decay = reflection.ReflectionSystem.identity_decay(2)
    traj = reflection.ajl_integrate(decay, 2.0, 1e-3, mode=mode)
    closed = float(np.max(np.abs(traj.states[:, 0] - np.exp(-2.0 * traj.times))))
    checks = [
        Check(f"ajl/{mode}/random-systems", "(det X, det X') solves the n = 2 determinant system", worst, 1e-6),
        Check(f"ajl/{mode}/closed-form", "E = I, M+ = I: det X = exp(-2t)", closed, 1e-8),
    ]
    if mode == "paper-theorem2":
        for c in checks:
            c.note = "known paper discrepancy: printed coupling signs do not reproduce det X"
    else:
        printed = reflection.ajl_integrate(decay, 2.0, 1e-3, mode="paper-theorem2")
        residual = float(np.max(np.abs(printed.states[:, 0] - np.exp(-2.0 * printed.times))))
        checks.append(
            Check(
                "ajl/paper-theorem2/closed-form",
                "printed signs x'' = tr(E) x - 2y, y'' = -2 det(E) x + tr(E) y",
                residual,
                1e-8,
                expected_failure=True,
                note="known paper discrepancy: fails on E = I, M+ = I",
            )
        )
    return checks


def suite_riccati(rng, trials, mode="section45"):
    ric = cross = trace = printed = 0.0
    grid = _grid(-1.0, 1.0, 0.1)
    for k in range(trials):
        sys = reflection.random_riccati_system(rng, 2 + k % 2)
        for t in grid:
            ric = max(ric, numcore.max_norm(reflection.riccati_residual(sys, t, 1e-4)))
            cross = max(cross, numcore.max_norm(reflection.y_direct(sys, t) - reflection.y_closed_form(sys, t)))
            lhs, rhs = reflection.y_trace_identity(sys, t)
            trace = max(trace, abs(lhs - rhs))
            lhs, rhs = reflection.y_trace_identity(sys, t, convention="printed")
            printed = max(printed, abs(lhs - rhs))
    return [
        Check("riccati/equation", "Y' = E - Y^2", ric, 1e-6),
        Check("riccati/closed-form", "Y = (-C M+ + E S)(-S M+ + C)^-1", cross, 1e-8),
        Check("riccati/trace-identity", "Tr(Y^-1 E) = Tr(Y) + (log|det Y|)'", trace, 1e-5),
        Check(
            "riccati/trace-identity-printed",
            "Tr(Y^-1 E) = Tr(Y) - (log|det Y|)'",
            printed,
            1e-5,
            expected_failure=True,
            note="known paper discrepancy: sign of the logarithmic derivative",
        ),
    ]


def _random_invertible_element(rng, n):
    while True:
        a = conjalg.GradedElement.random(rng, n)
        if np.linalg.cond(conjalg.rho(a)) < 1e3:
            return a


def suite_graded(rng, trials, mode="section45"):
    elements = max(50, trials)
    hom = inv = powr = assoc = 0.0
    for k in range(elements):
        n = 1 + k % 3
        a = _random_invertible_element(rng, n)
        b = conjalg.GradedElement.random(rng, n)
        c = conjalg.GradedElement.random(rng, n)
        hom = max(hom, numcore.max_norm(conjalg.rho(a @ b) - conjalg.rho(a) @ conjalg.rho(b)))
        ai = conjalg.ginv(a)
        inv = max(
            inv,
            (a @ ai - conjalg.GradedElement.identity(n)).norm(),
            numcore.max_norm(conjalg.rho(ai) - np.linalg.inv(conjalg.rho(a))),
        )
        ra = conjalg.rho(a)
        for p in range(7):
            powr = max(powr, numcore.max_norm(conjalg.rho(conjalg.gpow(a, p)) - np.linalg.matrix_power(ra, p)))
        assoc = max(assoc, ((a @ b) @ c - a @ (b @ c)).norm())

    neumann = 0.0
    for k in range(trials):
        a = conjalg.GradedElement.random(rng, 1 + k % 3)
        a = a.scale(0.5 / max(abs(np.linalg.eigvals(conjalg.rho(a)))))
        neumann = max(neumann, conjalg.neumann_identity_check(a, 1.0, 40))

    pair = real = second = ansatz = 0.0
    h = 1e-3
    for k in range(trials):
        n = 1 + k % 3
        sys = conjalg.ComplexSystem(
            conjalg.GradedElement.random(rng, n).a0, _random_invertible_element(rng, n).a0
        )
        fp = conjalg.solve_fundamental_pair(sys, 1.0, h)
        z0 = rng.uniform(-1, 1, (n, 10)) + 1j * rng.uniform(-1, 1, (n, 10))
        z = fp.z(z0)
        res = numcore.grid_derivative(z, h) + sys.a @ z[2:-2] + sys.b @ np.conj(z[2:-2])
        pair = max(pair, float(np.max(np.abs(res))))
        _, zr = conjalg.integrate_rho(sys, z0, 1.0, h)
        real = max(real, float(np.max(np.abs(zr - z))))
        f, g = conjalg.second_order_coeffs(sys)
        for x in (fp.x0, fp.x1):
            res = numcore.grid_second_derivative(x, h) + f @ numcore.grid_derivative(x, h) + g @ x[2:-2]
            second = max(second, float(np.max(np.abs(res))))
        x0, xp0, gam, om = (rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n)) for _ in range(4))
        om = om + 2 * np.eye(n)
        alpha, beta = conjalg.ansatz_coeffs(x0, xp0, gam, om)
        ansatz = max(
            ansatz,
            numcore.max_norm(alpha + beta - x0),
            numcore.max_norm(alpha @ (gam + om) + beta @ (gam - om) - xp0),
        )
    return [
        Check("graded/rho-homomorphism", "rho(AB) = rho(A) rho(B)", hom, 1e-10),
        Check("graded/inverse", "A A^-1 = I via the Delta formula", inv, 1e-10),
        Check("graded/power", "rho(A^k) = rho(A)^k", powr, 1e-10),
        Check("graded/associativity", "(AB)C = A(BC)", assoc, 1e-10),
        Check("graded/neumann", "(I - tA)^-1 = sum (tA)^k, radius 0.5, kmax 40", neumann, 1e-10),
        Check("complex/pair-residual", "z' + A z + B conj(z) = 0 for z = X0 z0 + X1 conj(z0)", pair, 1e-6),
        Check("complex/rho-integration", "pair agrees with the real 2n-dimensional flow", real, 1e-6),
        Check("complex/second-order", "X'' + F X' + G X = 0", second, 1e-6),
        Check("complex/ansatz-round-trip", "alpha + beta = X(0), alpha(G+O) + beta(G-O) = X'(0)", ansatz, 1e-10),
    ]


def _valid_indices(n, count):
    for ms in itertools.product(range(n + 1), repeat=count):
        if sum(ms) <= n:
            yield ms


def suite_invariants(rng, trials, mode="section45"):
    agree = vanish = closed = 0.0
    for _ in range(trials):
        for n in (1, 2, 3, 4):
            for count in (1, 2, 3):
                xs = list(rng.uniform(-1, 1, (count, n, n)))
                poly = invariants.tracelog_polynomial(xs)
                for ms in _valid_indices(n, count):
                    a = invariants.z_value(ms, xs)
                    b = poly.coefficient(ms)
                    agree = max(agree, abs(a - b))
                for ms in itertools.product(range(n + 1), repeat=count):
                    if sum(ms) > n:
                        vanish = max(vanish, abs(invariants.z_value(ms, xs, short_circuit=False)))
            x = rng.uniform(-1, 1, (n, n))
            y = rng.uniform(-1, 1, (n, n))
            for ms, args in (((1,), [x]), ((2,), [x]), ((3,), [x]), ((1, 1), [x, y]), ((n,), [x])):
                closed = max(closed, abs(invariants.closed_form(ms, args) - invariants.z_value(ms, args)))

    dual = fact = collapse = 0.0
    ratio_err = 0.0
    n = 3
    for _ in range(trials):
        a = rng.uniform(-1, 1, (n, n)) + 2 * np.eye(n)
        bs = list(rng.uniform(-1, 1, (2, n, n)))
        for count in (0, 1, 2):
            for idx in _valid_indices(n, count + 1):
                l, ms = idx[0], idx[1:]
                lhs, rhs = invariants.duality_pair(l, ms, a, bs[:count])
                dual = max(dual, abs(lhs - rhs) / max(1.0, abs(lhs)))
            for ms in _valid_indices(n, count):
                lhs, rhs = invariants.det_factorization(ms, a - 2 * np.eye(n), bs[:count])
                fact = max(fact, abs(lhs - rhs))
        w = rng.uniform(-1, 1, (n, n))
        for i in range(n + 1):
            for j in range(n + 1 - i):
                lhs, rhs = invariants.collapse_repeated(i, j, w)
                collapse = max(collapse, abs(lhs - rhs))
        a1, a2 = rng.uniform(-1, 1, (2, n, n))
        ratio = invariants.epsilon_richardson_ratio(n, (), a1, a2, [])
        ratio_err = max(ratio_err, abs(ratio - 4.0))
    return [
        Check("invariants/cross-oracle", "coefficients of det(I + sum a_i X_i) = exp Tr log", agree, 1e-9),
        Check("invariants/vanishing", "Z = 0 for order above n (computed)", vanish, 1e-9),
        Check("invariants/closed-forms", "Z_1, Z_2, Z_3, Z_{1,1}, Z_n trace formulas", closed, 1e-9),
        Check("invariants/duality", "Z_{l,m}(A,B) = det A Z_{n-l-|m|,m}(A^-1, A^-1 B)", dual, 1e-8),
        Check("invariants/det-factorization", "Z_{n-|m|,m}(X, XY) = det X Z_m(Y)", fact, 1e-8),
        Check("invariants/collapse", "Z_{a,b}(W,W) = C(a+b,a) Z_{a+b}(W)", collapse, 1e-10),
        Check("invariants/epsilon-ratio", "first-order error ratio 4 under eps halving", ratio_err, 0.5),
    ]


def _quadratic_path(rng, n):
    return numcore.PolyPath(list(rng.uniform(-1, 1, (3, n, n))))


def suite_derivatives(rng, trials, mode="section45"):
    expected = {
        1: {(4, 1): 1},
        2: {(3, 2): 2, (4, 0, 1): 1},
        3: {(2, 3): 6, (3, 1, 1): 3, (4, 0, 0, 1): 1},
    }
    mismatch = sum(invariants.derivative_series((5,), k) != v for k, v in expected.items())
    fd = liou = 0.0
    n = 3
    sigs = [(3,), (2, 1), (1, 2), (1, 1, 1), (0, 3), (2, 0, 1), (1, 0, 2)]
    for _ in range(trials):
        path = _quadratic_path(rng, n)
        t = float(rng.uniform(-1, 1))
        for sig in sigs:
            d = numcore.central_diff(lambda s: invariants.signature_value(sig, path, s), t, 1e-4)
            pred = sum(c * invariants.signature_value(s, path, t) for c, s in invariants.derivative_expand(sig))
            fd = max(fd, abs(d - pred))
        x = path(t)
        if np.linalg.cond(x) < 1e6:
            liou = max(liou, invariants.liouville_residual(path, t))
    return [
        Check("derivatives/printed-formulas", "Z_m', Z_m'', Z_m''' expansions", float(mismatch), 0.0),
        Check("derivatives/finite-difference", "(Z^(m))' = sum (m_i + 1) Z^(..., m_{i-1} - 1, m_i + 1, ...)", fd, 1e-6),
        Check("derivatives/liouville", "det(X)' = det X Tr(X^-1 X')", liou, 1e-8),
    ]


def suite_closure(rng, trials, mode="section45"):
    report = closure.explore(2, 6)
    e = np.array([[1.3, -0.4], [0.7, 0.2]])
    expected = np.array([[np.trace(e), 2.0], [2.0 * np.linalg.det(e), np.trace(e)]])
    structure = 0.0 if report.closed and len(report.states) == 2 else 1.0
    structure += numcore.max_norm(report.transition_matrix(e) - expected)
    worst = 0.0
    for _ in range(trials):
        sys = reflection.random_system(rng, 2, e_norm_max=4.0)
        worst = max(worst, closure.numeric_verify(report, sys, _grid(0.0, 2.0, 0.25)))
    decay = closure.numeric_verify(report, reflection.ReflectionSystem.identity_decay(2), _grid(0.0, 2.0, 0.25))
    open_fail = 0
    for n in (3, 4, 5):
        r = closure.explore(n, 6)
        counts = closure.cumulative_counts(r)
        growing = all(b > a for a, b in zip(counts, counts[1:]))
        chain = all(closure.chain_signature(n, k) in r.states for k in (3, 5, 7))
        open_fail += int(r.closed or not growing or not chain)
    return [
        Check("closure/n2-structure", "n = 2 closes on {det X, det X'} with [[tr E, 2], [2 det E, tr E]]", structure, 1e-12),
        Check("closure/n2-numeric", "second derivatives of states match the transition", worst, 1e-5),
        Check("closure/n2-closed-form", "E = I, M+ = I states exp(-2t)", decay, 1e-8),
        Check("closure/non-closure", "n = 3..5 keep producing new states, chain Z^(m-2,1,0,...,0,1)", float(open_fail), 0.0),
    ]


SUITE_FUNCTIONS = {
    "reflection": suite_reflection,
    "ajl": suite_ajl,
    "riccati": suite_riccati,
    "graded": suite_graded,
    "invariants": suite_invariants,
    "derivatives": suite_derivatives,
    "closure": suite_closure,
}


def run_suites(names, seed=42, trials=20, mode="section45", tolerance=None):
    checks = []
    for name in names:
        rng = make_rng(seed, name)
        for check in SUITE_FUNCTIONS[name](rng, trials, mode=mode):
            if tolerance is not None:
                check.tolerance = tolerance
            checks.append(check)
    return checks
