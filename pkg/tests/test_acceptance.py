"""Acceptance criteria, one test per criterion at the stated tolerance.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import itertools
import json
import subprocess
import sys

import numpy as np

from conftest import ACCEPTANCE_LINES
from oracles import cofactor_invariant
from reflectinv import closure, conjalg, invariants, numcore, reflection
from reflectinv.conjalg import ComplexSystem, GradedElement
from reflectinv.reflection import ReflectionSystem


def record(label, checks):
    """``checks`` is a list of (description, worst value, tolerance)."""
    failed = [c for c in checks if not (np.isfinite(c[1]) and c[1] <= c[2])]
    detail = "; ".join(f"{d} {v:.2e} (tol {t:.0e})" for d, v, t in checks)
    ACCEPTANCE_LINES.append(f"{'PASS' if not failed else 'FAIL'}  {label}: {detail}")
    assert not failed, "; ".join(f"{d} = {v:.3e} > {t:.0e}" for d, v, t in failed)


def grid(start, stop, step):
    return np.round(start + step * np.arange(int(round((stop - start) / step)) + 1), 12)


# Draws with ||E||_2 <= 100 keep |X| below about e^10 on [-1, 1]. Beyond that the
# absolute bound 1e-8 (1 + |sys|) sits under the double precision floor
# eps |sys| max|X|, which even the correctly rounded exact X cannot meet.
E_NORM_MAX = 100.0


def test_criterion_01_fundamental_residual():
    rng = np.random.default_rng(1001)
    worst = x0 = 0.0
    for n in (1, 2, 3, 4):
        for _ in range(20):
            sys_ = reflection.random_system(rng, n, e_norm_max=E_NORM_MAX)
            for t in grid(-1.0, 1.0, 0.1):
                r = numcore.max_norm(reflection.fundamental_residual(sys_, t))
                worst = max(worst, r / (1.0 + sys_.norm))
            x0 = max(x0, numcore.max_norm(reflection.fundamental_matrix(sys_, 0.0) - np.eye(n)))
    record("1 fundamental-matrix residual", [("residual/(1+|sys|)", worst, 1e-8), ("|X(0)-I|", x0, 1e-13)])


def test_criterion_01_unfiltered_draws_relative():
    # same sweep without the growth filter, residual relative to the size of X
    rng = np.random.default_rng(1001)
    worst = 0.0
    for n in (1, 2, 3, 4):
        for _ in range(20):
            sys_ = reflection.random_system(rng, n)
            ts = grid(-1.0, 1.0, 0.1)
            size = max(numcore.max_norm(np.hstack(reflection.fundamental_pair(sys_, t))) for t in ts)
            for t in ts:
                r = numcore.max_norm(reflection.fundamental_residual(sys_, t))
                worst = max(worst, r / ((1.0 + sys_.norm) * size))
    record("1 supplementary, unfiltered draws", [("residual/((1+|sys|) max|X, X'|)", worst, 1e-13)])


def test_criterion_02_hyperbolic_identity():
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 5))
        e = rng.uniform(-1, 1, (n, n))
        e *= rng.uniform(0.0, 4.0) / np.linalg.norm(e, 2)
        t = rng.uniform(-2.0, 2.0)
        c, s = numcore.hyperbolic_series(e, t)
        worst = max(worst, numcore.max_norm(c @ c - e @ s @ s - np.eye(n)))
    record("2 hyperbolic identity", [("|C^2 - E S^2 - I|", worst, 1e-10)])


def test_criterion_03_determinant_system():
    rng = np.random.default_rng(1003)
    worst_x = worst_y = 0.0
    for _ in range(20):
        sys_ = reflection.random_system(rng, 2, e_norm_max=4.0)
        traj = reflection.ajl_integrate(sys_, 2.0, 1e-3)
        for t, state in zip(traj.times[::10], traj.states[::10]):
            x, xp = reflection.fundamental_pair(sys_, t)
            worst_x = max(worst_x, abs(np.linalg.det(x) - state[0]))
            worst_y = max(worst_y, abs(np.linalg.det(xp) - state[1]))
    decay = ReflectionSystem.identity_decay(2)
    traj = reflection.ajl_integrate(decay, 2.0, 1e-3)
    closed = float(np.max(np.abs(traj.states[:, 0] - np.exp(-2 * traj.times))))
    printed = reflection.ajl_integrate(decay, 2.0, 1e-3, mode="paper-theorem2")
    printed_gap = float(np.max(np.abs(printed.states[:, 0] - np.exp(-2 * printed.times))))
    record(
        "3 determinant system (derived coupling signs)",
        [
            ("|det X - x|", worst_x, 1e-6),
            ("|det X' - y|", worst_y, 1e-6),
            ("E=I closed form", closed, 1e-8),
            # the alternative sign mode must be reported as failing on this example
            ("printed coupling signs miss e^-2t (expect gap > 1)", 1.0 / printed_gap, 1.0),
        ],
    )


def riccati_sweep(convention):
    rng = np.random.default_rng(1004)
    ric = cross = trace = 0.0
    for k in range(20):
        sys_ = reflection.random_riccati_system(rng, 2 + k % 2)
        for t in grid(-1.0, 1.0, 0.1):
            ric = max(ric, numcore.max_norm(reflection.riccati_residual(sys_, t, 1e-4)))
            cross = max(cross, numcore.max_norm(reflection.y_direct(sys_, t) - reflection.y_closed_form(sys_, t)))
            lhs, rhs = reflection.y_trace_identity(sys_, t, convention=convention)
            trace = max(trace, abs(lhs - rhs))
    return ric, cross, trace


def test_criterion_04_riccati():
    # trace identity exactly as stated: |Tr(Y^-1 E) - Tr(Y) + (log|det Y|)'| <= 1e-5
    ric, cross, trace = riccati_sweep("printed")
    record(
        "4 Riccati",
        [("|Y' - (E - Y^2)|", ric, 1e-6), ("|Y_direct - Y_closed|", cross, 1e-8), ("trace identity as stated", trace, 1e-5)],
    )


def test_criterion_04_riccati_trace_identity_liouville_sign():
    # Liouville's formula gives Tr(Y^-1 E) = Tr(Y) + (log|det Y|)'
    ric, cross, trace = riccati_sweep("liouville")
    record(
        "4 Riccati, trace identity with the Liouville sign",
        [("|Y' - (E - Y^2)|", ric, 1e-6), ("|Y_direct - Y_closed|", cross, 1e-8), ("|Tr(Y^-1 E) - Tr Y - (log|det Y|)'|", trace, 1e-5)],
    )


def invertible_element(rng, n):
    while True:
        a = GradedElement.random(rng, n)
        if np.linalg.cond(conjalg.rho(a)) < 1e3:
            return a


def test_criterion_05_graded_algebra():
    rng = np.random.default_rng(1005)
    hom = inv = powr = assoc = 0.0
    for k in range(50):
        n = 1 + k % 3
        a, b, c = invertible_element(rng, n), GradedElement.random(rng, n), GradedElement.random(rng, n)
        hom = max(hom, numcore.max_norm(conjalg.rho(a @ b) - conjalg.rho(a) @ conjalg.rho(b)))
        ai = conjalg.ginv(a)
        one = GradedElement.identity(n)
        inv = max(inv, (a @ ai - one).norm(), (ai @ a - one).norm())
        ra = conjalg.rho(a)
        for p in range(7):
            powr = max(powr, numcore.max_norm(conjalg.rho(conjalg.gpow(a, p)) - np.linalg.matrix_power(ra, p)))
        assoc = max(assoc, ((a @ b) @ c - a @ (b @ c)).norm())
    neumann = 0.0
    for k in range(20):
        a = GradedElement.random(rng, 1 + k % 3)
        a = a.scale(0.5 / max(abs(np.linalg.eigvals(conjalg.rho(a)))))
        neumann = max(neumann, conjalg.neumann_identity_check(a, 1.0, 40))
    record(
        "5 graded algebra",
        [
            ("rho homomorphism", hom, 1e-10),
            ("ginv", inv, 1e-10),
            ("gpow", powr, 1e-10),
            ("associativity", assoc, 1e-10),
            ("Neumann defect kmax=40", neumann, 1e-10),
        ],
    )


def cmat(rng, n):
    return rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))


def test_criterion_06_complex_systems():
    rng = np.random.default_rng(1006)
    h = 1e-3
    pair_res = real = second = ansatz = 0.0
    for k in range(6):
        n = 1 + k % 3
        sys_ = ComplexSystem(cmat(rng, n), cmat(rng, n) + 1.5 * np.eye(n))
        fp = conjalg.solve_fundamental_pair(sys_, 1.0, h)
        z0 = rng.uniform(-1, 1, (n, 10)) + 1j * rng.uniform(-1, 1, (n, 10))
        z = fp.z(z0)
        res = numcore.grid_derivative(z, h) + sys_.a @ z[2:-2] + sys_.b @ np.conj(z[2:-2])
        pair_res = max(pair_res, float(np.max(np.abs(res))))
        _, zr = conjalg.integrate_rho(sys_, z0, 1.0, h)
        real = max(real, float(np.max(np.abs(zr - z))))
        f, g = conjalg.second_order_coeffs(sys_)
        x0 = fp.x0
        res = numcore.grid_second_derivative(x0, h) + f @ numcore.grid_derivative(x0, h) + g @ x0[2:-2]
        second = max(second, float(np.max(np.abs(res))))
        xi, xp, gam, om = cmat(rng, n), cmat(rng, n), cmat(rng, n), cmat(rng, n) + 2 * np.eye(n)
        alpha, beta = conjalg.ansatz_coeffs(xi, xp, gam, om)
        ansatz = max(
            ansatz, numcore.max_norm(alpha + beta - xi), numcore.max_norm(alpha @ (gam + om) + beta @ (gam - om) - xp)
        )
    record(
        "6 complex systems",
        [
            ("|z' + A z + B conj(z)|", pair_res, 1e-6),
            ("rho-based integration", real, 1e-6),
            ("second-order residual", second, 1e-6),
            ("ansatz round trip", ansatz, 1e-10),
        ],
    )


def valid_indices(n, count):
    return [ms for ms in itertools.product(range(n + 1), repeat=count) if sum(ms) <= n]


def test_criterion_07_invariant_engine():
    rng = np.random.default_rng(1007)
    agree = vanish_computed = closed = 0.0
    vanish_exact = True
    for _ in range(10):
        for n in (1, 2, 3, 4):
            for count in (1, 2, 3):
                xs = list(rng.uniform(-1, 1, (count, n, n)))
                poly = invariants.tracelog_polynomial(xs)
                for ms in valid_indices(n, count):
                    a = invariants.z_value(ms, xs)
                    agree = max(agree, abs(a - poly.coefficient(ms)), abs(a - cofactor_invariant(ms, xs)))
                for ms in itertools.product(range(n + 2), repeat=count):
                    if sum(ms) > n:
                        vanish_exact &= invariants.z_value(ms, xs) == 0.0
                        vanish_computed = max(vanish_computed, abs(invariants.z_value(ms, xs, short_circuit=False)))
                vanish_exact &= invariants.z_value((-1,) + (1,) * (count - 1), xs) == 0.0
            x, y = rng.uniform(-1, 1, (2, n, n))
            for ms, args in (((1,), [x]), ((2,), [x]), ((3,), [x]), ((1, 1), [x, y]), ((n,), [x])):
                closed = max(closed, abs(invariants.closed_form(ms, args) - invariants.z_value(ms, args)))
    record(
        "7 invariant engine",
        [
            ("interpolation / trace-log / cofactor", agree, 1e-9),
            ("short-circuit zeros exact (0 = yes)", 0.0 if vanish_exact else 1.0, 0.0),
            ("computed zeros", vanish_computed, 1e-9),
            ("closed forms", closed, 1e-9),
        ],
    )


def test_criterion_08_identities():
    rng = np.random.default_rng(1008)
    n = 3
    dual = fact = collapse = 0.0
    ratios = []
    for _ in range(5):
        a = rng.uniform(-1, 1, (n, n)) + 2 * np.eye(n)
        x = rng.uniform(-1, 1, (n, n))
        bs = list(rng.uniform(-1, 1, (2, n, n)))
        for count in (0, 1, 2):
            for idx in valid_indices(n, count + 1):
                lhs, rhs = invariants.duality_pair(idx[0], idx[1:], a, bs[:count])
                dual = max(dual, abs(lhs - rhs))
            for ms in valid_indices(n, count):
                lhs, rhs = invariants.det_factorization(ms, x, bs[:count])
                fact = max(fact, abs(lhs - rhs))
        w = rng.uniform(-1, 1, (n, n))
        for i in range(n + 2):
            for j in range(n + 2 - i):
                lhs, rhs = invariants.collapse_repeated(i, j, w)
                collapse = max(collapse, abs(lhs - rhs))
        a1, a2 = rng.uniform(-1, 1, (2, n, n))
        ratios.append(invariants.epsilon_richardson_ratio(2, (1,), a1, a2, bs[:1]))
    ratio_dev = max(abs(r - 4.0) for r in ratios)
    record(
        "8 identities",
        [
            ("duality", dual, 1e-8),
            ("determinant factorization", fact, 1e-8),
            ("repeated-argument collapse", collapse, 1e-10),
            ("|Richardson ratio - 4|", ratio_dev, 0.5),
        ],
    )


def test_criterion_09_derivative_calculus():
    expected = {
        1: {(6, 1): 1},
        2: {(5, 2): 2, (6, 0, 1): 1},
        3: {(4, 3): 6, (5, 1, 1): 3, (6, 0, 0, 1): 1},
    }
    mismatches = sum(invariants.derivative_series((7,), k) != v for k, v in expected.items())
    rng = np.random.default_rng(1009)
    n = 3
    fd = liou = 0.0
    sigs = [(3,), (2, 1), (1, 2), (1, 1, 1), (0, 3), (2, 0, 1), (1, 0, 2), (0, 1, 2)]
    for _ in range(20):
        path = numcore.PolyPath(list(rng.uniform(-1, 1, (3, n, n))))
        t = float(rng.uniform(-1, 1))
        for sig in sigs:
            d = numcore.central_diff(lambda s: invariants.signature_value(sig, path, s), t, 1e-4)
            pred = sum(c * invariants.signature_value(s, path, t) for c, s in invariants.derivative_expand(sig))
            fd = max(fd, abs(d - pred))
        liou = max(liou, invariants.liouville_residual(path, t))
    record(
        "9 derivative calculus",
        [("printed formula mismatches", float(mismatches), 0.0), ("finite difference", fd, 1e-6), ("Liouville", liou, 1e-8)],
    )


def test_criterion_10_closure():
    report = closure.explore(2, 6)
    e = np.array([[0.4, -1.1], [0.9, 1.7]])
    expected = np.array([[np.trace(e), 2.0], [2 * np.linalg.det(e), np.trace(e)]])
    structure = 0.0 if (report.closed and len(report.states) == 2) else 1.0
    structure += numcore.max_norm(report.transition_matrix(e) - expected)
    rng = np.random.default_rng(1010)
    worst = 0.0
    for _ in range(20):
        sys_ = reflection.random_system(rng, 2, e_norm_max=4.0)
        worst = max(worst, closure.numeric_verify(report, sys_, grid(0.0, 2.0, 0.25)))
    open_problems = 0
    for n in (3, 4, 5):
        r = closure.explore(n, 6)
        counts = closure.cumulative_counts(r)
        open_problems += int(r.closed)
        open_problems += int(not all(b > a for a, b in zip(counts, counts[1:])))
        open_problems += int(not all(closure.chain_signature(n, k) in r.states for k in (3, 5, 7)))
    record(
        "10 closure",
        [
            ("n=2 closed, 2 states, transition", structure, 1e-12),
            ("numeric_verify", worst, 1e-5),
            ("n=3..5 open, growing, chain present (0 = yes)", float(open_problems), 0.0),
        ],
    )


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "reflectinv.cli", *args], capture_output=True, cwd=cwd, timeout=120
    )


def test_criterion_11_cli(tmp_path):
    first = run_cli("verify", "--suite", "all", "--seed", "42")
    second = run_cli("verify", "--suite", "all", "--seed", "42")
    report = json.loads(first.stdout)
    missing = run_cli("fundamental", "--system", str(tmp_path / "absent.json"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"F": {"rows": 2, "cols": 2, "data": [[1, 0]]}}')
    malformed = run_cli("fundamental", "--system", str(bad))
    named = b"bad.json" in malformed.stderr and b"F" in malformed.stderr
    record(
        "11 CLI",
        [
            ("verify all exit code", float(first.returncode), 0.0),
            ("rerun byte difference (0 = identical)", 0.0 if first.stdout == second.stdout else 1.0, 0.0),
            ("every check passed or known", 0.0 if report["pass"] else 1.0, 0.0),
            ("missing file exit code - 2", float(abs(missing.returncode - 2)), 0.0),
            ("malformed file exit code - 2", float(abs(malformed.returncode - 2)), 0.0),
            ("diagnostic names file and field (0 = yes)", 0.0 if named else 1.0, 0.0),
        ],
    )
