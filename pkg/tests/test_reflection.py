import numpy as np
import pytest

from oracles import scalar_cosh_sinh
from reflectinv import numcore, reflection
from reflectinv.errors import DimensionMismatch, SingularCoefficient
from reflectinv.reflection import ReflectionSystem


def zero_e_system(a):
    """F = I, G = 0, A = B = a: E = 0 and M+ = 2a."""
    n = a.shape[0]
    return ReflectionSystem(np.eye(n), np.zeros((n, n)), a, a)


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(20)


def test_operators_identity_decay():
    sys = ReflectionSystem.identity_decay(3)
    np.testing.assert_allclose(sys.E, np.eye(3))
    np.testing.assert_allclose(sys.M_plus, np.eye(3))


def test_operators_scalar():
    a, b = 0.7, -0.3
    sys = ReflectionSystem([[1.0]], [[0.0]], [[a]], [[b]])
    assert sys.E[0, 0] == pytest.approx(a * a - b * b)
    assert sys.M_plus[0, 0] == pytest.approx(a + b)


def test_singular_coefficient():
    f = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(SingularCoefficient) as info:
        ReflectionSystem(f, f, np.eye(2), np.eye(2)).E
    assert info.value.which == "F-G"
    with pytest.raises(SingularCoefficient) as info:
        ReflectionSystem(f, -f, np.eye(2), np.eye(2)).E
    assert info.value.which == "F+G"


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        ReflectionSystem(np.eye(2), np.eye(2), np.eye(3), np.eye(2))


def test_fundamental_matrix_examples(rng):
    sys = reflection.random_system(rng, 3)
    np.testing.assert_array_equal(reflection.fundamental_matrix(sys, 0.0), np.eye(3))
    a = rng.uniform(-1, 1, (3, 3))
    zero = zero_e_system(a)
    for t in (-0.5, 0.8):
        np.testing.assert_allclose(reflection.fundamental_matrix(zero, t), np.eye(3) - 2 * a * t, atol=1e-14)
        np.testing.assert_allclose(reflection.fundamental_matrix_derivative(zero, t), -2 * a, atol=1e-14)
    decay = ReflectionSystem.identity_decay(2)
    for t in (-1.0, 0.3, 2.0):
        c, s = scalar_cosh_sinh(1.0, t)
        np.testing.assert_allclose(reflection.fundamental_matrix(decay, t), (c - s) * np.eye(2), atol=1e-14)


def test_fundamental_derivative(rng):
    sys = reflection.random_system(rng, 3)
    np.testing.assert_allclose(reflection.fundamental_matrix_derivative(sys, 0.0), -sys.M_plus)
    for t in (0.3, 0.7):
        d = numcore.central_diff(lambda s: reflection.fundamental_matrix(sys, s), t, 1e-4, accuracy=4)
        ref = reflection.fundamental_matrix_derivative(sys, t)
        assert numcore.max_norm(d - ref) <= 1e-7 * (1 + numcore.max_norm(ref))


def test_fundamental_pair_consistent(rng):
    sys = reflection.random_system(rng, 2)
    x, xp = reflection.fundamental_pair(sys, 0.4)
    np.testing.assert_array_equal(x, reflection.fundamental_matrix(sys, 0.4))
    np.testing.assert_array_equal(xp, reflection.fundamental_matrix_derivative(sys, 0.4))


def test_residual_of_zero_solution(rng):
    sys = reflection.random_system(rng, 2)
    zero = lambda s: (np.zeros(2), np.zeros(2))
    np.testing.assert_array_equal(reflection.reflection_residual(sys, 0.5, zero), np.zeros(2))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_fundamental_residual(rng, n):
    for _ in range(5):
        sys = reflection.random_system(rng, n)
        for t in np.linspace(-1, 1, 21):
            r = numcore.max_norm(reflection.fundamental_residual(sys, t))
            assert r <= 1e-8 * (1 + sys.norm)


def test_scalar_reflection_equation():
    # u'(t) + u(-t) = 0
    sys = ReflectionSystem([[1.0]], [[0.0]], [[0.0]], [[1.0]])
    for t in np.linspace(-1, 1, 11):
        assert abs(reflection.fundamental_residual(sys, t)[0, 0]) <= 1e-9


def test_columns_solve_vector_problem(rng):
    sys = reflection.random_system(rng, 3)
    u0 = rng.uniform(-1, 1, 3)
    u = lambda s: tuple(m @ u0 for m in reflection.fundamental_pair(sys, s))
    assert numcore.max_norm(reflection.reflection_residual(sys, 0.6, u)) <= 1e-9 * (1 + sys.norm)


def test_ajl_identity_decay():
    sys = ReflectionSystem.identity_decay(2)
    traj = reflection.ajl_integrate(sys, 2.0, 1e-3)
    np.testing.assert_allclose(traj.states[:, 0], np.exp(-2 * traj.times), atol=1e-8)
    np.testing.assert_allclose(traj.states[:, 1], np.exp(-2 * traj.times), atol=1e-8)
    printed = reflection.ajl_integrate(sys, 2.0, 1e-3, mode="paper-theorem2")
    assert np.max(np.abs(printed.states[:, 0] - np.exp(-2 * printed.times))) > 1.0


def test_ajl_zero_e(rng):
    a = rng.uniform(-1, 1, (2, 2))
    sys = zero_e_system(a)
    traj = reflection.ajl_integrate(sys, 1.0, 1e-3)
    expected = [np.linalg.det(np.eye(2) - 2 * a * t) for t in traj.times]
    np.testing.assert_allclose(traj.states[:, 0], expected, atol=1e-10)
    # the alternative signs give x'' = -2 det M+ instead of +2 det M+
    printed = reflection.ajl_integrate(sys, 1.0, 1e-3, mode="paper-theorem2")
    gap = np.max(np.abs(printed.states[:, 0] - expected))
    assert gap == pytest.approx(2 * abs(np.linalg.det(2 * a)), rel=1e-6)


def test_ajl_random_systems(rng):
    for _ in range(5):
        sys = reflection.random_system(rng, 2, e_norm_max=4.0)
        traj = reflection.ajl_integrate(sys, 2.0, 1e-3)
        for t, state in zip(traj.times[::100], traj.states[::100]):
            x, xp = reflection.fundamental_pair(sys, t)
            assert abs(np.linalg.det(x) - state[0]) <= 1e-6
            assert abs(np.linalg.det(xp) - state[1]) <= 1e-6


def test_ajl_edge_cases(rng):
    sys = reflection.random_system(rng, 2)
    traj = reflection.ajl_integrate(sys, 0.0)
    np.testing.assert_array_equal(traj.final, reflection.ajl_initial_state(sys))
    with pytest.raises(DimensionMismatch):
        reflection.ajl_integrate(reflection.random_system(rng, 3), 1.0)
    with pytest.raises(ValueError):
        reflection.ajl_integrate(sys, 1.0, mode="other")


def test_y_examples(rng):
    sys = reflection.random_system(rng, 3)
    np.testing.assert_allclose(reflection.y_direct(sys, 0.0), -sys.M_plus, atol=1e-15)
    np.testing.assert_allclose(reflection.y_closed_form(sys, 0.0), -sys.M_plus, atol=1e-15)
    decay = ReflectionSystem.identity_decay(2)
    for t in (-1.0, 0.5):
        np.testing.assert_allclose(reflection.y_direct(decay, t), -np.eye(2), atol=1e-14)
        np.testing.assert_allclose(reflection.riccati_residual(decay, t), np.zeros((2, 2)), atol=1e-9)
    a = 0.3 * rng.uniform(-1, 1, (2, 2))
    zero = zero_e_system(a)
    m = zero.M_plus
    t = 0.4
    np.testing.assert_allclose(reflection.y_closed_form(zero, t), -m @ np.linalg.inv(np.eye(2) - t * m), atol=1e-13)


def test_riccati_system():
    rng = np.random.default_rng(4)
    for n in (2, 3):
        sys = reflection.random_riccati_system(rng, n)
        for t in np.linspace(-1, 1, 11):
            assert numcore.max_norm(reflection.riccati_residual(sys, t)) <= 1e-6
            diff = reflection.y_direct(sys, t) - reflection.y_closed_form(sys, t)
            assert numcore.max_norm(diff) <= 1e-8
            lhs, rhs = reflection.y_trace_identity(sys, t)
            assert abs(lhs - rhs) <= 1e-5


def test_trace_identity_constant_y():
    decay = ReflectionSystem.identity_decay(2)
    for convention in reflection.TRACE_CONVENTIONS:
        lhs, rhs = reflection.y_trace_identity(decay, 0.3, convention=convention)
        assert lhs == pytest.approx(-2.0)
        assert rhs == pytest.approx(-2.0, abs=1e-9)


def test_trace_identity_printed_sign_differs():
    sys = reflection.random_riccati_system(np.random.default_rng(9), 2)
    lhs, good = reflection.y_trace_identity(sys, 0.5)
    _, printed = reflection.y_trace_identity(sys, 0.5, convention="printed")
    assert abs(lhs - good) <= 1e-8
    # the two right-hand sides differ by twice the logarithmic derivative of det Y
    assert printed != pytest.approx(good, abs=1e-3)


def test_trace_identity_zero_e():
    a = 0.3 * np.random.default_rng(6).uniform(-1, 1, (2, 2))
    sys = zero_e_system(a)
    lhs, rhs = reflection.y_trace_identity(sys, 0.2)
    assert lhs == 0.0
    assert abs(lhs - rhs) <= 1e-5
