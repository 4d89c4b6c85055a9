import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llgsp.rotation import cayley_matrix, cn_inverse_apply, cn_rotate, cross, rotation_determinant

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec = st.tuples(finite, finite, finite).map(np.array)
steps = st.floats(1e-6, 1.0)


def solve_cn_system(m, a, dt):
    """Oracle: solve (m' - m)/dt = -((m' + m)/2) x a with a dense 3x3 solve."""
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])  # w -> a x w
    beta = dt / 2
    # m x a = -a x m = -k m
    lhs = np.eye(3) - beta * k
    rhs = m + beta * (k @ m)
    return np.linalg.solve(lhs, rhs)


def test_zero_axis_is_identity():
    assert np.array_equal(cayley_matrix(np.zeros(3), 0.7), np.eye(3))
    m = np.array([0.3, -0.2, 0.9])
    np.testing.assert_array_equal(cn_rotate(m, np.zeros(3), 0.5), m)


def test_parallel_axis_is_fixed_point():
    m = np.array([0.0, 0.6, 0.8])
    np.testing.assert_allclose(cn_rotate(m, 3.0 * m, 0.4), m, atol=1e-15)


def test_quarter_turn_example():
    # a = (0,0,1), dt = 2 -> beta = 1, angle 2 atan(1) = pi/2
    A = cayley_matrix(np.array([0.0, 0.0, 1.0]), 2.0)
    np.testing.assert_allclose(A @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(A, solve_cn_system(np.eye(3), np.array([0, 0, 1.0]), 2.0), atol=1e-15)


@pytest.mark.parametrize("omega,dt", [(1.0, 0.1), (5.0, 0.3), (-2.0, 1.0), (100.0, 0.01)])
def test_rotation_angle_about_z(omega, dt):
    theta = 2 * np.arctan(dt / 2 * omega)
    out = cn_rotate(np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, omega]), dt)
    np.testing.assert_allclose(out, [np.cos(theta), np.sin(theta), 0.0], atol=1e-15)


def test_matrix_entry_closed_form():
    a = np.array([0.3, -1.2, 2.0])
    dt = 0.8
    b = dt / 2
    s = 1 + b * b * a @ a
    A = cayley_matrix(a, dt)
    assert A[0, 0] == pytest.approx((1 + b * b * (a[0] ** 2 - a[1] ** 2 - a[2] ** 2)) / s, rel=1e-15)
    assert A[1, 0] == pytest.approx((2 * b * a[2] + 2 * b * b * a[0] * a[1]) / s, rel=1e-14)
    assert rotation_determinant(a, dt) == pytest.approx(s)
    np.testing.assert_allclose(A, solve_cn_system(np.eye(3), a, dt), atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(vec, vec, steps)
def test_cn_rotate_solves_the_cn_equation(m, a, dt):
    out = cn_rotate(m, a, dt)
    scale = max(1.0, np.linalg.norm(m)) * max(1.0, dt * np.linalg.norm(a))
    np.testing.assert_allclose(out, solve_cn_system(m, a, dt), atol=1e-12 * scale)
    # discrete equation residual
    res = (out - m) / dt + np.cross((out + m) / 2, a)
    assert np.max(np.abs(res)) <= 1e-10 * scale * max(1.0, np.linalg.norm(a)) / dt


@settings(max_examples=300, deadline=None)
@given(vec, vec, steps)
def test_norm_preserved_and_reversible(m, a, dt):
    out = cn_rotate(m, a, dt)
    lm = np.linalg.norm(m)
    assert abs(np.linalg.norm(out) - lm) <= 1e-14 * max(lm, 1e-300) + 1e-300
    back = cn_rotate(out, -a, dt)
    np.testing.assert_allclose(back, m, atol=1e-12 * max(lm, 1e-300))


def test_consistency_first_difference():
    rng = np.random.default_rng(4)
    m, a = rng.normal(size=3), rng.normal(size=3)
    exact = -np.cross(m, a)
    errs = [np.linalg.norm((cn_rotate(m, a, dt) - m) / dt - exact) for dt in (1e-2, 5e-3, 2.5e-3)]
    # one-step difference quotient is accurate to O(dt)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.05)


def test_inverse_apply_solves_left_matrix():
    rng = np.random.default_rng(5)
    a, r = rng.normal(size=3), rng.normal(size=3)
    dt = 0.7
    x = cn_inverse_apply(r, a, dt)
    np.testing.assert_allclose(x - dt / 2 * np.cross(a, x), r, atol=1e-14)


def test_batched_inputs_and_cross():
    rng = np.random.default_rng(6)
    m, a = rng.normal(size=(4, 5, 3)), rng.normal(size=(4, 5, 3))
    np.testing.assert_allclose(cross(m, a), np.cross(m, a), atol=1e-15)
    out = cn_rotate(m, a, 0.3)
    for idx in np.ndindex(4, 5):
        np.testing.assert_allclose(out[idx], cayley_matrix(a[idx], 0.3) @ m[idx], atol=1e-14)


def test_nonpositive_step_rejected():
    with pytest.raises(ValueError):
        cn_rotate(np.ones(3), np.ones(3), 0.0)
    with pytest.raises(ValueError):
        cayley_matrix(np.ones(3), -1.0)
