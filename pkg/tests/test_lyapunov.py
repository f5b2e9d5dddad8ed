import math

import numpy as np
import pytest

from mlkr import (
    ScaledState,
    ValidationError,
    analytic_lyapunov_estimate,
    fixed_points,
    jacobian,
    lyapunov_jacobian_product,
    lyapunov_tangent,
    make_params,
    scaled_map_step,
)

TWO_PI = 2 * math.pi


class TestJacobian:
    def test_cosine_zeros_leave_unit_pattern(self):
        p = make_params(2.0, 3.0)
        theta = ScaledState(math.pi / 2, math.pi / 2, 0.0, 0.0)
        J = jacobian(theta, p).matrix
        expected = np.array(
            [
                [1, 0, 0, 1],
                [0, 1, 1, 0],
                [0, 0, 1, 0],
                [0, 0, 0, 1],
            ],
            dtype=float,
        )
        assert np.allclose(J, expected, atol=1e-12)
        assert abs(np.linalg.det(J) - 1.0) < 1e-12

    def test_entry_placement_at_angle_origin(self):
        p = make_params(2.0, 2.0)  # Ks = 4
        J = jacobian(ScaledState(0.0, 0.0, 0.0, 0.0), p).matrix
        expected = np.array(
            [
                [1, 4, 0, 1],
                [4, 1, 1, 0],
                [4, 0, 1, 0],
                [0, 4, 0, 1],
            ],
            dtype=float,
        )
        assert np.array_equal(J, expected)

    def test_determinant_one_at_random_points(self):
        p = make_params(3.0, 2.0)
        rng = np.random.default_rng(0)
        for _ in range(100):
            theta = ScaledState(*rng.uniform(0, TWO_PI, 2), *rng.uniform(-9, 9, 2))
            assert abs(jacobian(theta, p).determinant() - 1.0) < 1e-12

    def test_independent_of_momenta(self):
        p = make_params(1.1, 4.0)
        a = jacobian(ScaledState(1.0, 2.0, 0.0, 0.0), p).matrix
        b = jacobian(ScaledState(1.0, 2.0, 55.0, -3.0), p).matrix
        assert np.array_equal(a, b)

    def test_matches_finite_difference_of_scaled_map(self):
        p = make_params(1.4, 2.0)
        theta = ScaledState(0.7, 2.1, 1.3, -0.4)
        J = jacobian(theta, p).matrix
        h = 1e-7
        base = np.array([theta.x1, theta.x2, theta.P1, theta.P2])

        def image(vec):
            s = scaled_map_step(ScaledState(*vec), p)
            return np.array([s.x1, s.x2, s.P1, s.P2])

        f0 = image(base)
        for k in range(4):
            bumped = base.copy()
            bumped[k] += h
            diff = image(bumped) - f0
            diff[:2] = (diff[:2] + math.pi) % TWO_PI - math.pi
            assert np.allclose(diff / h, J[:, k], atol=1e-5)


class TestFixedPoints:
    def test_canonical_point_values(self):
        p = make_params(1.0, 2.0)
        fp = fixed_points(p)
        assert fp.x1 == 0.0 and fp.x2 == 0.0
        assert fp.P1 == pytest.approx(-TWO_PI * math.sqrt(5))
        assert fp.P2 == pytest.approx(-TWO_PI * math.sqrt(3))

    def test_invariant_under_scaled_map(self):
        p = make_params(2.5, 1.5)
        fp = fixed_points(p)
        cur = fp
        for _ in range(5):
            cur = scaled_map_step(cur, p)
        for name in ("x1", "x2", "P1", "P2"):
            assert getattr(cur, name) == pytest.approx(getattr(fp, name), abs=1e-12)

    def test_all_branches_reduce_to_same_point(self):
        p = make_params(1.0, 1.0)
        assert fixed_points(p, 3, -2) == fixed_points(p, 0, 0)


class TestAnalyticEstimate:
    def test_values(self):
        assert analytic_lyapunov_estimate(make_params(0.6, 256)) == pytest.approx(
            math.log(153.6), abs=1e-12
        )
        assert analytic_lyapunov_estimate(make_params(1.0, 1.0)) == 0.0
        assert analytic_lyapunov_estimate(make_params(math.e, 1.0)) == pytest.approx(1.0)

    def test_zero_chaos_parameter_rejected(self):
        with pytest.raises(ValidationError):
            analytic_lyapunov_estimate(make_params(0.0, 2.0))


class TestEstimators:
    def test_regular_regime_has_vanishing_exponent(self):
        est = lyapunov_tangent(make_params(0.2, 1.0), n_kicks=3000, n_samples=30, seed=1)
        assert abs(est.value) < 0.02

    def test_methods_agree_in_chaotic_regime(self):
        p = make_params(2.0, 2.0)
        a = lyapunov_tangent(p, n_kicks=3000, n_samples=50, seed=2)
        b = lyapunov_jacobian_product(p, n_kicks=3000, n_samples=50, seed=3)
        combined = math.hypot(a.stderr, b.stderr)
        assert abs(a.value - b.value) < 2 * combined + 1e-3

    def test_estimate_independent_of_initial_momenta(self):
        p = make_params(2.0, 2.0)
        a = lyapunov_tangent(p, n_kicks=3000, n_samples=50, seed=4)
        b = lyapunov_tangent(
            p, n_kicks=3000, n_samples=50, seed=4, initial_momenta=(17.0, -4.0)
        )
        combined = math.hypot(a.stderr, b.stderr)
        assert abs(a.value - b.value) < 3 * combined + 1e-3

    def test_validation(self):
        p = make_params(1.0, 1.0)
        with pytest.raises(ValidationError):
            lyapunov_tangent(p, n_kicks=5, renorm_every=10)
        with pytest.raises(ValidationError):
            lyapunov_tangent(p, n_samples=0)
        with pytest.raises(ValidationError):
            lyapunov_jacobian_product(p, n_kicks=5, orthonormalize_every=10)
