"""Tests for polynomial signals, difference operators, interpolation and noise."""

import numpy as np
import pytest

from ContainPy.core.errors import ConditioningWarning
from ContainPy.core.signals import (
    NoiseModel,
    VectorPolynomial,
    binomial_difference,
    derivative_chain,
    difference_noise_bound,
    difference_noise_covariance,
    interpolate_waypoints,
    noise_table,
    poly_add,
    poly_antiderivative,
    poly_derivative,
    poly_eval,
    poly_forward_difference,
    poly_running_sum,
    poly_scale,
    sample_noise,
    series_forward_difference,
    series_running_sum,
)
from ContainPy.harness.builtin import (
    ROBOT_COEFFICIENTS,
    ROBOT_WAYPOINT_TIMES,
    ROBOT_WAYPOINTS,
    master_trajectories,
)


@pytest.fixture
def quadratic():
    # (1 + 3t + 5t^2, 2 + 4t + 6t^2)
    return VectorPolynomial([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])


class TestPolynomials:
    def test_horner_scalar(self, quadratic):
        np.testing.assert_allclose(poly_eval(quadratic, 2.0), [27.0, 34.0])

    def test_horner_array(self, quadratic):
        t = np.array([0.0, 1.0, 2.0])
        out = quadratic(t)
        assert out.shape == (3, 2)
        np.testing.assert_allclose(out[:, 0], 1 + 3 * t + 5 * t ** 2)

    def test_one_dimensional_input_is_scalar_polynomial(self):
        poly = VectorPolynomial([1.0, 0.0, 1.0])
        assert poly.dimension == 1
        assert poly.degree == 2

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            VectorPolynomial([[np.nan, 0.0]])

    def test_dict_round_trip(self, quadratic):
        rebuilt = VectorPolynomial.from_dict(quadratic.to_dict())
        np.testing.assert_array_equal(rebuilt.coefficients, quadratic.coefficients)

    def test_derivative(self):
        cubic = VectorPolynomial([0.0, 0.0, 0.0, 1.0])
        np.testing.assert_allclose(poly_derivative(cubic).coefficients.ravel(), [0.0, 0.0, 3.0])
        np.testing.assert_allclose(poly_derivative(cubic, 3).coefficients.ravel(), [6.0])
        assert poly_derivative(cubic, 4).is_zero()

    def test_negative_order_rejected(self, quadratic):
        with pytest.raises(ValueError):
            poly_derivative(quadratic, -1)
        with pytest.raises(ValueError):
            poly_forward_difference(quadratic, -1)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_forward_difference_matches_samples(self, order):
        poly = VectorPolynomial([[1.0, -2.0], [0.5, 0.3], [-0.2, 0.01], [0.03, 0.004]])
        ks = np.arange(12, dtype=float)
        samples = poly(ks)
        expected = np.diff(samples, n=order, axis=0)
        got = poly_forward_difference(poly, order)(ks[: ks.size - order])
        np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-10)

    def test_difference_doc_case(self):
        out = poly_forward_difference(VectorPolynomial([0.0, 0.0, 1.0])).coefficients.ravel()
        np.testing.assert_allclose(out, [1.0, 2.0])

    def test_running_sum_inverts_difference(self, quadratic):
        S = poly_running_sum(quadratic)
        np.testing.assert_allclose(S(0.0), [0.0, 0.0], atol=1e-14)
        ks = np.arange(10, dtype=float)
        np.testing.assert_allclose(np.diff(S(ks), axis=0), quadratic(ks[:-1]), rtol=1e-12)

    def test_running_sum_matches_series(self, quadratic):
        ks = np.arange(8, dtype=float)
        expected = series_running_sum(quadratic(ks))
        got = poly_running_sum(quadratic)(np.arange(9, dtype=float))
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_antiderivative(self, quadratic):
        F = poly_antiderivative(quadratic)
        np.testing.assert_allclose(poly_derivative(F).coefficients, quadratic.coefficients)
        np.testing.assert_allclose(F(0.0), [0.0, 0.0])

    def test_add_and_scale(self, quadratic):
        line = VectorPolynomial([[1.0, 1.0], [1.0, 1.0]])
        total = poly_add(quadratic, poly_scale(line, 2.0))
        np.testing.assert_allclose(total(1.0), quadratic(1.0) + 4.0)

    def test_add_dimension_mismatch(self, quadratic):
        with pytest.raises(ValueError, match="Dimension"):
            poly_add(quadratic, VectorPolynomial([1.0]))

    def test_derivative_chain(self, quadratic):
        chain = derivative_chain(quadratic, 3)
        assert len(chain) == 3
        np.testing.assert_allclose(chain[2].coefficients, [[10.0, 12.0]])
        discrete = derivative_chain(quadratic, 2, discrete=True)
        np.testing.assert_allclose(discrete[1](0.0), quadratic(1.0) - quadratic(0.0))


class TestSeries:
    @pytest.mark.parametrize("n", range(9))
    def test_binomial_difference_matches_numpy(self, n):
        rng = np.random.default_rng(n)
        series = rng.standard_normal((20, 3))
        for k in (0, 3, 20 - n - 1):
            expected = np.diff(series, n=n, axis=0)[k]
            np.testing.assert_allclose(binomial_difference(series, n, k), expected, atol=1e-10)

    def test_binomial_difference_scalar(self):
        series = np.arange(10, dtype=float) ** 2
        assert binomial_difference(series, 2, 4) == pytest.approx(2.0)

    def test_binomial_difference_out_of_range(self):
        with pytest.raises(ValueError, match="not defined"):
            binomial_difference(np.zeros(5), 3, 2)

    def test_series_forward_difference(self):
        series = np.arange(6, dtype=float) ** 3
        np.testing.assert_allclose(series_forward_difference(series, 3), 6.0)

    def test_series_running_sum(self):
        out = series_running_sum([1.0, 2.0, 3.0])
        np.testing.assert_allclose(out, [0.0, 1.0, 3.0, 6.0])


def _printed_unit(value: float) -> float:
    """One unit in the fourth significant digit."""
    return 10.0 ** (np.floor(np.log10(abs(value))) - 3)


class TestInterpolation:
    def test_masters_pass_through_waypoints(self):
        for i, poly in enumerate(master_trajectories()):
            got = poly(ROBOT_WAYPOINT_TIMES)
            np.testing.assert_allclose(got, ROBOT_WAYPOINTS[:, i], rtol=1e-9, atol=1e-7)
            assert poly.degree == 5

    def test_first_master_matches_printed_coefficients(self):
        coeffs = interpolate_waypoints(ROBOT_WAYPOINT_TIMES, ROBOT_WAYPOINTS[:, 0]).coefficients
        printed = ROBOT_COEFFICIENTS[0]
        for j in range(6):
            for c in range(2):
                ref = printed[j, c]
                if ref == 0.0:
                    assert abs(coeffs[j, c]) < 1e-12
                else:
                    assert abs(coeffs[j, c] - ref) <= _printed_unit(ref)

    def test_single_waypoint_is_constant(self):
        poly = interpolate_waypoints([3.0], [[1.0, 2.0]])
        assert poly.degree == 0
        np.testing.assert_allclose(poly(10.0), [1.0, 2.0])

    def test_duplicate_times_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            interpolate_waypoints([0.0, 1.0, 1.0], np.zeros((3, 2)))

    def test_count_mismatch_rejected(self):
        with pytest.raises(ValueError, match="one waypoint per time"):
            interpolate_waypoints([0.0, 1.0], np.zeros((3, 2)))

    def test_ill_conditioning_warns(self):
        with pytest.warns(ConditioningWarning):
            interpolate_waypoints(
                ROBOT_WAYPOINT_TIMES, ROBOT_WAYPOINTS[:, 0], condition_limit=1.0
            )


class TestNoise:
    @pytest.fixture
    def model(self):
        return NoiseModel(dimension=2, intensities={(0, 2): 0.5, (1, 2): [0.1, 0.2]}, seed=42)

    def test_scalar_intensity_broadcast(self, model):
        np.testing.assert_allclose(model.rho((0, 2)), [0.5, 0.5])
        np.testing.assert_allclose(model.rho((2, 0)), [0.0, 0.0])

    def test_invalid_intensity(self):
        with pytest.raises(ValueError):
            NoiseModel(dimension=2, intensities={(0, 1): [-1.0, 0.0]})
        with pytest.raises(ValueError):
            NoiseModel(dimension=2, intensities={(0, 1): [1.0, 1.0, 1.0]})

    def test_table_prefix_is_stable(self, model):
        long = noise_table(model, (0, 2), 50)
        short = noise_table(model, (0, 2), 20)
        np.testing.assert_array_equal(long[:20], short)
        np.testing.assert_array_equal(sample_noise(model, (0, 2), 7), long[7])

    def test_streams_and_edges_are_independent(self, model):
        base = noise_table(model, (0, 2), 30, scaled=False)
        other_run = noise_table(model.for_run(1), (0, 2), 30, scaled=False)
        other_edge = noise_table(model, (1, 2), 30, scaled=False)
        assert not np.allclose(base, other_run)
        assert not np.allclose(base, other_edge)

    def test_reproducible(self, model):
        a = noise_table(model, (1, 2), 10)
        b = noise_table(NoiseModel(2, {(1, 2): [0.1, 0.2]}, seed=42), (1, 2), 10)
        np.testing.assert_array_equal(a, b)

    def test_scaling(self, model):
        raw = noise_table(model, (1, 2), 10, scaled=False)
        np.testing.assert_allclose(noise_table(model, (1, 2), 10), raw * [0.1, 0.2])

    def test_silent(self):
        assert NoiseModel(2).is_silent
        assert NoiseModel(2, {(0, 1): 0.0}).is_silent

    def test_difference_covariance_first_order(self):
        np.testing.assert_allclose(difference_noise_covariance(1, 0), [[1.0, -1.0], [-1.0, 2.0]])
        np.testing.assert_allclose(difference_noise_covariance(1, 1), [[0.0, 0.0], [1.0, -1.0]])
        assert not difference_noise_covariance(1, 2).any()
        assert not difference_noise_covariance(3, 4).any()

    def test_difference_covariance_matches_sampling(self):
        rng = np.random.default_rng(0)
        eta = rng.standard_normal(1_000_000)
        nu = np.stack([eta[:-2], np.diff(eta)[:-1], np.diff(eta, 2)], axis=1)
        for lag in (0, 1, 2):
            count = nu.shape[0] - lag
            empirical = nu[:count].T @ nu[lag:lag + count] / count
            np.testing.assert_allclose(empirical, difference_noise_covariance(2, lag), atol=0.05)

    def test_difference_noise_bound(self):
        assert difference_noise_bound(0) == pytest.approx(1.0)
        assert difference_noise_bound(1) == pytest.approx(np.sqrt(7.0))
