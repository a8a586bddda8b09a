"""Tests for the continuous-time RK4 simulations."""

import numpy as np
import pytest

from ContainPy.harness.builtin import get_builtin_scenario
from ContainPy.sim.common import cross_validation_gap, fit_decay, prepare_closed_loop, time_grid
from ContainPy.sim.continuous import (
    _rk4_integrate,
    lifted_matrix,
    run_high_order_estimator,
    run_high_order_full_info,
    run_lifted_closed_loop,
    run_pin_single_integrator,
)


def test_rk4_exponential_decay():
    taken, samples = _rk4_integrate(lambda h, y: -y, np.array([1.0]), steps=100, dt=0.01, stride=10)
    np.testing.assert_array_equal(taken, np.arange(0, 101, 10))
    assert samples[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-9)


def test_rk4_records_last_step_off_stride():
    taken, _ = _rk4_integrate(lambda h, y: -y, np.array([1.0]), steps=25, dt=0.01, stride=10)
    np.testing.assert_array_equal(taken, [0, 10, 20, 25])


def test_time_grid_validation():
    assert time_grid(1.0, 0.01, 0.1) == (100, 10)
    with pytest.raises(ValueError, match="Step size"):
        time_grid(1.0, 0.0, None)
    with pytest.raises(ValueError, match="Horizon"):
        time_grid(-1.0, 0.01, None)


class TestFitDecay:
    def test_exponential_series(self):
        t = np.linspace(0.0, 10.0, 101)
        fit = fit_decay(t, 3.0 * np.exp(-0.5 * t))
        assert fit.decaying and not fit.reached_floor
        assert fit.beta == pytest.approx(0.5, rel=1e-6)

    def test_series_settled_at_zero(self):
        fit = fit_decay(np.arange(10.0), [1.0] + [0.0] * 9)
        assert fit.reached_floor and fit.decaying

    def test_series_returning_above_floor(self):
        fit = fit_decay(np.arange(10.0), [1.0] + [0.0] * 8 + [5.0])
        assert not fit.reached_floor
        assert not fit.decaying

    def test_two_sample_growth(self):
        fit = fit_decay([0.0, 1.0], [1.0, 1e6])
        assert fit.samples == 1
        assert not fit.decaying


@pytest.mark.slow
def test_rk4_error_shrinks_at_fourth_order():
    scenario = get_builtin_scenario("continuous-disturbance-rejection").with_overrides(
        horizon=4.0, sample_dt=0.2
    )
    finals = []
    for dt in (0.2, 0.1, 0.05):
        trace = run_pin_single_integrator(scenario.with_overrides(dt=dt))
        assert trace.times[-1] == pytest.approx(4.0)
        finals.append(trace.positions[-1])
    coarse = np.max(np.abs(finals[0] - finals[1]))
    fine = np.max(np.abs(finals[1] - finals[2]))
    assert fine > 0
    assert 10.0 < coarse / fine < 24.0


@pytest.mark.slow
class TestHighOrderExample:
    @pytest.fixture(scope="class")
    def scenario(self):
        return get_builtin_scenario("continuous-highorder-example")

    @pytest.fixture(scope="class")
    def trace(self, scenario):
        return run_high_order_full_info(scenario)

    def test_containment(self, trace):
        assert trace.final_ratio() < 1e-2
        assert trace.positions.shape == (601, 4, 2)
        assert trace.times[-1] == pytest.approx(60.0)

    def test_tracking_error_decays(self, trace):
        assert fit_decay(trace.times, trace.tracking_error).decaying

    def test_matches_lifted_closed_loop(self, scenario, trace):
        lifted = run_lifted_closed_loop(scenario)
        assert cross_validation_gap(trace.positions, lifted.positions) < 1e-5

    def test_explicit_gains_are_applied(self, scenario):
        loop = prepare_closed_loop(scenario)
        assert loop.explicit_gains
        np.testing.assert_array_equal(loop.K, scenario.gains)
        assert loop.certified


@pytest.mark.slow
def test_synthesized_gains_contain():
    scenario = get_builtin_scenario("continuous-highorder-synthesized")
    loop = prepare_closed_loop(scenario)
    assert not loop.explicit_gains
    assert loop.synthesis.epsilon == pytest.approx(0.5)
    trace = run_high_order_full_info(scenario, loop)
    assert trace.final_ratio() < 1e-2


@pytest.mark.slow
class TestEstimator:
    def test_estimator_error_vanishes(self):
        scenario = get_builtin_scenario("continuous-estimator-example")
        trace = run_high_order_estimator(scenario)
        assert trace.estimator_error[0] > 0.1
        assert trace.estimator_error[-1] < 1e-6
        assert trace.final_ratio() < 1e-2

    def test_exact_start_reproduces_full_information(self):
        scenario = get_builtin_scenario("continuous-estimator-example").with_overrides(
            estimator_init="exact", horizon=10.0
        )
        loop = prepare_closed_loop(scenario)
        est = run_high_order_estimator(scenario, loop)
        full = run_high_order_full_info(scenario, loop)
        np.testing.assert_allclose(est.positions, full.positions, atol=1e-12)
        assert np.max(est.estimator_error) < 1e-12

    def test_requires_estimator(self):
        scenario = get_builtin_scenario("continuous-highorder-example").with_overrides(horizon=1.0)
        with pytest.raises(ValueError, match="estimator"):
            run_high_order_estimator(scenario)


@pytest.mark.slow
class TestSingleIntegrators:
    def test_pin_with_disturbance_matches_lifted(self):
        scenario = get_builtin_scenario("continuous-pin-example")
        loop = prepare_closed_loop(scenario)
        trace = run_pin_single_integrator(scenario, loop)
        lifted = run_lifted_closed_loop(scenario, loop)
        assert cross_validation_gap(trace.positions, lifted.positions) < 1e-5
        assert trace.final_ratio() < 1e-2

    def test_disturbance_rejected_when_order_suffices(self):
        trace = run_pin_single_integrator(get_builtin_scenario("continuous-disturbance-rejection"))
        assert trace.final_ratio() < 1e-2

    def test_disturbance_not_rejected_beyond_order(self):
        trace = run_pin_single_integrator(get_builtin_scenario("continuous-disturbance-sharpness"))
        assert trace.final_ratio() > 0.1

    def test_rejects_high_order_followers(self):
        scenario = get_builtin_scenario("continuous-highorder-example")
        with pytest.raises(ValueError, match="single-integrator"):
            run_pin_single_integrator(scenario)


def test_lifted_matrix_is_hurwitz():
    scenario = get_builtin_scenario("continuous-disturbance-rejection")
    loop = prepare_closed_loop(scenario)
    eigs = np.linalg.eigvals(lifted_matrix(loop))
    assert eigs.real.max() < 0
    assert -eigs.real.max() == pytest.approx(loop.margin, abs=1e-8)
