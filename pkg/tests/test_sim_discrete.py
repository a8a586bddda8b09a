"""Tests for the exact discrete-time recursions and noisy ensembles."""

import numpy as np
import pytest

from ContainPy.core.signals import NoiseModel
from ContainPy.harness.builtin import get_builtin_scenario
from ContainPy.sim.common import cross_validation_gap, fit_decay, prepare_closed_loop
from ContainPy.sim.discrete import (
    get_info_modes,
    lifted_transition,
    run_discrete_high_order,
    run_discrete_pin,
    run_discrete_pin_noisy,
    run_lifted_discrete,
    simulate_discrete,
    summarize_ensemble,
    weighted_noise,
)


@pytest.fixture(scope="module")
def pin_scenario():
    return get_builtin_scenario("discrete-pin-example")


class TestPinLaw:
    def test_containment_and_decay(self, pin_scenario):
        trace = run_discrete_pin(pin_scenario)
        assert trace.domain == "discrete"
        assert trace.times.size == 201
        assert trace.final_ratio() < 1e-2
        assert fit_decay(trace.times, trace.tracking_error).decaying

    def test_matches_lifted_recursion(self, pin_scenario):
        loop = prepare_closed_loop(pin_scenario)
        trace = run_discrete_pin(pin_scenario, loop)
        lifted = run_lifted_discrete(pin_scenario, loop)
        assert cross_validation_gap(trace.positions, lifted.positions) < 1e-5

    def test_inputs_recorded(self, pin_scenario):
        trace = run_discrete_pin(pin_scenario)
        assert trace.inputs.shape == trace.positions.shape
        np.testing.assert_allclose(
            trace.positions[1:] - trace.positions[:-1], trace.inputs[:-1], atol=1e-9
        )

    def test_normalized_weighting_scale(self, pin_scenario):
        loop = prepare_closed_loop(pin_scenario)
        assert loop.weighting == "normalized"
        np.testing.assert_allclose(loop.scale, 0.25)

    def test_lifted_transition_is_schur(self, pin_scenario):
        loop = prepare_closed_loop(pin_scenario)
        radius = np.max(np.abs(np.linalg.eigvals(lifted_transition(loop))))
        assert radius < 1.0
        assert 1.0 - radius == pytest.approx(loop.margin, abs=1e-8)

    def test_uniform_weighting(self):
        scenario = get_builtin_scenario("discrete-pin-uniform")
        loop = prepare_closed_loop(scenario)
        assert loop.weighting == "uniform"
        assert 0.0 < loop.mu < 1.0
        np.testing.assert_allclose(loop.scale, loop.mu)
        trace = run_discrete_pin(scenario, loop)
        assert trace.final_ratio() < 1e-2
        lifted = run_lifted_discrete(scenario, loop)
        assert cross_validation_gap(trace.positions, lifted.positions) < 1e-5

    def test_weighting_override(self, pin_scenario):
        loop = prepare_closed_loop(pin_scenario, weighting="uniform", mu=0.3)
        assert loop.mu == 0.3 and loop.certified
        trace = run_discrete_pin(pin_scenario, weighting="uniform", mu=0.3)
        assert trace.attrs["stability_margin"] == pytest.approx(loop.margin)
        assert trace.tracking_error[-1] < trace.tracking_error[0]

    def test_invalid_mu(self, pin_scenario):
        with pytest.raises(ValueError, match="mu"):
            run_discrete_pin(pin_scenario, weighting="uniform", mu=1.2)

    def test_rejects_high_order_followers(self):
        scenario = get_builtin_scenario("discrete-highorder-example")
        with pytest.raises(ValueError, match="single-integrator"):
            run_discrete_pin(scenario)

    def test_deterministic(self, pin_scenario):
        a = run_discrete_pin(pin_scenario)
        b = run_discrete_pin(pin_scenario)
        np.testing.assert_array_equal(a.positions, b.positions)


class TestDisturbances:
    def test_rejected_when_order_suffices(self):
        scenario = get_builtin_scenario("discrete-disturbance-rejection")
        loop = prepare_closed_loop(scenario)
        trace = run_discrete_pin(scenario, loop)
        assert trace.final_ratio() < 1e-2
        lifted = run_lifted_discrete(scenario, loop)
        assert cross_validation_gap(trace.positions, lifted.positions) < 1e-5

    def test_not_rejected_beyond_order(self):
        trace = run_discrete_pin(get_builtin_scenario("discrete-disturbance-sharpness"))
        assert trace.final_ratio() > 0.1


class TestHighOrder:
    def test_full_information(self):
        scenario = get_builtin_scenario("discrete-highorder-example")
        loop = prepare_closed_loop(scenario)
        trace = run_discrete_high_order(scenario, loop, info="full")
        assert trace.final_ratio() < 1e-2
        lifted = run_lifted_discrete(scenario, loop)
        assert cross_validation_gap(trace.positions, lifted.positions) < 1e-5

    def test_estimator(self):
        scenario = get_builtin_scenario("discrete-estimator-example")
        trace = run_discrete_high_order(scenario, info="estimator")
        assert trace.estimator_error[0] > 0.1
        assert trace.estimator_error[-1] < 1e-6
        assert trace.final_ratio() < 1e-2

    def test_exact_estimator_start(self):
        scenario = get_builtin_scenario("discrete-estimator-example").with_overrides(
            estimator_init="exact"
        )
        loop = prepare_closed_loop(scenario)
        est = run_discrete_high_order(scenario, loop, info="estimator")
        full = run_discrete_high_order(scenario, loop, info="full")
        np.testing.assert_allclose(est.positions, full.positions, atol=1e-12)

    def test_info_modes(self):
        assert get_info_modes() == ["full", "estimator"]
        scenario = get_builtin_scenario("discrete-highorder-example")
        with pytest.raises(ValueError, match="Invalid info mode"):
            run_discrete_high_order(scenario, info="oracle")
        with pytest.raises(ValueError, match="estimator"):
            run_discrete_high_order(scenario, info="estimator")


class TestNoise:
    @pytest.fixture(scope="class")
    def scenario(self):
        return get_builtin_scenario("discrete-noisy-example")

    def test_weighted_noise_shape(self, scenario):
        out = weighted_noise(scenario.noise, scenario.topology.adjacency, 3, 10)
        assert out.shape == (10, 3, 2)
        assert np.abs(out).max() > 0

    def test_silent_noise_matches_noise_free(self, pin_scenario):
        loop = prepare_closed_loop(pin_scenario)
        silent = simulate_discrete(pin_scenario, loop, noise=NoiseModel(2))
        clean = simulate_discrete(pin_scenario, loop)
        np.testing.assert_array_equal(silent.positions, clean.positions)

    @pytest.mark.slow
    def test_monte_carlo_checks_pass(self, scenario):
        report = run_discrete_pin_noisy(scenario)
        assert report.num_runs == 200
        assert report.mean_converged
        assert report.second_moment_bounded
        assert report.passed

    def test_scheduler_does_not_change_results(self, scenario):
        loop = prepare_closed_loop(scenario)
        threaded = run_discrete_pin_noisy(scenario, loop, num_runs=6, scheduler="threads")
        serial = run_discrete_pin_noisy(scenario, loop, num_runs=6, scheduler="synchronous")
        np.testing.assert_array_equal(threaded.mean_distance, serial.mean_distance)
        np.testing.assert_array_equal(threaded.second_moment, serial.second_moment)

    def test_runs_draw_independent_noise(self, scenario):
        report = run_discrete_pin_noisy(scenario, num_runs=3, keep_traces=True,
                                        scheduler="synchronous")
        first, second = report.traces[0], report.traces[1]
        assert not np.array_equal(first.positions, second.positions)

    def test_needs_two_runs(self, scenario):
        with pytest.raises(ValueError, match="at least 2"):
            run_discrete_pin_noisy(scenario, num_runs=1)
        with pytest.raises(ValueError, match="at least 2"):
            summarize_ensemble([])

    def test_needs_noise_model(self, pin_scenario):
        with pytest.raises(ValueError, match="noise"):
            run_discrete_pin_noisy(pin_scenario, num_runs=4)
