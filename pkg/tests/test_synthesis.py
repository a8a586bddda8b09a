"""Tests for Riccati-based gain synthesis and closed-loop certificates."""

import numpy as np
import pytest

from ContainPy.core.errors import CertificationError
from ContainPy.core.synthesis import (
    _riccati_map,
    care_residual,
    care_solve,
    closed_loop_matrix,
    companion_plant,
    continuous_gain,
    dare_margin,
    discrete_gain,
    epsilon_continuous,
    epsilon_discrete,
    estimator_care_solve,
    estimator_gain_continuous,
    estimator_gain_discrete,
    estimator_matrices,
    gain_to_kappa,
    get_time_domains,
    kappa_to_gain,
    modified_dare_solve,
    reversal_dual,
    synthesize_estimator,
    synthesize_gains,
    verify_closed_loop,
    verify_estimator,
)
from ContainPy.core.topology import build_laplacian, certify_topology
from ContainPy.harness.builtin import CUBIC_EXAMPLE_GAINS


class TestPlant:
    def test_companion_shapes(self):
        plant = companion_plant(3)
        np.testing.assert_array_equal(plant.A, np.eye(3, k=1))
        np.testing.assert_array_equal(plant.B.ravel(), [0, 0, 1])
        np.testing.assert_array_equal(plant.transition, plant.A)

    def test_discrete_transition(self):
        plant = companion_plant(2, "discrete")
        np.testing.assert_array_equal(plant.transition, [[1, 1], [0, 1]])

    def test_invalid_order(self):
        with pytest.raises(ValueError, match="order"):
            companion_plant(0)

    def test_invalid_mode(self):
        with pytest.raises(ValueError, match="Invalid mode"):
            companion_plant(2, "hybrid")
        assert get_time_domains() == ["continuous", "discrete"]


class TestContinuousRiccati:
    def test_second_order_solution(self):
        P = care_solve(companion_plant(2))
        s3 = np.sqrt(3.0)
        np.testing.assert_allclose(P, [[s3, 1.0], [1.0, s3]], atol=1e-10)

    def test_fourth_order_gain_matches_example(self):
        P = care_solve(companion_plant(4))
        np.testing.assert_allclose(2.0 * P[-1], CUBIC_EXAMPLE_GAINS, atol=1e-3)

    @pytest.mark.parametrize("order", range(1, 9))
    def test_residual_and_definiteness(self, order):
        plant = companion_plant(order)
        P = care_solve(plant)
        assert care_residual(P, plant.A, plant.B) <= 1e-8
        np.testing.assert_allclose(P, P.T, atol=1e-12)
        assert np.linalg.eigvalsh(P).min() > 0

    def test_rejects_discrete_plant(self):
        with pytest.raises(ValueError, match="continuous"):
            care_solve(companion_plant(2, "discrete"))

    def test_gain_is_scaled_last_row(self):
        plant = companion_plant(3)
        P = care_solve(plant)
        np.testing.assert_allclose(continuous_gain(P, 0.7, plant), 0.7 * P[-1])


class TestCouplingGains:
    def test_epsilon_continuous(self, four_leader_ring):
        _, spectrum = certify_topology(four_leader_ring)
        assert epsilon_continuous(spectrum) == pytest.approx(0.5)
        assert epsilon_continuous(0.5) == pytest.approx(0.5 / (0.99 * 0.5))

    def test_epsilon_continuous_rejects_nonpositive(self):
        with pytest.raises(CertificationError):
            epsilon_continuous(0.0)

    def test_epsilon_discrete(self):
        assert epsilon_discrete([2 / 3, 3 / 4]) == pytest.approx(2 / 3)

    def test_epsilon_discrete_outside_disk(self):
        with pytest.raises(CertificationError, match=">= 1"):
            epsilon_discrete([0.5, 2.5])


class TestDiscreteRiccati:
    def test_scalar_closed_form(self):
        eps = 0.5
        P = modified_dare_solve(companion_plant(1, "discrete"), eps)
        assert P[0, 0] == pytest.approx(1.0 / (1.0 - eps ** 2), rel=1e-9)

    @pytest.mark.parametrize("order", range(1, 7))
    def test_inequality_margin(self, order):
        plant = companion_plant(order, "discrete")
        eps = 2.0 / 3.0
        P = modified_dare_solve(plant, eps)
        assert dare_margin(P, plant.A_hat, plant.B, eps) >= 0.4
        assert np.linalg.eigvalsh(0.5 * (P + P.T)).min() > 0

    def test_iterates_increase_in_loewner_order(self):
        plant = companion_plant(2, "discrete")
        P = np.eye(2)
        for _ in range(200):
            nxt = _riccati_map(P, plant.A_hat, plant.B, 0.9) + np.eye(2)
            step = np.linalg.eigvalsh(nxt - P).min()
            assert step >= -1e-12 * max(1.0, np.linalg.norm(nxt))
            P = nxt
        assert np.all(np.isfinite(P))

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.2])
    def test_rejects_epsilon_outside_unit_interval(self, eps):
        with pytest.raises(ValueError, match="epsilon"):
            modified_dare_solve(companion_plant(2, "discrete"), eps)

    def test_rejects_continuous_plant(self):
        with pytest.raises(ValueError, match="discrete"):
            modified_dare_solve(companion_plant(2), 0.5)

    def test_discrete_gain_stabilises_single_agent(self):
        plant = companion_plant(3, "discrete")
        P = modified_dare_solve(plant, 0.6)
        K = discrete_gain(P, plant)
        closed = plant.A_hat - plant.B @ K.reshape(1, -1)
        assert np.max(np.abs(np.linalg.eigvals(closed))) < 1.0


class TestKappa:
    def test_ordering(self):
        K = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(gain_to_kappa(K), [3.0, 2.0, 1.0])
        np.testing.assert_array_equal(kappa_to_gain(gain_to_kappa(K)), K)

    def test_synthesis_exposes_kappa(self, segment_topology):
        blocks, spectrum = certify_topology(segment_topology)
        syn = synthesize_gains(blocks, spectrum, 2, "continuous")
        np.testing.assert_array_equal(syn.kappa, syn.K[::-1])


class TestSynthesisPipelines:
    def test_segment_continuous_gain(self, segment_topology):
        blocks, spectrum = certify_topology(segment_topology)
        syn = synthesize_gains(blocks, spectrum, 2, "continuous")
        assert syn.epsilon == pytest.approx(0.5)
        np.testing.assert_allclose(syn.K, 0.5 * np.array([1.0, np.sqrt(3.0)]), atol=1e-10)
        assert syn.certified and syn.margin > 0
        assert syn.weighting is None

    def test_segment_discrete_gain(self, segment_topology):
        blocks, spectrum = certify_topology(segment_topology)
        syn = synthesize_gains(blocks, spectrum, 2, "discrete")
        assert syn.epsilon == pytest.approx(2 / 3)
        assert syn.certified
        assert syn.residual >= 0.4

    def test_uniform_weighting(self, three_leader_ring):
        blocks, spectrum = certify_topology(three_leader_ring)
        syn = synthesize_gains(blocks, spectrum, 3, "discrete", weighting="uniform", mu=0.33)
        assert syn.certified
        assert syn.weighting == "uniform" and syn.mu == 0.33

    def test_explicit_example_gains_certify(self, four_leader_ring):
        blocks, _ = certify_topology(four_leader_ring)
        margin = verify_closed_loop(blocks, companion_plant(4), CUBIC_EXAMPLE_GAINS)
        assert margin > 0

    def test_destabilising_gain_not_certified(self, four_leader_ring):
        blocks, _ = certify_topology(four_leader_ring)
        margin = verify_closed_loop(blocks, companion_plant(2), [-1.0, 1.0])
        assert margin < 0

    @pytest.mark.parametrize("mode", ["continuous", "discrete"])
    def test_kronecker_and_blockwise_agree(self, three_leader_ring, mode):
        blocks, spectrum = certify_topology(three_leader_ring)
        syn = synthesize_gains(blocks, spectrum, 3, mode)
        plant = companion_plant(3, mode)
        kron = verify_closed_loop(blocks, plant, syn.K, method="kronecker")
        block = verify_closed_loop(blocks, plant, syn.K, method="blockwise")
        assert kron == pytest.approx(block, abs=1e-5)

    def test_unknown_method(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        with pytest.raises(ValueError, match="method"):
            verify_closed_loop(blocks, companion_plant(2), [1.0, 1.0], method="lyapunov")

    def test_closed_loop_matrix_shape(self, four_leader_ring):
        blocks = build_laplacian(four_leader_ring)
        mat = closed_loop_matrix(blocks, companion_plant(3), [1.0, 2.0, 3.0])
        assert mat.shape == (12, 12)

    def test_to_dict(self, segment_topology):
        blocks, spectrum = certify_topology(segment_topology)
        data = synthesize_gains(blocks, spectrum, 2, "discrete").to_dict()
        assert data["mode"] == "discrete"
        assert data["weighting"] == "normalized"
        assert len(data["K"]) == 2


class TestEstimators:
    def test_estimator_riccati_is_reversal_dual(self):
        P_est = estimator_care_solve(3)
        P_ctrl = care_solve(companion_plant(3))
        np.testing.assert_allclose(P_est, reversal_dual(P_ctrl), atol=1e-8)

    def test_continuous_estimator_gain(self):
        K_e, _ = estimator_gain_continuous(1, 0.7)
        np.testing.assert_allclose(K_e, [0.7], atol=1e-8)
        K_e, P = estimator_gain_continuous(2, 2.0)
        np.testing.assert_allclose(P, [[np.sqrt(3), 1.0], [1.0, np.sqrt(3)]], atol=1e-8)
        np.testing.assert_allclose(K_e, 2.0 * np.array([np.sqrt(3), 1.0]), atol=1e-8)

    def test_discrete_estimator_gain_scalar(self):
        K_e, _ = estimator_gain_discrete(1, 0.5)
        np.testing.assert_allclose(K_e, [1.0], atol=1e-10)

    def test_discrete_estimator_gain_stabilizes_disk(self):
        K_e, _ = estimator_gain_discrete(2, 0.9)
        E, G = estimator_matrices(2, "discrete")
        for theta in np.linspace(0.0, 2 * np.pi, 13):
            lam = 1.0 + 0.85 * np.exp(1j * theta)
            closed = E - lam * np.outer(K_e, G[0])
            assert np.max(np.abs(np.linalg.eigvals(closed))) < 1.0

    def test_discrete_estimator_gain_rejects_epsilon(self):
        with pytest.raises(ValueError):
            estimator_gain_discrete(2, 1.2)

    def test_continuous_estimator_certified(self, four_leader_ring):
        blocks, spectrum = certify_topology(four_leader_ring)
        est = synthesize_estimator(blocks, spectrum, 3, "continuous")
        assert est.certified
        assert est.K_e.shape == (3,)
        assert verify_estimator(blocks, est.K_e, "continuous", method="blockwise") == pytest.approx(
            est.margin, abs=1e-5
        )

    def test_discrete_estimator_certified(self, three_leader_ring):
        blocks, spectrum = certify_topology(three_leader_ring)
        est = synthesize_estimator(blocks, spectrum, 2, "discrete")
        assert est.certified
        assert 0 < est.epsilon < 1
        assert est.to_dict()["mode"] == "discrete"
