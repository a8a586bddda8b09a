"""Tests for interaction graphs, Laplacian blocks and spectral certificates."""

import numpy as np
import pytest

from ContainPy.core.errors import CertificationError, TopologyError
from ContainPy.core.topology import (
    DirectedTopology,
    build_laplacian,
    certify_spectrum,
    certify_topology,
    check_reachability,
    choose_uniform_mu,
    containment_weights,
    get_weighting_modes,
    input_scale,
    normalized_spectrum,
    random_topology,
)


class TestDirectedTopology:
    def test_from_edges_builds_adjacency(self, segment_topology):
        adj = segment_topology.adjacency
        assert adj.shape == (4, 4)
        assert adj[2, 0] == 1.0 and adj[2, 1] == 1.0
        assert adj[3, 2] == 1.0
        assert not adj[:2].any()

    def test_edges_round_trip(self, four_leader_ring):
        data = four_leader_ring.to_dict()
        rebuilt = DirectedTopology.from_edges(data["leaders"], data["followers"], data["edges"])
        np.testing.assert_array_equal(rebuilt.adjacency, four_leader_ring.adjacency)

    def test_in_degrees(self, three_leader_ring):
        np.testing.assert_array_equal(three_leader_ring.in_degrees, [0, 0, 0, 3, 3, 3])

    def test_malformed_edge_is_named(self):
        with pytest.raises(TopologyError, match="#1"):
            DirectedTopology.from_edges(1, 2, [[1, 2, 1.0], [1, 3]])

    def test_edge_into_leader_rejected(self):
        with pytest.raises(TopologyError, match="leader"):
            DirectedTopology.from_edges(2, 1, [[3, 1, 1.0]])

    def test_out_of_range_agent(self):
        with pytest.raises(TopologyError, match="outside"):
            DirectedTopology.from_edges(1, 1, [[1, 5, 1.0]])

    def test_negative_weight(self):
        with pytest.raises(TopologyError, match="Negative"):
            DirectedTopology.from_edges(1, 1, [[1, 2, -0.5]])

    def test_self_loop(self):
        adj = np.zeros((2, 2))
        adj[1, 1] = 1.0
        with pytest.raises(TopologyError, match="Self-loop"):
            DirectedTopology(1, 1, adj)

    def test_needs_leaders_and_followers(self):
        with pytest.raises(TopologyError):
            DirectedTopology(0, 1, np.zeros((1, 1)))

    def test_relabel_preserves_spectrum(self, four_leader_ring):
        relabeled = four_leader_ring.relabel_followers([2, 0, 3, 1])
        a = np.sort_complex(np.linalg.eigvals(build_laplacian(four_leader_ring).l2))
        b = np.sort_complex(np.linalg.eigvals(build_laplacian(relabeled).l2))
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_relabel_permutes_blocks(self, four_leader_ring):
        order = [2, 0, 3, 1]
        P = np.eye(4)[order]
        before = build_laplacian(four_leader_ring)
        after = build_laplacian(four_leader_ring.relabel_followers(order))
        np.testing.assert_array_equal(after.l2, P @ before.l2 @ P.T)
        np.testing.assert_array_equal(after.l1, P @ before.l1)
        np.testing.assert_array_equal(after.follower_degrees, P @ before.follower_degrees)

    def test_relabel_rejects_non_permutation(self, segment_topology):
        with pytest.raises(ValueError):
            segment_topology.relabel_followers([0, 0])


class TestLaplacian:
    def test_four_leader_ring_blocks(self, four_leader_ring):
        blocks = build_laplacian(four_leader_ring)
        expected_l2 = np.array([
            [3, 0, 0, -1],
            [-1, 2, 0, 0],
            [0, -1, 3, 0],
            [0, 0, -1, 2],
        ], dtype=float)
        np.testing.assert_array_equal(blocks.l2, expected_l2)
        np.testing.assert_array_equal(blocks.l1[0], [-1, -1, 0, 0])
        np.testing.assert_allclose(blocks.laplacian.sum(axis=1), 0.0)

    def test_blocks_are_read_only(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        with pytest.raises(ValueError):
            blocks.l2[0, 0] = 5.0

    def test_segment_blocks(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        np.testing.assert_array_equal(blocks.l2, [[2, 0], [-1, 3]])
        np.testing.assert_array_equal(blocks.follower_degrees, [2, 3])


class TestReachability:
    def test_all_reachable(self, three_leader_ring):
        assert check_reachability(three_leader_ring) == (True, [])

    def test_unreachable_followers_listed(self):
        topo = DirectedTopology.from_edges(1, 3, [[1, 2, 1.0], [4, 3, 1.0], [3, 4, 1.0]])
        ok, unreachable = check_reachability(topo)
        assert not ok
        assert unreachable == [3, 4]

    def test_certify_topology_names_unreachable(self):
        topo = DirectedTopology.from_edges(1, 2, [[1, 2, 1.0]])
        with pytest.raises(CertificationError, match=r"\[3\]"):
            certify_topology(topo)


class TestSpectrum:
    def test_four_leader_ring_lambda_min(self, four_leader_ring):
        _, spectrum = certify_topology(four_leader_ring)
        assert spectrum.lambda_min_real == pytest.approx((5 - np.sqrt(5)) / 2, abs=1e-9)

    def test_three_leader_ring_normalized_spectrum(self, three_leader_ring):
        blocks = build_laplacian(three_leader_ring)
        lam_hat = np.sort_complex(normalized_spectrum(blocks))
        expected = np.sort_complex(np.array([0.5, 0.875 + 0.2165064j, 0.875 - 0.2165064j]))
        np.testing.assert_allclose(lam_hat, expected, atol=1e-6)

    def test_segment_normalized_spectrum(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        lam_hat = np.sort(normalized_spectrum(blocks).real)
        np.testing.assert_allclose(lam_hat, [2 / 3, 3 / 4], atol=1e-12)

    def test_containment_weights_convex(self, four_leader_ring):
        blocks, spectrum = certify_topology(four_leader_ring)
        W = containment_weights(blocks)
        assert W.shape == (4, 4)
        assert W.min() >= -1e-12
        np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(spectrum.containment_weights, W)

    def test_spectrum_report_to_dict(self, segment_topology):
        _, spectrum = certify_topology(segment_topology)
        data = spectrum.to_dict()
        assert data["lambda_min_real"] == pytest.approx(2.0)
        assert data["gershgorin_margin"] == pytest.approx(2 / 3)

    def test_gershgorin_margin_positive(self, three_leader_ring):
        blocks = build_laplacian(three_leader_ring)
        report = certify_spectrum(blocks)
        assert 0.0 < report.gershgorin_margin <= 1.0

    @pytest.mark.parametrize("seed", range(100))
    def test_random_reachable_topologies_certify(self, seed):
        rng = np.random.default_rng(seed)
        topo = random_topology(
            int(rng.integers(1, 5)), int(rng.integers(1, 9)),
            density=float(rng.uniform(0.0, 0.6)), seed=seed,
        )
        assert check_reachability(topo)[0]
        blocks, spectrum = certify_topology(topo)
        assert spectrum.lambda_min_real > 0
        assert spectrum.weight_min >= -1e-10
        assert np.max(np.abs(1.0 - spectrum.normalized_eigenvalues)) < 1.0

    def test_random_topology_is_seeded(self):
        a = random_topology(3, 5, seed=4)
        b = random_topology(3, 5, seed=4)
        np.testing.assert_array_equal(a.adjacency, b.adjacency)


class TestWeighting:
    def test_modes(self):
        assert get_weighting_modes() == ["normalized", "uniform"]

    def test_normalized_scale(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        np.testing.assert_allclose(input_scale(blocks), [1 / 3, 1 / 4])

    def test_uniform_scale(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        np.testing.assert_allclose(input_scale(blocks, "uniform", 0.3), [0.3, 0.3])

    def test_uniform_needs_mu_in_unit_interval(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        with pytest.raises(ValueError, match="mu"):
            input_scale(blocks, "uniform", 1.5)

    def test_invalid_weighting(self, segment_topology):
        blocks = build_laplacian(segment_topology)
        with pytest.raises(ValueError, match="Invalid weighting"):
            input_scale(blocks, "harmonic")

    def test_choose_uniform_mu(self):
        mu, radius = choose_uniform_mu(np.array([2.0, 3.0]))
        assert mu == pytest.approx(0.4, abs=1e-3)
        assert radius == pytest.approx(0.2, abs=2e-3)
