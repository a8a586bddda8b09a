"""Shared fixtures and the exact hull-distance oracle used across the suite."""

from itertools import combinations

import numpy as np
import pytest

from ContainPy.core.topology import DirectedTopology


def exact_hull_distance(point, leaders) -> float:
    """
    Hull distance by face enumeration.

    Every vertex subset of size <= p + 1 is projected onto its affine hull;
    projections with nonnegative barycentric weights are hull points, and the
    closest of them is the answer.
    """
    x = np.asarray(point, dtype=np.float64)
    V = np.asarray(leaders, dtype=np.float64)
    p = x.size
    best = np.inf
    for size in range(1, min(p + 1, V.shape[0]) + 1):
        for subset in combinations(range(V.shape[0]), size):
            pts = V[list(subset)]
            if size == 1:
                best = min(best, float(np.linalg.norm(pts[0] - x)))
                continue
            basis = (pts[1:] - pts[0]).T
            coef, *_ = np.linalg.lstsq(basis, x - pts[0], rcond=None)
            weights = np.concatenate([[1.0 - coef.sum()], coef])
            if np.all(weights >= -1e-12):
                best = min(best, float(np.linalg.norm(pts[0] + basis @ coef - x)))
    return best


@pytest.fixture
def hull_oracle():
    return exact_hull_distance


@pytest.fixture
def segment_topology():
    """Two leaders, two followers; follower 4 also hears follower 3."""
    return DirectedTopology.from_edges(2, 2, [
        [1, 3, 1], [2, 3, 1],
        [1, 4, 1], [2, 4, 1], [3, 4, 1],
    ])


@pytest.fixture
def three_leader_ring():
    return DirectedTopology.from_edges(3, 3, [
        [1, 4, 1], [2, 4, 1], [6, 4, 1],
        [2, 5, 1], [3, 5, 1], [4, 5, 1],
        [3, 6, 1], [1, 6, 1], [5, 6, 1],
    ])


@pytest.fixture
def four_leader_ring():
    return DirectedTopology.from_edges(4, 4, [
        [1, 5, 1], [2, 5, 1], [8, 5, 1],
        [2, 6, 1], [5, 6, 1],
        [3, 7, 1], [4, 7, 1], [6, 7, 1],
        [4, 8, 1], [7, 8, 1],
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
