"""
Containment Geometry
====================

Distances from follower positions to the convex hull spanned by the
leaders, and the containment error built from them.

The closest hull point is the minimum-norm point of conv(x_j - x) over the
leader positions x_j, found with Wolfe's active-set method in
``_numba_kernels``. Every answer carries its convex weights and the
first-order optimality gap, so callers can check the result.

Authors: ContainPy Development Team
Version: 0.1.0
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .._numba_kernels import grid_hull_distance, hull_distances_paired, min_norm_point
from .errors import ConditioningWarning
from .utils import DEFAULT_TOLERANCES, Tolerances, as_vector


# Wolfe solver stopping tolerance, relative to max |x_j - x|^2
SOLVER_TOLERANCE = 1e-14


def _max_iterations(num_leaders: int) -> int:
    return 100 * (num_leaders + 1)


@dataclass(frozen=True, eq=False)
class HullProjection:
    """
    Closest point of the leader hull to a query point.

    ``weights`` are the convex weights of ``nearest`` over the leaders and
    ``gap`` the optimality gap of the projection (zero at the optimum).
    """

    distance: float
    weights: np.ndarray
    nearest: np.ndarray
    gap: float
    certified: bool


def _as_points(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty (count, p) array, got shape {arr.shape}")
    return arr


def hull_distance(
    point,
    leaders,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> HullProjection:
    """
    Euclidean distance from a point to conv(leaders).

    Parameters
    ----------
    point : array-like
        Query point in R^p.
    leaders : array-like
        ``(M, p)`` leader positions; coincident or collinear leaders are fine.
    tolerances : Tolerances
        ``hull_optimality`` bounds the accepted optimality gap relative to
        the squared spread of the leaders around the point.

    Returns
    -------
    HullProjection

    Examples
    --------
    >>> hull_distance([3.0, 4.0], [[0.0, 0.0]]).distance
    5.0
    """
    x = as_vector(point, name="point")
    V = _as_points(leaders, "leaders")
    if V.shape[1] != x.size:
        raise ValueError(f"Point has {x.size} components but leaders have {V.shape[1]}")

    Y = np.ascontiguousarray(V - x)
    step, weights, gap, _ = min_norm_point(Y, SOLVER_TOLERANCE, _max_iterations(V.shape[0]))
    scale = max(1.0, float(np.max(np.sum(Y * Y, axis=1))))
    certified = bool(
        gap <= tolerances.hull_optimality * scale
        and abs(weights.sum() - 1.0) <= tolerances.hull_weight
        and weights.min() >= -tolerances.hull_weight
    )
    if not certified:
        warnings.warn(
            f"Hull projection not certified (gap {gap:.3e})", ConditioningWarning, stacklevel=2
        )
    return HullProjection(
        distance=float(np.sqrt(step @ step)),
        weights=weights,
        nearest=x + step,
        gap=float(gap),
        certified=certified,
    )


def hull_distances(positions, leaders) -> np.ndarray:
    """
    Distances of several points to hulls.

    Parameters
    ----------
    positions : array-like
        ``(..., N, p)`` follower positions.
    leaders : array-like
        ``(..., M, p)`` leader positions with the same leading shape, or a
        single ``(M, p)`` snapshot shared by every sample.

    Returns
    -------
    np.ndarray
        ``(..., N)`` distances.
    """
    X = np.asarray(positions, dtype=np.float64)
    L = np.asarray(leaders, dtype=np.float64)
    lead_shape = X.shape[:-2]
    N, p = X.shape[-2:]
    M = L.shape[-2]
    L = np.broadcast_to(L, lead_shape + (M, p))

    # Pair each follower with the leader snapshot of its sample
    pts = np.ascontiguousarray(X.reshape(-1, p))
    verts = np.ascontiguousarray(
        np.broadcast_to(L[..., None, :, :], lead_shape + (N, M, p)).reshape(-1, M, p)
    )
    dist, _, _, _ = hull_distances_paired(pts, verts, SOLVER_TOLERANCE, _max_iterations(M))
    return dist.reshape(lead_shape + (N,))


def containment_error(positions, leaders) -> float:
    """
    Sum over followers of the distance to the leader hull.

    Parameters
    ----------
    positions : array-like
        ``(N, p)`` follower positions at one instant.
    leaders : array-like
        ``(M, p)`` leader positions at the same instant.
    """
    return float(np.sum(hull_distances(_as_points(positions, "positions"), _as_points(leaders, "leaders"))))


def containment_error_series(positions, leaders) -> np.ndarray:
    """
    Containment error at every sample.

    ``positions`` is ``(T, N, p)``, ``leaders`` is ``(T, M, p)``; returns (T,).
    """
    return hull_distances(positions, leaders).sum(axis=-1)


def grid_oracle_distance(point, leaders, resolution: int = 1000) -> float:
    """
    Brute-force hull distance over a barycentric grid (at most 3 leaders).

    Over-estimates the exact value by at most diam(hull) / resolution.
    """
    V = _as_points(leaders, "leaders")
    if V.shape[0] > 3:
        raise ValueError(f"Grid oracle supports at most 3 leaders, got {V.shape[0]}")
    x = np.ascontiguousarray(np.asarray(point, dtype=np.float64).reshape(-1))
    return float(grid_hull_distance(x, V, int(resolution)))
