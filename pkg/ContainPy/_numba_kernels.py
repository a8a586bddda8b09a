"""
Numba-Accelerated Kernels for Containment Analysis
==================================================

JIT-compiled hot loops used by the geometry and signal modules.

The kernels handle:
    - Minimum-norm point of a convex hull (Wolfe's active-set method)
    - Batched point-to-hull distances over followers and time samples
    - Barycentric grid sampling of segments and triangles (test oracle)
    - Binomial finite differences of sampled series

Authors: ContainPy Development Team
Version: 0.1.0
"""

import numpy as np
from numba import njit, prange


# Weights at or below this value are dropped from the active set
ACTIVE_WEIGHT_EPS = 1e-13


@njit(cache=True)
def _dot(a, b):
    total = 0.0
    for i in range(a.shape[0]):
        total += a[i] * b[i]
    return total


# =============================================================================
# MINIMUM-NORM POINT
# =============================================================================

@njit(cache=True)
def _affine_minimizer(Y, members, count):
    """
    Weights of the minimum-norm point of the affine hull of Y[members].

    Solves the KKT system [G 1; 1^T 0][v; nu] = [0; 1] with G the Gram
    matrix of the active points. Least squares keeps the solve defined
    when the active points are nearly affinely dependent.
    """
    n = count + 1
    kkt = np.zeros((n, n))
    rhs = np.zeros(n)
    for a in range(count):
        ya = Y[members[a]]
        for b in range(a, count):
            g = _dot(ya, Y[members[b]])
            kkt[a, b] = g
            kkt[b, a] = g
        kkt[a, count] = 1.0
        kkt[count, a] = 1.0
    rhs[count] = 1.0
    sol = np.linalg.lstsq(kkt, rhs)[0]
    return sol[:count]


@njit(cache=True)
def min_norm_point(Y, tol, max_iter):
    """
    Minimum-norm point of conv(rows of Y).

    Args:
        Y: (M, p) array, one point per row
        tol: relative optimality tolerance (scaled by max |y_i|^2)
        max_iter: cap on major plus minor iterations

    Returns:
        x: (p,) minimum-norm point
        weights: (M,) convex weights with x = weights @ Y
        gap: optimality gap x.x - min_i y_i.x (>= 0 up to rounding)
        iterations: iterations used
    """
    M, p = Y.shape
    members = np.empty(M, dtype=np.int64)
    lam = np.zeros(M)
    in_set = np.zeros(M, dtype=np.bool_)

    scale = 0.0
    start = 0
    best = np.inf
    for i in range(M):
        nrm = _dot(Y[i], Y[i])
        if nrm > scale:
            scale = nrm
        if nrm < best:
            best = nrm
            start = i
    if scale == 0.0:
        scale = 1.0

    members[0] = start
    lam[0] = 1.0
    in_set[start] = True
    count = 1
    x = Y[start].copy()

    iterations = 0
    while iterations < max_iter:
        iterations += 1

        # Major cycle: most violated supporting direction
        j = -1
        lowest = np.inf
        for i in range(M):
            d = _dot(Y[i], x)
            if d < lowest:
                lowest = d
                j = i
        if _dot(x, x) - lowest <= tol * scale:
            break
        if in_set[j]:
            # stalled at rounding level
            break

        members[count] = j
        lam[count] = 0.0
        in_set[j] = True
        count += 1

        # Minor cycles: move towards the affine minimizer, dropping points
        while iterations < max_iter:
            v = _affine_minimizer(Y, members, count)
            interior = True
            for a in range(count):
                if v[a] <= ACTIVE_WEIGHT_EPS:
                    interior = False
                    break
            if interior:
                for a in range(count):
                    lam[a] = v[a]
                break

            iterations += 1
            theta = 1.0
            for a in range(count):
                if v[a] <= ACTIVE_WEIGHT_EPS:
                    denom = lam[a] - v[a]
                    if denom > 0.0:
                        t = lam[a] / denom
                        if t < theta:
                            theta = t
            keep = 0
            heaviest = 0
            for a in range(count):
                lam[a] = (1.0 - theta) * lam[a] + theta * v[a]
                if lam[a] > lam[heaviest]:
                    heaviest = a
            for a in range(count):
                if lam[a] > ACTIVE_WEIGHT_EPS or a == heaviest:
                    members[keep] = members[a]
                    lam[keep] = lam[a]
                    keep += 1
                else:
                    in_set[members[a]] = False
            count = keep

        total = 0.0
        for a in range(count):
            total += lam[a]
        for k in range(p):
            x[k] = 0.0
        for a in range(count):
            lam[a] /= total
            row = Y[members[a]]
            for k in range(p):
                x[k] += lam[a] * row[k]

    weights = np.zeros(M)
    for a in range(count):
        weights[members[a]] = lam[a]

    lowest = np.inf
    for i in range(M):
        d = _dot(Y[i], x)
        if d < lowest:
            lowest = d
    gap = _dot(x, x) - lowest
    return x, weights, gap, iterations


@njit(parallel=True, cache=True)
def hull_distances_paired(points, vertices, tol, max_iter):
    """
    Distance of every point to its own hull.

    Args:
        points: (N, p) query points
        vertices: (N, M, p) hull vertices paired with each point

    Returns:
        distances: (N,)
        nearest: (N, p) closest hull points
        weights: (N, M) convex weights of the closest points
        gaps: (N,) optimality gaps
    """
    N, p = points.shape
    M = vertices.shape[1]
    distances = np.empty(N)
    nearest = np.empty((N, p))
    weights = np.empty((N, M))
    gaps = np.empty(N)

    for n in prange(N):
        Y = np.empty((M, p))
        for i in range(M):
            for k in range(p):
                Y[i, k] = vertices[n, i, k] - points[n, k]
        x, w, gap, _ = min_norm_point(Y, tol, max_iter)
        distances[n] = np.sqrt(_dot(x, x))
        for k in range(p):
            nearest[n, k] = points[n, k] + x[k]
        for i in range(M):
            weights[n, i] = w[i]
        gaps[n] = gap
    return distances, nearest, weights, gaps


# =============================================================================
# GRID ORACLE
# =============================================================================

@njit(cache=True)
def grid_hull_distance(point, vertices, resolution):
    """
    Brute-force distance to the hull of at most three vertices.

    Samples the barycentric grid with step 1/resolution. The result
    over-estimates the true distance by at most diam(hull)/resolution.
    """
    M, p = vertices.shape
    best = np.inf
    if M == 1:
        total = 0.0
        for k in range(p):
            d = vertices[0, k] - point[k]
            total += d * d
        return np.sqrt(total)

    third = M == 3
    for i in range(resolution + 1):
        upper = resolution - i if third else 0
        for j in range(upper + 1):
            w0 = i / resolution
            w2 = j / resolution
            w1 = 1.0 - w0 - w2
            total = 0.0
            for k in range(p):
                q = w0 * vertices[0, k] + w1 * vertices[1, k]
                if third:
                    q += w2 * vertices[2, k]
                d = q - point[k]
                total += d * d
            if total < best:
                best = total
    return np.sqrt(best)


# =============================================================================
# FINITE DIFFERENCES
# =============================================================================

@njit(cache=True)
def binomial_difference_kernel(series, n, k):
    """
    Sum over i = 0..n of (-1)^i C(n, i) series[k + n - i].

    Args:
        series: (T, p) sampled values
        n: difference order
        k: base index, requires k + n < T
    """
    p = series.shape[1]
    out = np.zeros(p)
    coeff = 1.0
    for i in range(n + 1):
        sign = 1.0 if i % 2 == 0 else -1.0
        for c in range(p):
            out[c] += sign * coeff * series[k + n - i, c]
        coeff = coeff * (n - i) / (i + 1)
    return out
