"""
Signals
=======

Polynomial trajectories and disturbances, derivative and difference
operators, waypoint interpolation and seeded white-noise sources.

A ``VectorPolynomial`` stores coefficients a_0..a_n (each in R^p) as an
``(n + 1, p)`` array, lowest order first. The same type carries leader
trajectories x(t) = sum a_j t^j and polynomial disturbances
delta(t) = sum b_j t^j. In discrete time t is the integer step k.

Authors: ContainPy Development Team
Version: 0.1.0
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.special import comb

from .._numba_kernels import binomial_difference_kernel
from .errors import ConditioningWarning
from .utils import DEFAULT_TOLERANCES


# =============================================================================
# POLYNOMIALS
# =============================================================================

@dataclass(frozen=True, eq=False)
class VectorPolynomial:
    """
    Polynomial curve in R^p.

    Parameters
    ----------
    coefficients : array-like
        ``(n + 1, p)`` coefficients, ``coefficients[j]`` multiplies t^j.
        A 1D input is read as a scalar (p = 1) polynomial.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.float64, copy=True)
        if coeffs.ndim == 1:
            coeffs = coeffs.reshape(-1, 1)
        if coeffs.ndim != 2 or coeffs.shape[0] < 1 or coeffs.shape[1] < 1:
            raise ValueError(
                f"Polynomial coefficients must be a non-empty (n+1, p) array, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("Polynomial coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def dimension(self) -> int:
        return self.coefficients.shape[1]

    @classmethod
    def zero(cls, dimension: int) -> "VectorPolynomial":
        return cls(np.zeros((1, dimension)))

    @classmethod
    def from_dict(cls, data: dict) -> "VectorPolynomial":
        """Parse the ``{"coeffs": [[...], ...]}`` scenario form."""
        return cls(np.asarray(data["coeffs"], dtype=np.float64))

    def to_dict(self) -> dict:
        return {"coeffs": self.coefficients.tolist()}

    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def __call__(self, t):
        return poly_eval(self, t)


def poly_eval(poly: VectorPolynomial, t) -> np.ndarray:
    """
    Evaluate a polynomial by Horner's scheme.

    Parameters
    ----------
    poly : VectorPolynomial
    t : float or array-like
        Time (or step index). An array of shape (T,) returns (T, p).

    Returns
    -------
    np.ndarray
        ``(p,)`` for scalar t, ``(T, p)`` otherwise.
    """
    coeffs = poly.coefficients
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.ndim == 0:
        out = coeffs[-1].copy()
        for j in range(poly.degree - 1, -1, -1):
            out = out * float(t_arr) + coeffs[j]
        return out
    t_col = t_arr.reshape(-1, 1)
    out = np.broadcast_to(coeffs[-1], (t_col.shape[0], poly.dimension)).copy()
    for j in range(poly.degree - 1, -1, -1):
        out = out * t_col + coeffs[j]
    return out


def poly_derivative(poly: VectorPolynomial, order: int = 1) -> VectorPolynomial:
    """
    Exact q-th derivative. Differentiating past the degree gives the zero
    polynomial of degree 0.
    """
    if order < 0:
        raise ValueError(f"Derivative order must be >= 0, got {order}")
    coeffs = poly.coefficients
    for _ in range(order):
        if coeffs.shape[0] == 1:
            return VectorPolynomial.zero(poly.dimension)
        powers = np.arange(1, coeffs.shape[0], dtype=np.float64).reshape(-1, 1)
        coeffs = powers * coeffs[1:]
    return VectorPolynomial(coeffs)


def _difference_matrix(degree: int) -> np.ndarray:
    """Map a_0..a_n of p(k) to the coefficients of p(k+1) - p(k)."""
    j = np.arange(degree + 1)
    mat = comb(j[None, :], j[:, None])
    return np.triu(mat, k=1)


def poly_forward_difference(poly: VectorPolynomial, order: int = 1) -> VectorPolynomial:
    """
    Exact q-th forward difference of a polynomial in the step k, where
    (Delta x)[k] = x[k+1] - x[k].

    Examples
    --------
    >>> poly_forward_difference(VectorPolynomial([0.0, 0.0, 1.0])).coefficients.ravel()
    array([1., 2.])
    """
    if order < 0:
        raise ValueError(f"Difference order must be >= 0, got {order}")
    coeffs = poly.coefficients
    for _ in range(order):
        if coeffs.shape[0] == 1:
            return VectorPolynomial.zero(poly.dimension)
        coeffs = (_difference_matrix(coeffs.shape[0] - 1) @ coeffs)[:-1]
    return VectorPolynomial(coeffs)


def poly_antiderivative(poly: VectorPolynomial) -> VectorPolynomial:
    """Antiderivative vanishing at t = 0."""
    coeffs = poly.coefficients
    powers = np.arange(1, coeffs.shape[0] + 1, dtype=np.float64).reshape(-1, 1)
    out = np.vstack([np.zeros((1, poly.dimension)), coeffs / powers])
    return VectorPolynomial(out)


def poly_running_sum(poly: VectorPolynomial) -> VectorPolynomial:
    """
    Discrete inverse difference S[k] = sum_{s<k} x[s].

    S is the unique polynomial with Delta S = x and S[0] = 0.
    """
    n = poly.degree
    # Columns: k^1..k^{n+1}. Rows: coefficients of Delta k^j in k^0..k^n.
    full = _difference_matrix(n + 1)
    upper = full[: n + 1, 1:]
    rest = scipy.linalg.solve_triangular(upper, poly.coefficients, lower=False)
    return VectorPolynomial(np.vstack([np.zeros((1, poly.dimension)), rest]))


def poly_add(a: VectorPolynomial, b: VectorPolynomial) -> VectorPolynomial:
    if a.dimension != b.dimension:
        raise ValueError(f"Dimension mismatch: {a.dimension} vs {b.dimension}")
    size = max(a.degree, b.degree) + 1
    out = np.zeros((size, a.dimension))
    out[: a.degree + 1] += a.coefficients
    out[: b.degree + 1] += b.coefficients
    return VectorPolynomial(out)


def poly_scale(poly: VectorPolynomial, factor: float) -> VectorPolynomial:
    return VectorPolynomial(float(factor) * poly.coefficients)


def derivative_chain(poly: VectorPolynomial, orders: int, discrete: bool = False) -> list:
    """[poly, D poly, ..., D^{orders-1} poly] with D a derivative or a difference."""
    op = poly_forward_difference if discrete else poly_derivative
    chain = [poly]
    for _ in range(orders - 1):
        chain.append(op(chain[-1], 1))
    return chain


# =============================================================================
# SAMPLED SERIES
# =============================================================================

def series_forward_difference(series, order: int = 1) -> np.ndarray:
    """Forward differences along axis 0; the result is ``order`` samples shorter."""
    return np.diff(np.asarray(series, dtype=np.float64), n=order, axis=0)


def series_running_sum(series) -> np.ndarray:
    """S[0] = 0, S[k] = sum_{s<k} x[s]; one sample longer than the input."""
    arr = np.asarray(series, dtype=np.float64)
    head = np.zeros((1,) + arr.shape[1:])
    return np.concatenate([head, np.cumsum(arr, axis=0)], axis=0)


def binomial_difference(series, n: int, k: int) -> np.ndarray:
    """
    Closed-form n-th forward difference at step k.

    Returns sum_{i=0..n} (-1)^i C(n, i) x[k + n - i]. Scalar series give a
    scalar result.

    Raises
    ------
    ValueError
        If the series is not defined on k..k+n.
    """
    arr = np.asarray(series, dtype=np.float64)
    scalar = arr.ndim == 1
    arr2 = np.ascontiguousarray(arr.reshape(arr.shape[0], -1))
    if n < 0 or k < 0 or k + n >= arr2.shape[0]:
        raise ValueError(
            f"Series of length {arr2.shape[0]} is not defined on {k}..{k + n}"
        )
    out = binomial_difference_kernel(arr2, int(n), int(k))
    return float(out[0]) if scalar else out


# =============================================================================
# INTERPOLATION
# =============================================================================

def interpolate_waypoints(
    times: Sequence[float],
    points,
    condition_limit: float = DEFAULT_TOLERANCES.interpolation_condition,
) -> VectorPolynomial:
    """
    Unique interpolating polynomial through the given waypoints.

    Newton divided differences are formed first and then expanded into
    monomial coefficients.

    Parameters
    ----------
    times : sequence of float
        Distinct node times.
    points : array-like
        ``(count, p)`` waypoint positions.
    condition_limit : float
        A ``ConditioningWarning`` is issued when the Vandermonde matrix of
        the nodes, mapped onto [-1, 1], is worse conditioned than this.

    Returns
    -------
    VectorPolynomial
        Degree ``count - 1`` interpolant.

    Raises
    ------
    ValueError
        If times are duplicated or the counts disagree.
    """
    t = np.asarray(times, dtype=np.float64).reshape(-1)
    y = np.asarray(points, dtype=np.float64)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    if t.size < 1 or y.shape[0] != t.size:
        raise ValueError(
            f"Need one waypoint per time: got {t.size} times and {y.shape[0]} points"
        )
    if np.unique(t).size != t.size:
        raise ValueError(f"Waypoint times must be distinct, got {t.tolist()}")

    if t.size > 1:
        center = 0.5 * (t.max() + t.min())
        half = 0.5 * (t.max() - t.min())
        cond = np.linalg.cond(np.vander((t - center) / half, increasing=True))
        if cond > condition_limit:
            warnings.warn(
                f"Waypoint interpolation is ill-conditioned (cond = {cond:.2e})",
                ConditioningWarning,
                stacklevel=2,
            )

    # Divided differences, in place
    count = t.size
    table = y.copy()
    for level in range(1, count):
        table[level:] = (table[level:] - table[level - 1:-1]) / (
            t[level:] - t[: count - level]
        ).reshape(-1, 1)

    # Expand c_0 + (t - t_0)(c_1 + (t - t_1)(c_2 + ...)) into monomials
    coeffs = table[-1:].copy()
    for j in range(count - 2, -1, -1):
        shifted = np.vstack([np.zeros((1, y.shape[1])), coeffs])
        shifted[:-1] -= t[j] * coeffs
        shifted[0] += table[j]
        coeffs = shifted
    return VectorPolynomial(coeffs)


# =============================================================================
# WHITE NOISE
# =============================================================================

Edge = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """
    Per-edge measurement noise rho_ji * eta_ji[k].

    Parameters
    ----------
    dimension : int
        Agent dimension p.
    intensities : dict
        Maps ``(j, i)`` (0-based: agent i measures agent j) to the diagonal
        of rho_ji, shape (p,). Missing edges are noise free.
    seed : int
        Base seed of every stream.
    stream : int
        Run index. Distinct runs draw independent noise.
    """

    dimension: int
    intensities: Dict[Edge, np.ndarray] = field(default_factory=dict)
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        clean = {}
        for edge, rho in self.intensities.items():
            diag = np.asarray(rho, dtype=np.float64).reshape(-1)
            if diag.size == 1:
                diag = np.full(self.dimension, float(diag[0]))
            if diag.size != self.dimension:
                raise ValueError(
                    f"Noise intensity on edge {edge} must have {self.dimension} entries"
                )
            if not np.all(np.isfinite(diag)) or np.any(diag < 0):
                raise ValueError(f"Noise intensity on edge {edge} must be finite and >= 0")
            diag.setflags(write=False)
            clean[(int(edge[0]), int(edge[1]))] = diag
        object.__setattr__(self, "intensities", clean)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", int(self.stream))

    def rho(self, edge: Edge) -> np.ndarray:
        return self.intensities.get(edge, np.zeros(self.dimension))

    def for_run(self, run: int) -> "NoiseModel":
        return replace(self, stream=int(run))

    @property
    def is_silent(self) -> bool:
        return all(not np.any(r) for r in self.intensities.values())


def noise_generator(model: NoiseModel, edge: Edge) -> np.random.Generator:
    """
    Counter-based generator for one edge stream.

    The Philox key is derived from (seed, stream, receiver, sender), so each
    stream is reproducible and independent of the order in which edges or
    runs are visited.
    """
    j, i = edge
    seq = np.random.SeedSequence(model.seed, spawn_key=(model.stream, int(i), int(j)))
    key = seq.generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def noise_table(model: NoiseModel, edge: Edge, steps: int, scaled: bool = True) -> np.ndarray:
    """
    Noise on one edge for steps 0..steps-1, shape (steps, p).

    Rows do not depend on ``steps``: a longer table extends a shorter one.
    With ``scaled=False`` the raw standard normal eta is returned.
    """
    eta = noise_generator(model, edge).standard_normal((int(steps), model.dimension))
    if not scaled:
        return eta
    return eta * model.rho(edge)


def sample_noise(model: NoiseModel, edge: Edge, k: int) -> np.ndarray:
    """rho_ji * eta_ji[k] for a single step."""
    return noise_table(model, edge, int(k) + 1)[int(k)]


def difference_noise_covariance(order: int, lag: int) -> np.ndarray:
    """
    Exact E(nu[k] nu[k + lag]^T) for nu = (eta, Delta eta, ..., Delta^n eta)
    built from scalar unit white noise.

    For p-dimensional noise the covariance is this matrix Kronecker I_p.
    Entries vanish for |lag| > order.
    """
    n = int(order)
    # row a holds the weights of eta[k+s] in Delta^a eta[k], s = 0..n
    weights = np.zeros((n + 1, n + 1))
    for a in range(n + 1):
        s = np.arange(a + 1)
        weights[a, : a + 1] = (-1.0) ** (a - s) * comb(a, s)

    cov = np.zeros((n + 1, n + 1))
    for s in range(n + 1):
        t = s - lag
        if 0 <= t <= n:
            cov += np.outer(weights[:, s], weights[:, t])
    return cov


def difference_noise_bound(order: int) -> float:
    """Largest Frobenius norm of the lagged covariance over 0 <= lag <= order."""
    return max(
        float(np.linalg.norm(difference_noise_covariance(order, lag)))
        for lag in range(order + 1)
    )
