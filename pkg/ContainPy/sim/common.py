"""
Closed-Loop Setup
=================

Pieces shared by the continuous and discrete simulators: gain resolution,
polynomial chain tensors, lifted initial states, sampled metrics and
decay fitting.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from ..core.errors import CertificationError
from ..core.geometry import hull_distances
from ..core.signals import VectorPolynomial, derivative_chain
from ..core.synthesis import (
    CompanionPlant,
    EstimatorGainSynthesis,
    GainSynthesis,
    companion_plant,
    follower_weights,
    gain_to_kappa,
    synthesize_estimator,
    synthesize_gains,
    verify_closed_loop,
)
from ..core.topology import (
    LaplacianBlocks,
    SpectrumReport,
    Weighting,
    certify_topology,
    choose_uniform_mu,
)
from ..core.utils import DEFAULT_TOLERANCES, Tolerances

if TYPE_CHECKING:
    from ..harness.scenario import Scenario


# =============================================================================
# GAIN RESOLUTION
# =============================================================================

@dataclass(frozen=True, eq=False)
class ClosedLoop:
    """
    Everything a simulator needs besides the scenario itself.

    ``K`` is the gain actually applied (explicit or synthesized);
    ``synthesis`` always holds the synthesized audit for the same plant.
    ``scale`` is the per-follower input weight (ones in continuous time).
    """

    blocks: LaplacianBlocks
    spectrum: SpectrumReport
    plant: CompanionPlant
    K: np.ndarray
    margin: float
    synthesis: GainSynthesis
    estimator: Optional[EstimatorGainSynthesis]
    scale: np.ndarray
    weighting: Optional[str]
    mu: Optional[float]
    explicit_gains: bool

    @property
    def kappa(self) -> np.ndarray:
        return gain_to_kappa(self.K)

    @property
    def certified(self) -> bool:
        est_ok = self.estimator is None or self.estimator.certified
        return self.margin > 0 and est_ok


def prepare_closed_loop(
    scenario: "Scenario",
    tolerances: Optional[Tolerances] = None,
    weighting: Optional[Weighting] = None,
    mu: Optional[float] = None,
) -> ClosedLoop:
    """
    Certify the topology and resolve the controller (and estimator) gains.

    ``weighting`` and ``mu`` override the discrete input weighting implied
    by the scenario.

    Raises
    ------
    CertificationError
        If the topology fails certification or no uniform gain mu keeps the
        weighted spectrum inside the unit disk centred at 1.
    """
    tol = tolerances or getattr(scenario, "tolerances", None) or DEFAULT_TOLERANCES
    blocks, spectrum = certify_topology(scenario.topology, tol)
    q = scenario.lifted_order
    mode = scenario.domain
    if mode == "discrete":
        weighting = weighting or scenario.weighting
    else:
        weighting = None

    if weighting == "uniform":
        mu = scenario.mu if mu is None else mu
        if mu is None or mu == "auto":
            mu, radius = choose_uniform_mu(spectrum.eigenvalues)
            if radius >= 1.0:
                raise CertificationError(
                    f"No uniform gain mu in (0, 1) gives max |1 - mu lambda| < 1 (best {radius:.4f})"
                )
        mu = float(mu)
    else:
        mu = None

    synthesis = synthesize_gains(
        blocks, spectrum, q, mode, weighting or "normalized", mu, tolerances=tol
    )
    plant = companion_plant(q, mode)

    explicit = not isinstance(scenario.gains, str)
    if explicit:
        K = np.asarray(scenario.gains, dtype=np.float64).reshape(-1)
        margin = verify_closed_loop(blocks, plant, K, weighting or "normalized", mu)
    else:
        K = synthesis.K
        margin = synthesis.margin

    estimator = None
    if scenario.uses_estimator:
        estimator = synthesize_estimator(
            blocks, spectrum, scenario.follower_order, mode, tolerances=tol
        )

    return ClosedLoop(
        blocks=blocks,
        spectrum=spectrum,
        plant=plant,
        K=K,
        margin=float(margin),
        synthesis=synthesis,
        estimator=estimator,
        scale=follower_weights(blocks, mode, weighting or "normalized", mu),
        weighting=weighting,
        mu=mu,
        explicit_gains=explicit,
    )


# =============================================================================
# POLYNOMIAL CHAINS
# =============================================================================

def chain_coefficients(polys: List[VectorPolynomial], orders: int, discrete: bool) -> np.ndarray:
    """
    Coefficient tensor (degree + 1, agents, orders, p) of
    [x, D x, ..., D^{orders-1} x] for each polynomial.
    """
    degree = max(poly.degree for poly in polys)
    p = polys[0].dimension
    out = np.zeros((degree + 1, len(polys), orders, p))
    for a, poly in enumerate(polys):
        for s, term in enumerate(derivative_chain(poly, orders, discrete)):
            out[: term.degree + 1, a, s] = term.coefficients
    return out


def tensor_eval(coeffs: np.ndarray, t: float) -> np.ndarray:
    """Horner evaluation of a coefficient tensor along its first axis."""
    out = coeffs[-1].copy()
    for j in range(coeffs.shape[0] - 2, -1, -1):
        out *= t
        out += coeffs[j]
    return out


def tensor_eval_many(coeffs: np.ndarray, times) -> np.ndarray:
    """Horner evaluation at many times; returns (T,) + coeffs.shape[1:]."""
    t = np.asarray(times, dtype=np.float64)
    shape = (t.size,) + (1,) * (coeffs.ndim - 1)
    t = t.reshape(shape)
    out = np.broadcast_to(coeffs[-1], (t.shape[0],) + coeffs.shape[1:]).copy()
    for j in range(coeffs.shape[0] - 2, -1, -1):
        out = out * t + coeffs[j]
    return out


def leader_input_coefficients(blocks: LaplacianBlocks, chain: np.ndarray, orders: int) -> np.ndarray:
    """
    Coefficients of -L1 applied to the first ``orders`` leader chain entries,
    i.e. the leader part of every follower's relative-error chain.
    """
    out = np.tensordot(-blocks.l1, chain[:, :, :orders], axes=([1], [1]))
    return np.ascontiguousarray(np.moveaxis(out, 0, 1))


def disturbance_polynomials(scenario: "Scenario") -> Optional[List[VectorPolynomial]]:
    """Per-follower disturbances, or None when absent or all zero."""
    dist = getattr(scenario, "disturbances", None)
    if not dist or all(d.is_zero() for d in dist):
        return None
    if scenario.follower_order != 1:
        raise ValueError("Disturbances are only supported for single-integrator followers")
    return list(dist)


# =============================================================================
# LIFTED STATE
# =============================================================================

def lifted_initial_state(
    loop: ClosedLoop,
    positions0: np.ndarray,
    accumulators0: np.ndarray,
    leader_chain0: np.ndarray,
    disturbance_chain0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Shifted lifted state Xi_hat_F at the initial instant, shape (N, q, p).

    Entries below the follower order are the follower chain itself. Higher
    entries are derivatives (differences) of the applied input, expanded
    through the control law: D^r x_i = scale_i sum_l kappa_l D^{r-1-l} e_i,
    where negative orders are the integral accumulators. A disturbance on
    single integrators adds D^{r-1} delta_i.
    """
    blocks = loop.blocks
    N, m, p = positions0.shape
    q = loop.plant.order
    kappa = loop.kappa
    xi = np.zeros((N, q, p))
    xi[:, :m] = positions0

    for r in range(m, q):
        total = np.zeros((N, p))
        for l in range(q):
            s = r - l - 1
            if s >= 0:
                term = -blocks.l1 @ leader_chain0[:, s] - blocks.l2 @ xi[:, s]
            else:
                term = accumulators0[:, -s - 1]
            total += kappa[l] * term
        xi[:, r] = loop.scale[:, None] * total
        if disturbance_chain0 is not None:
            xi[:, r] += disturbance_chain0[:, r - 1]

    weights = loop.spectrum.containment_weights
    return xi - np.tensordot(weights, leader_chain0, axes=1)


def recover_positions(loop: ClosedLoop, xi_hat0: np.ndarray, leader_positions: np.ndarray) -> np.ndarray:
    """Follower positions from the first lifted component: xi_hat + W x_L."""
    return xi_hat0 + np.einsum("nm,tmp->tnp", loop.spectrum.containment_weights, leader_positions)


# =============================================================================
# METRICS
# =============================================================================

def sampled_metrics(positions: np.ndarray, leader_positions: np.ndarray, weights: np.ndarray):
    """
    Hull distances (T, N), containment error (T,) and tracking error (T,)
    of sampled trajectories.
    """
    dist = hull_distances(positions, leader_positions)
    targets = np.einsum("nm,tmp->tnp", weights, leader_positions)
    T = positions.shape[0]
    tracking = np.linalg.norm((positions - targets).reshape(T, -1), axis=1)
    return dist, dist.sum(axis=1), tracking


def cross_validation_gap(agent_positions: np.ndarray, lifted_positions: np.ndarray) -> float:
    """Largest position difference between two simulations of one scenario."""
    return float(np.max(np.abs(agent_positions - lifted_positions)))


@dataclass(frozen=True)
class DecayFit:
    """
    Least-squares fit log y = log C - beta t over the second half of a run.

    ``decaying`` is set when the fitted slope is below the tolerance or the
    series reached the numerical floor.
    """

    C: float
    beta: float
    slope: float
    samples: int
    reached_floor: bool
    decaying: bool

    @property
    def ratio(self) -> float:
        """Per-unit-time contraction factor exp(-beta)."""
        return float(np.exp(-self.beta))

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "beta": self.beta,
            "slope": self.slope,
            "samples": self.samples,
            "reached_floor": self.reached_floor,
            "decaying": self.decaying,
        }


def fit_decay(
    times,
    values,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> DecayFit:
    """
    Fit an exponential envelope C exp(-beta t) to a nonnegative series.

    Only samples of the second half above ``tolerances.decay_floor`` enter
    the fit.
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    half = t.size // 2
    t_tail, y_tail = t[half:], y[half:]
    keep = y_tail > tolerances.decay_floor
    reached_floor = bool(y.size) and bool(y[-1] <= tolerances.decay_floor)

    if np.count_nonzero(keep) < 2:
        return DecayFit(
            C=float(y[0]) if y.size else 0.0,
            beta=np.inf,
            slope=-np.inf,
            samples=int(np.count_nonzero(keep)),
            reached_floor=reached_floor,
            decaying=reached_floor,
        )

    slope, intercept = np.polyfit(t_tail[keep], np.log(y_tail[keep]), 1)
    return DecayFit(
        C=float(np.exp(intercept)),
        beta=float(-slope),
        slope=float(slope),
        samples=int(np.count_nonzero(keep)),
        reached_floor=reached_floor,
        decaying=bool(slope < tolerances.decay_slope or reached_floor),
    )


def time_grid(horizon: float, dt: float, sample_dt: Optional[float]):
    """
    Number of steps and sampling stride of a fixed-step run.

    Raises
    ------
    ValueError
        If the step or the horizon is not positive.
    """
    if not dt or dt <= 0:
        raise ValueError(f"Step size must be positive, got {dt}")
    if not horizon or horizon <= 0:
        raise ValueError(f"Horizon must be positive, got {horizon}")
    steps = int(round(horizon / dt))
    stride = 1 if not sample_dt else max(1, int(round(sample_dt / dt)))
    return steps, stride


# =============================================================================
# SCENARIO PLUMBING
# =============================================================================

def check_initial_states(scenario: "Scenario") -> np.ndarray:
    x0 = np.asarray(scenario.initial_states, dtype=np.float64)
    N = scenario.topology.num_followers
    shape = (N, scenario.follower_order, scenario.dimension)
    if x0.shape != shape:
        raise ValueError(f"Initial follower states must have shape {shape}, got {x0.shape}")
    return x0


def estimator_start(scenario: "Scenario", x0: np.ndarray) -> np.ndarray:
    """
    Initial estimator chains.

    ``"exact"`` starts every estimator on the true chain; a number s adds
    s times a seeded standard normal perturbation.
    """
    init = getattr(scenario, "estimator_init", "exact")
    if init is None or init == "exact":
        return x0.copy()
    rng = np.random.default_rng(scenario.seed)
    return x0 + float(init) * rng.standard_normal(x0.shape)


def trace_attrs(scenario: "Scenario", loop: ClosedLoop) -> dict:
    """Run metadata stored in trace attributes."""
    attrs = {
        "scenario": scenario.name,
        "follower_order": scenario.follower_order,
        "trajectory_order": scenario.trajectory_order,
        "lifted_order": loop.plant.order,
        "gains": loop.K,
        "explicit_gains": loop.explicit_gains,
        "stability_margin": loop.margin,
        "epsilon": loop.synthesis.epsilon,
        "seed": scenario.seed,
        "horizon": float(scenario.horizon),
    }
    if scenario.domain == "continuous":
        attrs["dt"] = float(scenario.dt)
    if loop.estimator is not None:
        attrs["estimator_gain"] = loop.estimator.K_e
        attrs["estimator_margin"] = loop.estimator.margin
    if loop.weighting is not None:
        attrs["weighting"] = loop.weighting
    if loop.mu is not None:
        attrs["mu"] = loop.mu
    return attrs

