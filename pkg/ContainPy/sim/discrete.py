"""
Discrete-Time Simulation
========================

Exact recursions of the sampled-data containment laws (sampling period 1):

    - PI^n law with 1/(1+d_i) or uniform mu input weighting
    - the same law with noisy relative measurements, as a Monte Carlo
      ensemble
    - PI^{q-m} D^{m-1} law for order-m followers, with exact differences or
      distributed difference estimators
    - the lifted recursion on Xi_hat_F (cross-check)

Running sums start from zero at k = 0. Leaders and disturbances are
evaluated from their polynomials at the integer steps.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from typing import TYPE_CHECKING, List, Literal, Optional

import dask
import numpy as np
from tqdm import tqdm

from ..core.console import print_config, print_info, print_section, print_success
from ..core.geometry import hull_distances
from ..core.signals import NoiseModel, noise_table
from ..core.topology import Weighting
from .common import (
    ClosedLoop,
    chain_coefficients,
    check_initial_states,
    disturbance_polynomials,
    estimator_start,
    leader_input_coefficients,
    lifted_initial_state,
    prepare_closed_loop,
    recover_positions,
    sampled_metrics,
    tensor_eval,
    tensor_eval_many,
    trace_attrs,
)
from .trace import ContainmentTrace, LiftedTrace, MonteCarloReport

if TYPE_CHECKING:
    from ..harness.scenario import Scenario


# Type alias for the information available to high-order followers
InfoMode = Literal["full", "estimator"]


def get_info_modes() -> list:
    """Return the supported information modes of the high-order law."""
    return ["full", "estimator"]


def _num_steps(scenario: "Scenario") -> int:
    steps = int(round(float(scenario.horizon)))
    if steps <= 0:
        raise ValueError(f"Horizon must be a positive number of steps, got {scenario.horizon}")
    return steps


def _stride(scenario: "Scenario") -> int:
    sample = getattr(scenario, "sample_dt", None)
    return 1 if not sample else max(1, int(round(sample)))


# =============================================================================
# NOISE
# =============================================================================

def weighted_noise(
    model: NoiseModel,
    adjacency: np.ndarray,
    num_leaders: int,
    steps: int,
) -> np.ndarray:
    """
    Noise entering each follower's weighted position error.

    Returns ``(steps, N, p)`` with entry [k, i] = sum_j a_ij rho_ji eta_ji[k].
    """
    M = num_leaders
    N = adjacency.shape[0] - M
    out = np.zeros((steps, N, model.dimension))
    for i in range(N):
        for j in np.flatnonzero(adjacency[M + i]):
            edge = (int(j), M + i)
            if not np.any(model.rho(edge)):
                continue
            out[:, i] += adjacency[M + i, j] * noise_table(model, edge, steps)
    return out


# =============================================================================
# AGENT-LEVEL RECURSION
# =============================================================================

def simulate_discrete(
    scenario: "Scenario",
    loop: ClosedLoop,
    use_estimator: bool = False,
    noise: Optional[NoiseModel] = None,
    verbose: bool = False,
    label: str = "discrete",
) -> ContainmentTrace:
    """
    Step followers, running sums and (optionally) estimators.

    State layout: X (N, m, p) difference chains, S (N, a, p) running sums
    with S[:, j] = Delta^{-(j+1)} e, and Z (N, m, p) estimator chains.
    At each step the law is evaluated and recorded before the update.
    """
    x0 = check_initial_states(scenario)
    N, m, p = x0.shape
    q = loop.plant.order
    a = q - m
    steps = _num_steps(scenario)
    stride = _stride(scenario)
    ks = np.arange(steps + 1, dtype=np.float64)

    lead_chain = chain_coefficients(list(scenario.leaders), q, discrete=True)
    lead_vals = tensor_eval_many(leader_input_coefficients(loop.blocks, lead_chain, m), ks)

    dist = disturbance_polynomials(scenario)
    dist_vals = None
    if dist is not None:
        dist_vals = tensor_eval_many(chain_coefficients(dist, 1, True)[:, :, 0], ks)

    noise_vals = None
    if noise is not None and not noise.is_silent:
        if m != 1:
            raise ValueError("Measurement noise is only supported for single-integrator followers")
        noise_vals = weighted_noise(
            noise, scenario.topology.adjacency, loop.blocks.num_leaders, steps + 1
        )

    L2 = np.asarray(loop.blocks.l2)
    scale = loop.scale[:, None]
    k_diff = loop.K[a:].copy()
    k_int = loop.K[:a][::-1].copy()
    if use_estimator:
        K_e = loop.estimator.K_e
        innov_scale = (1.0 / (1.0 + loop.blocks.follower_degrees))[:, None]

    X = x0.copy()
    S = np.zeros((N, a, p))
    Z = estimator_start(scenario, x0) if use_estimator else None

    recorded, pos_rec, in_rec, est_rec = [], [], [], []

    if verbose:
        print_section("Simulation Parameters")
        print_config("Scenario", scenario.name)
        print_config("Controller", label)
        print_config("Orders", f"m={m}, n={scenario.trajectory_order}, q={q}")
        print_config("Gains K", np.array2string(loop.K, precision=4))
        print_config("Spectral margin", f"{loop.margin:.4e}")
        print_config("Steps", steps)
        print_info("Running exact recursion...")

    iterator = range(steps + 1)
    if verbose:
        iterator = tqdm(iterator, desc="Stepping closed loop")
    for k in iterator:
        E = lead_vals[k] - np.tensordot(L2, X, axes=1)
        e0 = E[:, 0] if noise_vals is None else E[:, 0] + noise_vals[k]

        if use_estimator:
            EZ = lead_vals[k] - np.tensordot(L2, Z, axes=1)
            diff = EZ.copy()
            diff[:, 0] = e0
        elif noise_vals is None:
            diff = E
        else:
            diff = E.copy()
            diff[:, 0] = e0

        u = np.einsum("s,nsp->np", k_diff, diff)
        if a:
            u += np.einsum("j,njp->np", k_int, S)
        u *= scale

        if k % stride == 0 or k == steps:
            recorded.append(k)
            pos_rec.append(X[:, 0].copy())
            in_rec.append(u.copy())
            if use_estimator:
                est_rec.append(float(np.linalg.norm(Z - X)))

        if k == steps:
            break

        X_new = X.copy()
        X_new[:, :m - 1] += X[:, 1:]
        X_new[:, m - 1] += u
        if dist_vals is not None:
            X_new[:, 0] += dist_vals[k]

        if a:
            S_new = S.copy()
            S_new[:, 0] += e0
            S_new[:, 1:] += S[:, :-1]
            S = S_new

        if use_estimator:
            innov = (EZ[:, 0] - E[:, 0]) * innov_scale
            Z_new = Z.copy()
            Z_new[:, :m - 1] += Z[:, 1:] + K_e[None, :m - 1, None] * innov[:, None, :]
            Z_new[:, m - 1] += u + K_e[m - 1] * innov
            Z = Z_new
        X = X_new

    times = np.asarray(recorded, dtype=np.float64)
    positions = np.asarray(pos_rec)
    leader_positions = tensor_eval_many(lead_chain[:, :, 0], times)
    hull, err, tracking = sampled_metrics(
        positions, leader_positions, loop.spectrum.containment_weights
    )

    if verbose:
        print_success(f"E_r: {err[0]:.4e} -> {err[-1]:.4e}")

    attrs = trace_attrs(scenario, loop)
    if noise is not None:
        attrs["noise_seed"] = noise.seed
        attrs["noise_stream"] = noise.stream
    return ContainmentTrace(
        controller=scenario.controller,
        domain="discrete",
        times=times,
        positions=positions,
        leader_positions=leader_positions,
        hull_distances=hull,
        containment_error=err,
        tracking_error=tracking,
        estimator_error=np.asarray(est_rec) if use_estimator else None,
        inputs=np.asarray(in_rec),
        attrs=attrs,
    )


def run_discrete_pin(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    weighting: Optional[Weighting] = None,
    mu: Optional[float] = None,
    verbose: bool = False,
) -> ContainmentTrace:
    """
    Discrete PI^n containment of single-integrator followers.

    x_i[k+1] = x_i[k] + u_i[k] + delta_i[k] with
    u_i[k] = w_i sum_{l=0..n} kappa_l Delta^{-l} e_i[k], where w_i is
    1/(1+d_i) (``normalized``) or a uniform mu (``uniform``).

    Parameters
    ----------
    scenario : Scenario
        Discrete scenario with ``follower_order == 1``.
    loop : ClosedLoop, optional
        Pre-resolved gains. When given, ``weighting`` and ``mu`` are ignored.
    weighting : {'normalized', 'uniform'}, optional
        Override of the scenario's input weighting.
    mu : float, optional
        Uniform gain in (0, 1); chosen automatically when omitted.

    Returns
    -------
    ContainmentTrace
        ``inputs`` holds u_i[k].

    Raises
    ------
    ValueError
        If mu lies outside (0, 1) or the followers are not single integrators.
    """
    if scenario.follower_order != 1:
        raise ValueError(
            f"PI^n law needs single-integrator followers, got order {scenario.follower_order}"
        )
    loop = loop or prepare_closed_loop(scenario, weighting=weighting, mu=mu)
    label = f"discrete PI^n ({loop.weighting} weighting)"
    return simulate_discrete(scenario, loop, verbose=verbose, label=label)


def run_discrete_high_order(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    info: InfoMode = "full",
    verbose: bool = False,
) -> ContainmentTrace:
    """
    Discrete PI^{q-m} D^{m-1} containment of order-m followers.

    Parameters
    ----------
    info : {'full', 'estimator'}
        ``full`` uses exact relative-error differences from the chains and
        the leader polynomials. ``estimator`` substitutes the distributed
        difference estimators z_i, updated with the innovation weighted by
        1/(1+d_i), and records ``||Z - X||`` in ``trace.estimator_error``.
    """
    if info not in get_info_modes():
        raise ValueError(
            f"Invalid info mode '{info}'. "
            f"Must be one of: {get_info_modes()}"
        )
    loop = loop or prepare_closed_loop(scenario)
    use_estimator = info == "estimator"
    if use_estimator and loop.estimator is None:
        raise ValueError(f"Scenario '{scenario.name}' does not configure an estimator")
    label = f"discrete PI/D ({info} information)"
    return simulate_discrete(scenario, loop, use_estimator, verbose=verbose, label=label)


# =============================================================================
# MONTE CARLO
# =============================================================================

def summarize_ensemble(
    traces: List[ContainmentTrace],
    seed: int = 0,
    keep_traces: bool = False,
) -> MonteCarloReport:
    """
    Ensemble statistics of independent noisy runs.

    The mean check passes when, for every follower, the final ensemble-mean
    hull distance is within three standard errors of zero. The
    boundedness check passes when the largest second moment over the last
    quarter of the horizon is at most ten times the largest over the first
    quarter. Comparing the whole-run maximum with ten times the tail instead
    would reject every ensemble that starts outside the hull and converges,
    since its tail second moment shrinks towards zero.

    Raises
    ------
    ValueError
        If fewer than two runs are given.
    """
    if len(traces) < 2:
        raise ValueError(f"Ensemble statistics need at least 2 runs, got {len(traces)}")
    R = len(traces)
    dist = np.stack([tr.hull_distances for tr in traces])
    positions = np.stack([tr.positions for tr in traces])
    times = traces[0].times
    T = times.size

    mean = dist.mean(axis=0)
    second = np.mean(dist ** 2, axis=0)
    std = dist.std(axis=0, ddof=1)
    mean_pos_dist = hull_distances(positions.mean(axis=0), traces[0].leader_positions)

    stderr = std[-1] / np.sqrt(R)
    mean_ok = bool(np.all(mean[-1] <= 3.0 * stderr + 1e-12))

    quarter = max(1, T // 4)
    head = float(second[:quarter].max())
    tail = float(second[-quarter:].max())
    bounded = bool(tail <= 10.0 * head + 1e-12)

    return MonteCarloReport(
        controller=traces[0].controller,
        times=times,
        num_runs=R,
        mean_distance=mean,
        second_moment=second,
        std_distance=std,
        mean_position_distance=mean_pos_dist,
        mean_converged=mean_ok,
        second_moment_bounded=bounded,
        head_second_moment=head,
        tail_second_moment=tail,
        seed=int(seed),
        traces=list(traces) if keep_traces else [],
    )


def run_discrete_pin_noisy(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    num_runs: Optional[int] = None,
    scheduler: str = "threads",
    keep_traces: bool = False,
    verbose: bool = False,
) -> MonteCarloReport:
    """
    Monte Carlo ensemble of the PI^n law under measurement noise.

    Each measured relative position is e_ji[k] + rho_ji eta_ji[k]. Run r
    draws its noise from stream r of the scenario's ``NoiseModel``, so the
    ensemble does not depend on the dask scheduler.

    Parameters
    ----------
    num_runs : int, optional
        Ensemble size; defaults to ``scenario.num_runs``.
    scheduler : str
        Dask scheduler (``"threads"``, ``"processes"`` or ``"synchronous"``).
    keep_traces : bool
        Attach the per-run traces to the report.

    Returns
    -------
    MonteCarloReport
    """
    if scenario.noise is None:
        raise ValueError(f"Scenario '{scenario.name}' has no noise model")
    if scenario.follower_order != 1:
        raise ValueError("Measurement noise is only supported for single-integrator followers")
    runs = int(num_runs if num_runs is not None else scenario.num_runs)
    if runs < 2:
        raise ValueError(f"Ensemble statistics need at least 2 runs, got {runs}")
    loop = loop or prepare_closed_loop(scenario)

    if verbose:
        print_section("Monte Carlo")
        print_config("Scenario", scenario.name)
        print_config("Runs", runs)
        print_config("Noise seed", scenario.noise.seed)
        print_config("Scheduler", scheduler)

    tasks = [
        dask.delayed(simulate_discrete)(
            scenario, loop, False, scenario.noise.for_run(r), False, "discrete PI^n (noisy)"
        )
        for r in range(runs)
    ]
    if verbose:
        print_info(f"Running {runs} noisy realisations...")
    traces = list(dask.compute(*tasks, scheduler=scheduler))

    report = summarize_ensemble(traces, scenario.noise.seed, keep_traces)
    if verbose:
        print_success(
            f"Mean check: {'pass' if report.mean_converged else 'fail'}, "
            f"second moment check: {'pass' if report.second_moment_bounded else 'fail'}"
        )
    return report


# =============================================================================
# LIFTED RECURSION
# =============================================================================

def lifted_transition(loop: ClosedLoop) -> np.ndarray:
    """I_N (x) A_hat - L2_hat (x) B K with L2_hat = diag(w) L2."""
    l2_hat = loop.scale[:, None] * np.asarray(loop.blocks.l2)
    return (
        np.kron(np.eye(loop.blocks.num_followers), loop.plant.A_hat)
        - np.kron(l2_hat, loop.plant.B @ loop.K.reshape(1, -1))
    )


def run_lifted_discrete(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
) -> LiftedTrace:
    """
    Iterate Xi_hat_F[k+1] = (I_N (x) A_hat - L2_hat (x) B K) Xi_hat_F[k]
    plus B Delta^{q-1} delta_i[k] for disturbed single integrators.

    Noise-free full-information runs agree with this recursion up to
    rounding.
    """
    loop = loop or prepare_closed_loop(scenario)
    x0 = check_initial_states(scenario)
    N, m, p = x0.shape
    q = loop.plant.order
    steps = _num_steps(scenario)
    stride = _stride(scenario)

    lead_chain = chain_coefficients(list(scenario.leaders), q, discrete=True)
    dist = disturbance_polynomials(scenario)
    forcing = None
    dist_chain0 = None
    if dist is not None:
        dist_chain = chain_coefficients(dist, q, True)
        dist_chain0 = tensor_eval(dist_chain, 0.0)
        forcing = tensor_eval_many(dist_chain[:, :, q - 1], np.arange(steps + 1, dtype=np.float64))

    xi = lifted_initial_state(
        loop, x0, np.zeros((N, q - m, p)), tensor_eval(lead_chain, 0.0), dist_chain0
    ).reshape(N * q, p)
    trans = lifted_transition(loop)
    top = np.arange(N) * q + q - 1

    recorded, states = [0], [xi.copy()]
    for k in range(steps):
        nxt = trans @ xi
        if forcing is not None:
            nxt[top] += forcing[k]
        xi = nxt
        if (k + 1) % stride == 0 or k + 1 == steps:
            recorded.append(k + 1)
            states.append(xi.copy())

    times = np.asarray(recorded, dtype=np.float64)
    xi_hat = np.asarray(states).reshape(-1, N, q, p)
    leader_positions = tensor_eval_many(lead_chain[:, :, 0], times)
    positions = recover_positions(loop, xi_hat[:, :, 0], leader_positions)
    return LiftedTrace(domain="discrete", times=times, xi_hat=xi_hat, positions=positions)
