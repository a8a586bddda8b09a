"""
Continuous-Time Simulation
==========================

Fixed-step RK4 integration of the continuous-time containment laws:

    - PI^n law for single-integrator followers
    - PI^{q-m} D^{m-1} law for followers of order m, with exact derivatives
    - the same law driven by distributed derivative estimators
    - the lifted closed loop on the shifted state Xi_hat_F (cross-check)

Leaders and disturbances are polynomials and are evaluated analytically at
the RK4 stage times. Integral terms of the weighted relative error are
carried as explicit states starting from zero.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from typing import TYPE_CHECKING, Callable, Optional, Tuple

import numpy as np
from tqdm import tqdm

from ..core.console import print_config, print_info, print_section, print_success
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
    time_grid,
    trace_attrs,
)
from .trace import ContainmentTrace, LiftedTrace

if TYPE_CHECKING:
    from ..harness.scenario import Scenario


# =============================================================================
# INTEGRATOR
# =============================================================================

def _rk4_integrate(
    rhs: Callable[[int, np.ndarray], np.ndarray],
    y0: np.ndarray,
    steps: int,
    dt: float,
    stride: int,
    verbose: bool = False,
    desc: str = "Integrating closed loop",
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classical RK4 with a fixed step.

    ``rhs(h, y)`` receives the half-step index h (time h * dt / 2) so that
    forcing terms can be tabulated once.

    Returns
    -------
    steps_taken : np.ndarray
        Step indices of the recorded samples (0, stride, ..., and the last).
    samples : np.ndarray
        States at those steps.
    """
    y = np.array(y0, dtype=np.float64, copy=True)
    recorded = [0]
    samples = [y.copy()]
    half = 0.5 * dt
    sixth = dt / 6.0

    iterator = range(steps)
    if verbose:
        iterator = tqdm(iterator, desc=desc)
    for k in iterator:
        h = 2 * k
        k1 = rhs(h, y)
        k2 = rhs(h + 1, y + half * k1)
        k3 = rhs(h + 1, y + half * k2)
        k4 = rhs(h + 2, y + dt * k3)
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % stride == 0 or k + 1 == steps:
            recorded.append(k + 1)
            samples.append(y.copy())
    return np.asarray(recorded), np.asarray(samples)


def _half_step_times(steps: int, dt: float) -> np.ndarray:
    return 0.5 * dt * np.arange(2 * steps + 1)


# =============================================================================
# AGENT-LEVEL SIMULATION
# =============================================================================

def _print_parameters(scenario: "Scenario", loop: ClosedLoop, label: str, steps: int):
    print_section("Simulation Parameters")
    print_config("Scenario", scenario.name)
    print_config("Controller", label)
    print_config("Agents", f"{loop.blocks.num_leaders} leaders, {loop.blocks.num_followers} followers")
    print_config("Orders", f"m={scenario.follower_order}, n={scenario.trajectory_order}, q={loop.plant.order}")
    print_config("Gains K", np.array2string(loop.K, precision=4))
    print_config("Stability margin", f"{loop.margin:.4e}")
    print_config("Step / horizon", f"{scenario.dt} / {scenario.horizon} ({steps} steps)")


def _simulate_agents(
    scenario: "Scenario",
    loop: ClosedLoop,
    use_estimator: bool,
    verbose: bool,
    label: str,
) -> ContainmentTrace:
    """
    Integrate followers, accumulators and (optionally) estimators jointly.

    State layout: X (N, m, p) position chains, W (N, a, p) integrals of
    the weighted position error with W[:, j] = D^{-(j+1)} e, and Z (N, m, p)
    estimator chains.
    """
    x0 = check_initial_states(scenario)
    N, m, p = x0.shape
    q = loop.plant.order
    a = q - m
    dt = float(scenario.dt)
    steps, stride = time_grid(scenario.horizon, dt, scenario.sample_dt)

    lead_chain = chain_coefficients(list(scenario.leaders), q, discrete=False)
    lead_in = leader_input_coefficients(loop.blocks, lead_chain, m)
    grid_t = _half_step_times(steps, dt)
    lead_grid = tensor_eval_many(lead_in, grid_t)

    dist = disturbance_polynomials(scenario)
    dist_grid = None
    if dist is not None:
        dist_grid = tensor_eval_many(chain_coefficients(dist, 1, False)[:, :, 0], grid_t)

    L2 = np.asarray(loop.blocks.l2)
    k_diff = loop.K[a:].copy()
    k_int = loop.K[:a][::-1].copy()
    K_e = loop.estimator.K_e if use_estimator else None

    nx, nw = N * m * p, N * a * p
    size = 2 * nx + nw if use_estimator else nx + nw

    def rhs(h: int, y: np.ndarray) -> np.ndarray:
        X = y[:nx].reshape(N, m, p)
        W = y[nx:nx + nw].reshape(N, a, p)
        lead = lead_grid[h]
        E = lead - np.tensordot(L2, X, axes=1)

        if use_estimator:
            Z = y[nx + nw:].reshape(N, m, p)
            EZ = lead - np.tensordot(L2, Z, axes=1)
            diff = EZ.copy()
            diff[:, 0] = E[:, 0]
        else:
            diff = E

        u = np.einsum("s,nsp->np", k_diff, diff)
        if a:
            u += np.einsum("j,njp->np", k_int, W)

        out = np.empty(size)
        dX = out[:nx].reshape(N, m, p)
        dX[:, :m - 1] = X[:, 1:]
        dX[:, m - 1] = u
        if dist_grid is not None:
            dX[:, 0] += dist_grid[h]
        if a:
            dW = out[nx:nx + nw].reshape(N, a, p)
            dW[:, 0] = E[:, 0]
            dW[:, 1:] = W[:, :-1]
        if use_estimator:
            innov = EZ[:, 0] - E[:, 0]
            dZ = out[nx + nw:].reshape(N, m, p)
            dZ[:, :m - 1] = Z[:, 1:] + K_e[None, :m - 1, None] * innov[:, None, :]
            dZ[:, m - 1] = u + K_e[m - 1] * innov
        return out

    y0 = np.zeros(size)
    y0[:nx] = x0.ravel()
    if use_estimator:
        y0[nx + nw:] = estimator_start(scenario, x0).ravel()

    if verbose:
        _print_parameters(scenario, loop, label, steps)
        print_info("Integrating closed loop with RK4...")

    taken, samples = _rk4_integrate(rhs, y0, steps, dt, stride, verbose)
    times = taken * dt
    X = samples[:, :nx].reshape(-1, N, m, p)
    positions = X[:, :, 0].copy()
    leader_positions = tensor_eval_many(lead_chain[:, :, 0], times)
    hull, err, tracking = sampled_metrics(
        positions, leader_positions, loop.spectrum.containment_weights
    )

    est_err = None
    if use_estimator:
        Z = samples[:, nx + nw:].reshape(-1, N, m, p)
        est_err = np.linalg.norm((Z - X).reshape(len(times), -1), axis=1)

    if verbose:
        print_success(f"E_r: {err[0]:.4e} -> {err[-1]:.4e}")

    return ContainmentTrace(
        controller=scenario.controller,
        domain="continuous",
        times=times,
        positions=positions,
        leader_positions=leader_positions,
        hull_distances=hull,
        containment_error=err,
        tracking_error=tracking,
        estimator_error=est_err,
        attrs=trace_attrs(scenario, loop),
    )


def run_pin_single_integrator(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    verbose: bool = False,
) -> ContainmentTrace:
    """
    PI^n containment of single-integrator followers.

    Integrates dx_i/dt = u_i + delta_i with
    u_i = sum_{l=0..n} kappa_l D^{-l} e_i, e_i the weighted relative
    position error.

    Parameters
    ----------
    scenario : Scenario
        Continuous scenario with ``follower_order == 1``.
    loop : ClosedLoop, optional
        Pre-resolved gains; built from the scenario when omitted.
    verbose : bool
        Print parameters and show a progress bar.

    Returns
    -------
    ContainmentTrace

    Raises
    ------
    CertificationError
        If some follower is not reachable from the leaders.
    ValueError
        If the step or the horizon is not positive, or followers are not
        single integrators.
    """
    if scenario.follower_order != 1:
        raise ValueError(
            f"PI^n law needs single-integrator followers, got order {scenario.follower_order}"
        )
    loop = loop or prepare_closed_loop(scenario)
    return _simulate_agents(scenario, loop, False, verbose, "PI^n (single integrators)")


def run_high_order_full_info(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    verbose: bool = False,
) -> ContainmentTrace:
    """
    PI^{q-m} D^{m-1} containment of order-m followers with exact derivatives.

    Relative-error derivatives D^s e_i (s < m) come from the follower
    chains and the analytic leader derivatives.
    """
    loop = loop or prepare_closed_loop(scenario)
    return _simulate_agents(scenario, loop, False, verbose, "PI/D (full information)")


def run_high_order_estimator(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    verbose: bool = False,
) -> ContainmentTrace:
    """
    High-order containment driven by distributed derivative estimators.

    Follower i runs z_i' = E z_i + B u_i + K_e (sum_j a_ij (z_j1 - z_i1)
    - e_i) with leaders sending their exact chains. The differential terms
    of the law use the estimator chains; the proportional term uses the
    measured positions. ``trace.estimator_error`` holds ||Z - X||.
    """
    loop = loop or prepare_closed_loop(scenario)
    if loop.estimator is None:
        raise ValueError(f"Scenario '{scenario.name}' does not configure an estimator")
    return _simulate_agents(scenario, loop, True, verbose, "PI/D (estimator based)")


# =============================================================================
# LIFTED CLOSED LOOP
# =============================================================================

def lifted_matrix(loop: ClosedLoop) -> np.ndarray:
    """I_N (x) A - L2 (x) B K, acting on the (N*q, p) stacked state."""
    return (
        np.kron(np.eye(loop.blocks.num_followers), loop.plant.A)
        - np.kron(np.asarray(loop.blocks.l2), loop.plant.B @ loop.K.reshape(1, -1))
    )


def run_lifted_closed_loop(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    verbose: bool = False,
) -> LiftedTrace:
    """
    Integrate d Xi_hat_F / dt = (I_N (x) A - L2 (x) B K) Xi_hat_F directly.

    The initial shifted state is expanded from the agent initial
    conditions with zero integrators. A single-integrator disturbance
    enters the last lifted component as D^{q-1} delta_i(t). Follower
    positions are recovered as Xi_hat_F[:, 0] + (-L2^{-1} L1) x_L.
    """
    loop = loop or prepare_closed_loop(scenario)
    x0 = check_initial_states(scenario)
    N, m, p = x0.shape
    q = loop.plant.order
    dt = float(scenario.dt)
    steps, stride = time_grid(scenario.horizon, dt, scenario.sample_dt)

    lead_chain = chain_coefficients(list(scenario.leaders), q, discrete=False)
    dist = disturbance_polynomials(scenario)
    grid_t = _half_step_times(steps, dt)

    forcing = None
    dist_chain0 = None
    if dist is not None:
        dist_chain = chain_coefficients(dist, q, False)
        dist_chain0 = tensor_eval(dist_chain, 0.0)
        forcing = tensor_eval_many(dist_chain[:, :, q - 1], grid_t)

    xi0 = lifted_initial_state(
        loop, x0, np.zeros((N, q - m, p)), tensor_eval(lead_chain, 0.0), dist_chain0
    )
    acl = lifted_matrix(loop)
    top = np.arange(N) * q + q - 1

    def rhs(h: int, y: np.ndarray) -> np.ndarray:
        Y = y.reshape(N * q, p)
        dY = acl @ Y
        if forcing is not None:
            dY[top] += forcing[h]
        return dY.ravel()

    if verbose:
        _print_parameters(scenario, loop, "lifted closed loop", steps)

    taken, samples = _rk4_integrate(
        rhs, xi0.ravel(), steps, dt, stride, verbose, desc="Integrating lifted loop"
    )
    times = taken * dt
    xi_hat = samples.reshape(-1, N, q, p)
    leader_positions = tensor_eval_many(lead_chain[:, :, 0], times)
    positions = recover_positions(loop, xi_hat[:, :, 0], leader_positions)
    return LiftedTrace(domain="continuous", times=times, xi_hat=xi_hat, positions=positions)
