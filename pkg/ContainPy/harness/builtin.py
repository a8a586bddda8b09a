"""
Built-in Scenarios
==================

Ready-made experiments covering every controller family, plus the
reference data they are built from:

    - four cubic leaders with third-order followers (continuous time)
    - three master robots given by waypoints every 30 steps, and the
      quintic coefficients those waypoints imply
    - small graphs for disturbance-rejection and noise experiments

Authors: ContainPy Development Team
Version: 0.1.0
"""

from typing import Callable, Dict, List

import numpy as np

from ..core.errors import ScenarioError
from ..core.signals import NoiseModel, VectorPolynomial, interpolate_waypoints
from ..core.synthesis import kappa_to_gain
from ..core.topology import DirectedTopology
from ..sim.robot import RobotSetup
from .scenario import Scenario


# =============================================================================
# REFERENCE DATA
# =============================================================================

# Cubic leaders: a_0..a_3 per leader, each a (x, y) pair
CUBIC_LEADER_COEFFICIENTS = np.array([
    [[0.0, 0.0], [0.23, 3.43], [0.0095, -0.75], [0.0, 0.0005]],
    [[2.0, 5.0], [0.3, 3.43], [0.0095, -0.075], [0.0, 0.0005]],
    [[-5.0, 10.0], [0.2, 3.43], [0.01, -0.075], [0.0, 0.0005]],
    [[-10.0, 0.0], [0.2, 3.43], [0.01, -0.075], [0.0, 0.0005]],
])

# State-aligned gain (kappa_3, kappa_2, kappa_1, kappa_0) of the cubic example
CUBIC_EXAMPLE_GAINS = np.array([2.0, 6.1554, 8.4721, 6.1554])

# Master robot reference points, one row per waypoint time
ROBOT_WAYPOINT_TIMES = np.array([0.0, 30.0, 60.0, 90.0, 120.0, 150.0])
ROBOT_WAYPOINTS = np.array([
    [[0.0, 25.0], [20.0, -5.0], [-10.0, -20.0]],
    [[110.0, 8.0], [130.0, -15.0], [100.0, -35.0]],
    [[200.0, 50.0], [230.0, 35.0], [210.0, 0.0]],
    [[300.0, 120.0], [335.0, 100.0], [315.0, 70.0]],
    [[405.0, 155.0], [440.0, 130.0], [410.0, 110.0]],
    [[475.0, 150.0], [510.0, 130.0], [480.0, 110.0]],
])

# Printed quintic coefficients of the master trajectories (a_0..a_5 per master)
ROBOT_COEFFICIENTS = np.array([
    [[0.0, 25.0], [4.625, -1.028], [-4.560e-2, -0.7963e-2],
     [5.092e-4, 10.77e-4], [-1.800e-6, -10.91e-6], [0.0, 3.086e-8]],
    [[20.00, -5.000], [4.100, -1.392], [-1.944e-2, 2.801e-2],
     [1.698e-4, 4.167e-4], [0.0, -6.430e-6], [-0.3429e-8, 2.058e-8]],
    [[-10.00, -20.00], [3.544, -0.3833], [0.7407e-2, -3.796e-2],
     [-1.389e-4, 15.05e-4], [1.029e-6, -1.337e-6], [-0.3429e-8, 3.601e-8]],
])

# Robot gains as printed, read as (kappa_0, ..., kappa_5)
ROBOT_KAPPA = np.array([1.806, 0.4769, 0.0786, 0.0085, 5.660e-4, 1.826e-5])

# Disturbance 1 + 0.2k - 0.01k^2 + 0.001k^3 on both axes of every slave
ROBOT_DISTURBANCE = np.array([[1.0, 1.0], [0.2, 0.2], [-0.01, -0.01], [0.001, 0.001]])


def master_trajectories() -> List[VectorPolynomial]:
    """Quintic interpolants through the master robot waypoints."""
    return [
        interpolate_waypoints(ROBOT_WAYPOINT_TIMES, ROBOT_WAYPOINTS[:, i])
        for i in range(ROBOT_WAYPOINTS.shape[1])
    ]


# =============================================================================
# TOPOLOGIES
# =============================================================================

def _four_leader_ring() -> DirectedTopology:
    """Leaders 1-4; followers 5-8 coupled in a directed ring."""
    return DirectedTopology.from_edges(4, 4, [
        [1, 5, 1], [2, 5, 1], [8, 5, 1],
        [2, 6, 1], [5, 6, 1],
        [3, 7, 1], [4, 7, 1], [6, 7, 1],
        [4, 8, 1], [7, 8, 1],
    ])


def _three_leader_ring() -> DirectedTopology:
    """Leaders 1-3; every follower hears two leaders and the previous follower."""
    return DirectedTopology.from_edges(3, 3, [
        [1, 4, 1], [2, 4, 1], [6, 4, 1],
        [2, 5, 1], [3, 5, 1], [4, 5, 1],
        [3, 6, 1], [1, 6, 1], [5, 6, 1],
    ])


def _robot_topology() -> DirectedTopology:
    """Every slave hears all masters and one other slave (cyclically)."""
    edges = [[j, s, 1] for s in (4, 5, 6) for j in (1, 2, 3)]
    edges += [[6, 4, 1], [4, 5, 1], [5, 6, 1]]
    return DirectedTopology.from_edges(3, 3, edges)


def _segment_topology() -> DirectedTopology:
    return DirectedTopology.from_edges(2, 2, [
        [1, 3, 1], [2, 3, 1],
        [1, 4, 1], [2, 4, 1], [3, 4, 1],
    ])


def _all_edges_noise(topology: DirectedTopology, rho: float, seed: int) -> NoiseModel:
    rows, cols = np.nonzero(topology.adjacency)
    p = 2
    return NoiseModel(
        dimension=p,
        intensities={(int(j), int(i)): np.full(p, rho) for i, j in zip(rows, cols)},
        seed=seed,
    )


# =============================================================================
# SCENARIO BUILDERS
# =============================================================================

_CUBIC_FOLLOWER_START = np.array([[8.0, -6.0], [10.0, 12.0], [-14.0, 16.0], [-16.0, -8.0]])

_TRIANGLE_LEADERS = [
    [[0.0, 0.0], [0.1, 0.05], [1e-3, 0.0], [1e-6, 1e-6]],
    [[20.0, 0.0], [0.1, 0.06], [1e-3, 2e-4], [1e-6, 0.0]],
    [[10.0, 18.0], [0.12, 0.05], [1e-3, 1e-4], [0.0, 1e-6]],
]
_TRIANGLE_FOLLOWER_START = np.array([[-6.0, -4.0], [28.0, -3.0], [10.0, 26.0]])


def _chain_start(positions: np.ndarray, order: int) -> np.ndarray:
    """Followers at rest: positions with zero higher derivatives."""
    out = np.zeros((positions.shape[0], order, positions.shape[1]))
    out[:, 0] = positions
    return out


def _cubic_leaders() -> tuple:
    return tuple(VectorPolynomial(c) for c in CUBIC_LEADER_COEFFICIENTS)


def _triangle_leaders(degree: int) -> tuple:
    return tuple(VectorPolynomial(np.asarray(c)[: degree + 1]) for c in _TRIANGLE_LEADERS)


def _continuous_highorder_example() -> Scenario:
    return Scenario(
        name="continuous-highorder-example",
        description="Four cubic leaders, four third-order followers, fixed gains",
        controller="continuous-highorder",
        topology=_four_leader_ring(),
        leaders=_cubic_leaders(),
        follower_order=3,
        trajectory_order=3,
        initial_states=_chain_start(_CUBIC_FOLLOWER_START, 3),
        gains=CUBIC_EXAMPLE_GAINS,
        dt=1e-3,
        sample_dt=0.1,
        horizon=60.0,
    )


def _continuous_highorder_synthesized() -> Scenario:
    return _continuous_highorder_example().with_overrides(
        name="continuous-highorder-synthesized",
        description="Cubic leaders and third-order followers with Riccati gains",
        gains="synthesized",
    )


def _continuous_estimator_example() -> Scenario:
    return _continuous_highorder_example().with_overrides(
        name="continuous-estimator-example",
        description="Cubic leaders; followers estimate relative derivatives",
        controller="continuous-estimator",
        estimator_init=0.5,
        seed=7,
    )


def _continuous_pin_example() -> Scenario:
    dist = VectorPolynomial([[0.5, -0.3], [0.1, 0.05], [0.001, 0.002]])
    return Scenario(
        name="continuous-pin-example",
        description="Single integrators behind cubic leaders, quadratic disturbance",
        controller="continuous-PIn",
        topology=_four_leader_ring(),
        leaders=_cubic_leaders(),
        follower_order=1,
        trajectory_order=3,
        initial_states=_chain_start(_CUBIC_FOLLOWER_START, 1),
        disturbances=(dist,) * 4,
        dt=2e-3,
        sample_dt=0.1,
        horizon=60.0,
    )


def _segment_scenario(name: str, controller: str, disturbance, horizon: float, dt: float) -> Scenario:
    leaders = (
        VectorPolynomial([[0.0, 0.0], [1.0, 0.5]]),
        VectorPolynomial([[0.0, 4.0], [1.0, 0.5]]),
    )
    dist = VectorPolynomial(disturbance)
    return Scenario(
        name=name,
        description="Two ramp leaders spanning a segment, polynomial disturbance",
        controller=controller,
        topology=_segment_topology(),
        leaders=leaders,
        follower_order=1,
        trajectory_order=1,
        initial_states=_chain_start(np.array([[-1.0, 1.0], [-1.0, 3.0]]), 1),
        disturbances=(dist, dist),
        dt=dt,
        sample_dt=0.1 if controller.startswith("continuous") else None,
        horizon=horizon,
    )


def _discrete_pin_example() -> Scenario:
    return Scenario(
        name="discrete-pin-example",
        description="Three cubic leaders, three single integrators, 1/(1+d) weighting",
        controller="discrete-PIn",
        topology=_three_leader_ring(),
        leaders=_triangle_leaders(3),
        follower_order=1,
        trajectory_order=3,
        initial_states=_chain_start(_TRIANGLE_FOLLOWER_START, 1),
        horizon=200,
    )


def _discrete_pin_uniform() -> Scenario:
    return _discrete_pin_example().with_overrides(
        name="discrete-pin-uniform",
        description="Three cubic leaders, uniform input gain",
        controller="discrete-PIn-uniform",
        mu="auto",
    )


def _discrete_noisy_example() -> Scenario:
    topology = _three_leader_ring()
    return Scenario(
        name="discrete-noisy-example",
        description="Ramp leaders, noisy relative measurements, Monte Carlo",
        controller="discrete-noisy",
        topology=topology,
        leaders=_triangle_leaders(1),
        follower_order=1,
        trajectory_order=1,
        initial_states=_chain_start(_TRIANGLE_FOLLOWER_START, 1),
        noise=_all_edges_noise(topology, 0.05, seed=11),
        horizon=100,
        seed=11,
        num_runs=200,
    )


def _discrete_highorder_example() -> Scenario:
    return Scenario(
        name="discrete-highorder-example",
        description="Quadratic leaders, double-integrator followers, exact differences",
        controller="discrete-highorder",
        topology=_three_leader_ring(),
        leaders=_triangle_leaders(2),
        follower_order=2,
        trajectory_order=2,
        initial_states=_chain_start(_TRIANGLE_FOLLOWER_START, 2),
        horizon=200,
    )


def _discrete_estimator_example() -> Scenario:
    return _discrete_highorder_example().with_overrides(
        name="discrete-estimator-example",
        description="Quadratic leaders, double integrators with difference estimators",
        controller="discrete-estimator",
        estimator_init=0.5,
        seed=5,
    )


def _robot_application() -> Scenario:
    topology = _robot_topology()
    dist = VectorPolynomial(ROBOT_DISTURBANCE)
    return Scenario(
        name="robot-application",
        description="Three master robots on waypoint interpolants, three slave robots",
        controller="robot-application",
        topology=topology,
        leaders=tuple(master_trajectories()),
        follower_order=1,
        trajectory_order=5,
        initial_states=_chain_start(np.array([[0.0, 40.0], [35.0, -5.0], [-25.0, -25.0]]), 1),
        gains=kappa_to_gain(ROBOT_KAPPA),
        disturbances=(dist,) * 3,
        noise=_all_edges_noise(topology, 0.1, seed=3),
        horizon=150,
        seed=3,
        robot=RobotSetup(offset=0.1, headings=(0.0, 0.0, 0.0)),
    )


_BUILDERS: Dict[str, Callable[[], Scenario]] = {
    "continuous-highorder-example": _continuous_highorder_example,
    "continuous-highorder-synthesized": _continuous_highorder_synthesized,
    "continuous-estimator-example": _continuous_estimator_example,
    "continuous-pin-example": _continuous_pin_example,
    "continuous-disturbance-rejection": lambda: _segment_scenario(
        "continuous-disturbance-rejection", "continuous-PIn", [[2.0, 0.0]], 40.0, 1e-2
    ),
    "continuous-disturbance-sharpness": lambda: _segment_scenario(
        "continuous-disturbance-sharpness", "continuous-PIn", [[0.0, 0.0], [2.0, 0.0]], 40.0, 1e-2
    ),
    "discrete-pin-example": _discrete_pin_example,
    "discrete-pin-uniform": _discrete_pin_uniform,
    "discrete-disturbance-rejection": lambda: _segment_scenario(
        "discrete-disturbance-rejection", "discrete-PIn", [[2.0, 0.0]], 150, 1.0
    ),
    "discrete-disturbance-sharpness": lambda: _segment_scenario(
        "discrete-disturbance-sharpness", "discrete-PIn", [[0.0, 0.0], [2.0, 0.0]], 150, 1.0
    ),
    "discrete-noisy-example": _discrete_noisy_example,
    "discrete-highorder-example": _discrete_highorder_example,
    "discrete-estimator-example": _discrete_estimator_example,
    "robot-application": _robot_application,
}


def list_builtin_scenarios() -> List[str]:
    """Names of the built-in scenarios, in registry order."""
    return list(_BUILDERS)


def get_builtin_scenario(name: str) -> Scenario:
    """
    Build a built-in scenario.

    Raises
    ------
    ScenarioError
        If the name is unknown.
    """
    if name not in _BUILDERS:
        raise ScenarioError(
            f"Unknown built-in scenario '{name}'.\n"
            f"Available: {list_builtin_scenarios()}"
        )
    return _BUILDERS[name]()
