"""
ContainPy - Containment Control of Multi-Agent Systems
======================================================

Controller synthesis and simulation for driving follower agents into the
convex hull spanned by moving leaders over a directed graph.

Leaders follow polynomial trajectories of degree n. Followers are chains of
m integrators (continuous time) or m-step accumulators (discrete time) and
use PI^n style laws whose gains come from a Riccati equation scaled by the
spectrum of the follower Laplacian block.

Key Features:
    - Spectral certification of directed leader-follower topologies
    - Continuous (CARE) and discrete (modified DARE) gain synthesis
    - Full-information and estimator-based high-order controllers
    - Rejection of polynomial disturbances up to degree n-1
    - Monte Carlo runs under white measurement noise
    - Feedback-linearized differential-drive robots
    - xarray, CSV and Zstd-compressed Zarr outputs
    - Interactive command-line interface

Quick Start:
    >>> from ContainPy import get_builtin_scenario, run
    >>> report = run(get_builtin_scenario("continuous-highorder-example"))
    >>> report.flags["containment"]
    True

Authors: ContainPy Development Team
Version: 0.1.0
License: MIT
"""

__version__ = "0.1.0"
__author__ = "ContainPy Development Team"
__license__ = "MIT"

from .core import (
    # Errors
    ContainPyError,
    TopologyError,
    CertificationError,
    ConvergenceError,
    ScenarioError,
    ConditioningWarning,

    # Configuration
    Tolerances,
    DEFAULT_TOLERANCES,

    # Topology
    DirectedTopology,
    build_laplacian,
    check_reachability,
    certify_spectrum,
    certify_topology,
    containment_weights,
    random_topology,

    # Signals
    VectorPolynomial,
    NoiseModel,
    poly_eval,
    poly_derivative,
    poly_forward_difference,
    binomial_difference,
    interpolate_waypoints,

    # Synthesis
    care_solve,
    modified_dare_solve,
    synthesize_gains,
    synthesize_estimator,
    verify_closed_loop,

    # Geometry
    hull_distance,
    hull_distances,
    containment_error,

    # Console utilities
    suppress_warnings,
    print_banner,
)

from .sim import (
    prepare_closed_loop,
    run_pin_single_integrator,
    run_high_order_full_info,
    run_high_order_estimator,
    run_lifted_closed_loop,
    run_discrete_pin,
    run_discrete_pin_noisy,
    run_discrete_high_order,
    run_lifted_discrete,
    RobotPose,
    recover_wheel_commands,
    run_robot_application,
    ContainmentTrace,
    LiftedTrace,
    MonteCarloReport,
    save_trace_zarr,
)

from .harness import (
    Scenario,
    load_scenario,
    save_scenario,
    get_builtin_scenario,
    list_builtin_scenarios,
    RunReport,
    run,
    sweep,
)


__all__ = [
    # Version info
    '__version__',
    '__author__',

    # Main entry points
    'run',
    'sweep',
    'load_scenario',
    'save_scenario',
    'get_builtin_scenario',
    'list_builtin_scenarios',
    'Scenario',
    'RunReport',

    # Errors
    'ContainPyError',
    'TopologyError',
    'CertificationError',
    'ConvergenceError',
    'ScenarioError',
    'ConditioningWarning',

    # Configuration
    'Tolerances',
    'DEFAULT_TOLERANCES',

    # Core - Topology
    'DirectedTopology',
    'build_laplacian',
    'check_reachability',
    'certify_spectrum',
    'certify_topology',
    'containment_weights',
    'random_topology',

    # Core - Signals
    'VectorPolynomial',
    'NoiseModel',
    'poly_eval',
    'poly_derivative',
    'poly_forward_difference',
    'binomial_difference',
    'interpolate_waypoints',

    # Core - Synthesis
    'care_solve',
    'modified_dare_solve',
    'synthesize_gains',
    'synthesize_estimator',
    'verify_closed_loop',

    # Core - Geometry
    'hull_distance',
    'hull_distances',
    'containment_error',

    # Simulation
    'prepare_closed_loop',
    'run_pin_single_integrator',
    'run_high_order_full_info',
    'run_high_order_estimator',
    'run_lifted_closed_loop',
    'run_discrete_pin',
    'run_discrete_pin_noisy',
    'run_discrete_high_order',
    'run_lifted_discrete',
    'RobotPose',
    'recover_wheel_commands',
    'run_robot_application',

    # Traces
    'ContainmentTrace',
    'LiftedTrace',
    'MonteCarloReport',
    'save_trace_zarr',

    # Console utilities
    'suppress_warnings',
    'print_banner',
]
