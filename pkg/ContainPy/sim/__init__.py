"""
ContainPy Simulation Module
===========================

Closed-loop simulation of the containment laws.

This module covers:
    - Continuous-time RK4 integration (PI^n, high-order, estimator based)
    - Exact discrete-time recursions, including noisy Monte Carlo ensembles
    - Lifted closed-loop cross-checks in both time domains
    - The feedback-linearized mobile robot application
    - Trace containers with xarray, CSV and Zarr export

Authors: ContainPy Development Team
Version: 0.1.0
"""

from .common import (
    ClosedLoop,
    DecayFit,
    prepare_closed_loop,
    lifted_initial_state,
    cross_validation_gap,
    fit_decay,
)
from .continuous import (
    run_pin_single_integrator,
    run_high_order_full_info,
    run_high_order_estimator,
    run_lifted_closed_loop,
)
from .discrete import (
    run_discrete_pin,
    run_discrete_pin_noisy,
    run_discrete_high_order,
    run_lifted_discrete,
    summarize_ensemble,
    get_info_modes,
)
from .robot import (
    RobotPose,
    RobotSetup,
    recover_wheel_commands,
    feedback_linearize,
    run_robot_application,
)
from .trace import (
    ContainmentTrace,
    LiftedTrace,
    MonteCarloReport,
    save_trace_zarr,
    load_trace_zarr,
)


__all__ = [
    # Setup
    'ClosedLoop',
    'prepare_closed_loop',
    'lifted_initial_state',

    # Continuous time
    'run_pin_single_integrator',
    'run_high_order_full_info',
    'run_high_order_estimator',
    'run_lifted_closed_loop',

    # Discrete time
    'run_discrete_pin',
    'run_discrete_pin_noisy',
    'run_discrete_high_order',
    'run_lifted_discrete',
    'summarize_ensemble',
    'get_info_modes',

    # Robots
    'RobotPose',
    'RobotSetup',
    'recover_wheel_commands',
    'feedback_linearize',
    'run_robot_application',

    # Traces and analysis
    'ContainmentTrace',
    'LiftedTrace',
    'MonteCarloReport',
    'DecayFit',
    'fit_decay',
    'cross_validation_gap',
    'save_trace_zarr',
    'load_trace_zarr',
]
