"""
ContainPy Harness Module
========================

Scenario files, built-in experiments, runs and sweeps.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from .scenario import (
    Scenario,
    scenario_from_dict,
    scenario_to_dict,
    load_scenario,
    save_scenario,
    get_controller_families,
    validate_controller_family,
)
from .builtin import (
    get_builtin_scenario,
    list_builtin_scenarios,
    master_trajectories,
)
from .runner import (
    RunReport,
    run,
    sweep,
    sweep_ensemble,
    write_report,
)


__all__ = [
    # Scenarios
    'Scenario',
    'scenario_from_dict',
    'scenario_to_dict',
    'load_scenario',
    'save_scenario',
    'get_controller_families',
    'validate_controller_family',

    # Built-ins
    'get_builtin_scenario',
    'list_builtin_scenarios',
    'master_trajectories',

    # Runs
    'RunReport',
    'run',
    'sweep',
    'sweep_ensemble',
    'write_report',
]
