"""
ContainPy Core Module
=====================

Building blocks of the containment toolkit.

This module contains:
    - Directed topologies, Laplacian blocks and spectral certification
    - Vector polynomials, interpolation and white measurement noise
    - Riccati gain and estimator synthesis
    - Convex hull distances and containment errors
    - Console output, tolerances and the exception hierarchy

Authors: ContainPy Development Team
Version: 0.1.0
"""

from .errors import (
    ContainPyError,
    TopologyError,
    CertificationError,
    ConvergenceError,
    ScenarioError,
    ConditioningWarning,
)
from .utils import (
    Tolerances,
    DEFAULT_TOLERANCES,
    SAMPLING_PERIOD,
)
from .topology import (
    DirectedTopology,
    LaplacianBlocks,
    SpectrumReport,
    build_laplacian,
    check_reachability,
    normalized_spectrum,
    choose_uniform_mu,
    containment_weights,
    certify_spectrum,
    certify_topology,
    random_topology,
    get_weighting_modes,
)
from .signals import (
    VectorPolynomial,
    NoiseModel,
    poly_eval,
    poly_derivative,
    poly_forward_difference,
    poly_antiderivative,
    poly_running_sum,
    derivative_chain,
    binomial_difference,
    interpolate_waypoints,
    noise_table,
    difference_noise_covariance,
    difference_noise_bound,
)
from .synthesis import (
    CompanionPlant,
    GainSynthesis,
    EstimatorGainSynthesis,
    companion_plant,
    care_solve,
    modified_dare_solve,
    synthesize_gains,
    synthesize_estimator,
    verify_closed_loop,
    verify_estimator,
    gain_to_kappa,
    kappa_to_gain,
    get_time_domains,
)
from .geometry import (
    HullProjection,
    hull_distance,
    hull_distances,
    containment_error,
    containment_error_series,
)
from .console import (
    suppress_warnings,
    print_banner,
    print_section,
    print_config,
    print_success,
    print_error,
    print_warning,
    print_info,
    print_complete,
)


__all__ = [
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
    'SAMPLING_PERIOD',

    # Topology
    'DirectedTopology',
    'LaplacianBlocks',
    'SpectrumReport',
    'build_laplacian',
    'check_reachability',
    'normalized_spectrum',
    'choose_uniform_mu',
    'containment_weights',
    'certify_spectrum',
    'certify_topology',
    'random_topology',
    'get_weighting_modes',

    # Signals
    'VectorPolynomial',
    'NoiseModel',
    'poly_eval',
    'poly_derivative',
    'poly_forward_difference',
    'poly_antiderivative',
    'poly_running_sum',
    'derivative_chain',
    'binomial_difference',
    'interpolate_waypoints',
    'noise_table',
    'difference_noise_covariance',
    'difference_noise_bound',

    # Synthesis
    'CompanionPlant',
    'GainSynthesis',
    'EstimatorGainSynthesis',
    'companion_plant',
    'care_solve',
    'modified_dare_solve',
    'synthesize_gains',
    'synthesize_estimator',
    'verify_closed_loop',
    'verify_estimator',
    'gain_to_kappa',
    'kappa_to_gain',
    'get_time_domains',

    # Geometry
    'HullProjection',
    'hull_distance',
    'hull_distances',
    'containment_error',
    'containment_error_series',

    # Console utilities
    'suppress_warnings',
    'print_banner',
    'print_section',
    'print_config',
    'print_success',
    'print_error',
    'print_warning',
    'print_info',
    'print_complete',
]
