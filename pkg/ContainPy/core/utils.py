"""
Utility Functions
=================

Tolerances, shared constants and small numerical helpers.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from dataclasses import dataclass, asdict, fields, replace
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np


# =============================================================================
# NUMERICAL TOLERANCES
# =============================================================================

@dataclass(frozen=True)
class Tolerances:
    """
    Numerical tolerances used by certification and acceptance checks.

    Every field can be overridden from a scenario file through its
    ``"tolerances"`` object.
    """

    laplacian_row_sum: float = 1e-12
    weight_nonnegative: float = 1e-10
    weight_row_sum: float = 1e-9
    care_residual: float = 1e-8
    care_max_iter: int = 100
    dare_change: float = 1e-10
    dare_max_iter: int = 100_000
    dare_margin: float = 0.5
    hull_weight: float = 1e-9
    hull_optimality: float = 1e-8
    interpolation_residual: float = 1e-8
    interpolation_condition: float = 1e12
    decay_slope: float = -1e-3
    decay_floor: float = 1e-11
    containment_ratio: float = 1e-2
    cross_validation_gap: float = 1e-5
    estimator_final: float = 1e-6
    robot_tail_fraction: float = 0.05
    robot_tail_steps: int = 20

    def to_dict(self) -> Dict[str, Any]:
        """Plain dictionary view (JSON friendly)."""
        return asdict(self)

    def with_overrides(self, overrides: Optional[Dict[str, Any]]) -> "Tolerances":
        """
        Return a copy with some fields replaced.

        Raises
        ------
        ValueError
            If an override names an unknown tolerance.
        """
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ValueError(
                f"Unknown tolerance(s): {unknown}.\n"
                f"Valid names: {sorted(known)}"
            )
        return replace(self, **overrides)


DEFAULT_TOLERANCES = Tolerances()

# Fraction of lambda_min used as sigma_min when picking the continuous epsilon
SIGMA_FRACTION = 0.99

# Zero-order hold sampling period of every discrete-time model
SAMPLING_PERIOD = 1.0

# Version stamped into reports and dataset attributes
SOFTWARE_VERSION = "0.1.0"
REPORT_SCHEMA_VERSION = 1


# =============================================================================
# SMALL HELPERS
# =============================================================================

def as_vector(values, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """Convert to a finite 1D float array, optionally checking its length."""
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if dim is not None and arr.size != dim:
        raise ValueError(f"{name} must have {dim} components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def utc_timestamp() -> str:
    """Current UTC time as an ISO 8601 string, second resolution."""
    return datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')


def wrap_angle(theta):
    """Wrap angles to the half-open interval (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=np.float64) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def reversal_matrix(size: int) -> np.ndarray:
    """Anti-identity permutation J with J @ v reversing v."""
    return np.eye(size)[::-1].copy()


def spectral_radius(matrix: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))
