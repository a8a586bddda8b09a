"""
Exceptions and Warnings
=======================

Exception hierarchy shared by every ContainPy module.

Validation problems raise subclasses of ``ValueError`` so that callers
catching the built-in type keep working; numerical breakdowns raise
``RuntimeError`` subclasses.

Authors: ContainPy Development Team
Version: 0.1.0
"""


class ContainPyError(Exception):
    """Base class for all ContainPy errors."""


class TopologyError(ContainPyError, ValueError):
    """Adjacency matrix violates the leader/follower graph invariants."""


class CertificationError(ContainPyError):
    """A spectral or containment certificate could not be established."""


class ConvergenceError(ContainPyError, RuntimeError):
    """An iterative Riccati solver did not converge."""


class ScenarioError(ContainPyError, ValueError):
    """Scenario description is malformed or inconsistent."""


class ConditioningWarning(UserWarning):
    """A linear system was solved with a poor condition number."""
