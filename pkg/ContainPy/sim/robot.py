"""
Mobile Robot Application
========================

Containment of differential-drive robots through feedback linearization.

Each slave robot controls the point phi_i = c_i + d (cos theta_i, sin theta_i)
at a fixed offset d ahead of its wheel axle centre c_i. Under that change of
variables the unicycle behaves as a single integrator phi_i[k+1] =
phi_i[k] + u_i[k] + delta_i[k] at sampling period 1, so the discrete PI^n
law applies unchanged. The wheel commands (v_i, omega_i) that realise u_i
are recovered afterwards and the headings are propagated with them.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..core.console import print_config, print_info, print_section
from ..core.utils import SAMPLING_PERIOD, wrap_angle
from .common import ClosedLoop, prepare_closed_loop
from .discrete import simulate_discrete
from .trace import ContainmentTrace

if TYPE_CHECKING:
    from ..harness.scenario import Scenario


# =============================================================================
# POSES
# =============================================================================

@dataclass(frozen=True)
class RobotPose:
    """
    Pose of a differential-drive robot.

    Parameters
    ----------
    x, y : float
        Wheel axle centre (m).
    theta : float
        Heading (rad), stored wrapped to (-pi, pi].
    offset : float
        Distance d > 0 from the centre to the controlled point (m).
    """

    x: float
    y: float
    theta: float
    offset: float

    def __post_init__(self):
        if not self.offset > 0:
            raise ValueError(f"Robot offset must be positive, got {self.offset}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def point(self) -> np.ndarray:
        """The feedback-linearized point phi."""
        return np.array([
            self.x + self.offset * np.cos(self.theta),
            self.y + self.offset * np.sin(self.theta),
        ])

    @classmethod
    def from_point(cls, point, theta: float, offset: float) -> "RobotPose":
        """Pose whose controlled point sits at ``point``."""
        px, py = np.asarray(point, dtype=np.float64).reshape(2)
        return cls(
            x=float(px - offset * np.cos(theta)),
            y=float(py - offset * np.sin(theta)),
            theta=theta,
            offset=offset,
        )


@dataclass(frozen=True)
class RobotSetup:
    """Offset shared by all slave robots and their initial headings."""

    offset: float = 0.1
    headings: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.offset > 0:
            raise ValueError(f"Robot offset must be positive, got {self.offset}")
        object.__setattr__(self, "headings", tuple(float(wrap_angle(t)) for t in self.headings))

    @classmethod
    def from_dict(cls, data: dict) -> "RobotSetup":
        return cls(offset=float(data.get("offset", 0.1)), headings=tuple(data.get("headings", ())))

    def to_dict(self) -> dict:
        return {"offset": self.offset, "headings": list(self.headings)}


# =============================================================================
# FEEDBACK LINEARIZATION
# =============================================================================

def wheel_commands(u, theta, offset: float) -> np.ndarray:
    """
    Vectorised inverse of the feedback linearization.

    ``u`` is (..., 2) and ``theta`` broadcasts against its leading shape.
    Returns (..., 2) holding (v, omega).
    """
    u = np.asarray(u, dtype=np.float64)
    c, s = np.cos(theta), np.sin(theta)
    v = c * u[..., 0] + s * u[..., 1]
    omega = (-s * u[..., 0] + c * u[..., 1]) / offset
    return np.stack([v, omega], axis=-1)


def recover_wheel_commands(u, pose: RobotPose) -> Tuple[float, float]:
    """
    Linear and angular velocity that move the controlled point with velocity u.

    v = cos(theta) u_x + sin(theta) u_y and
    omega = (-sin(theta) u_x + cos(theta) u_y) / d.

    Examples
    --------
    >>> recover_wheel_commands([1.0, 0.0], RobotPose(0.0, 0.0, 0.0, 0.1))
    (1.0, 0.0)
    """
    v, omega = wheel_commands(np.asarray(u, dtype=np.float64).reshape(2), pose.theta, pose.offset)
    return float(v), float(omega)


def feedback_linearize(v: float, omega: float, pose: RobotPose) -> np.ndarray:
    """
    Velocity of the controlled point produced by (v, omega).

    u_x = v cos(theta) - d omega sin(theta),
    u_y = v sin(theta) + d omega cos(theta).
    """
    c, s = np.cos(pose.theta), np.sin(pose.theta)
    d = pose.offset
    return np.array([v * c - d * omega * s, v * s + d * omega * c])


def pose_centers(points: np.ndarray, headings: np.ndarray, offset: float) -> np.ndarray:
    """Axle centres c = phi - d (cos theta, sin theta); shapes (..., 2) and (...)."""
    direction = np.stack([np.cos(headings), np.sin(headings)], axis=-1)
    return np.asarray(points) - offset * direction


def propagate_headings(inputs: np.ndarray, theta0, offset: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Heading and wheel-command series under zero-order hold.

    Parameters
    ----------
    inputs : np.ndarray
        (K+1, N, 2) applied point velocities u_i[k].
    theta0 : array-like
        (N,) initial headings.

    Returns
    -------
    headings : np.ndarray
        (K+1, N), theta[k+1] = wrap(theta[k] + T omega[k]).
    commands : np.ndarray
        (K+1, N, 2) wheel commands (v, omega).
    """
    steps = inputs.shape[0]
    headings = np.empty(inputs.shape[:2])
    commands = np.empty(inputs.shape)
    theta = wrap_angle(np.asarray(theta0, dtype=np.float64).reshape(-1))
    for k in range(steps):
        headings[k] = theta
        commands[k] = wheel_commands(inputs[k], theta, offset)
        theta = wrap_angle(theta + SAMPLING_PERIOD * commands[k, :, 1])
    return headings, commands


# =============================================================================
# APPLICATION RUN
# =============================================================================

def run_robot_application(
    scenario: "Scenario",
    loop: Optional[ClosedLoop] = None,
    verbose: bool = False,
) -> ContainmentTrace:
    """
    Noisy discrete PI^n containment of slave robots led by master robots.

    The linearized points follow the discrete law with the scenario's
    disturbance and measurement noise (drawn from the stream stored in the
    noise model, so seed sweeps pass ``noise.for_run(r)``). Headings start
    from ``scenario.robot.headings`` (zeros when empty).

    Returns
    -------
    ContainmentTrace
        With ``headings`` (K+1, N) and ``wheel_commands`` (K+1, N, 2).

    Raises
    ------
    ValueError
        If agents are not planar single integrators or sampling is
        coarser than every step.
    """
    if scenario.dimension != 2 or scenario.follower_order != 1:
        raise ValueError("Robot application needs planar single-integrator points")
    if scenario.sample_dt not in (None, 1, 1.0):
        raise ValueError("Robot runs record every step; sample_dt must be 1")
    setup = scenario.robot or RobotSetup()
    N = scenario.topology.num_followers
    theta0 = np.asarray(setup.headings) if setup.headings else np.zeros(N)
    if theta0.size != N:
        raise ValueError(f"Need {N} initial headings, got {theta0.size}")

    loop = loop or prepare_closed_loop(scenario)
    noise = scenario.noise

    if verbose:
        print_section("Robot Setup")
        print_config("Slaves", N)
        print_config("Offset d", f"{setup.offset} m")
        print_config("Noise", "on" if noise is not None and not noise.is_silent else "off")

    trace = simulate_discrete(
        scenario, loop, False, noise, verbose, "robot PI^n (feedback linearized)"
    )

    if verbose:
        print_info("Recovering wheel commands...")
    headings, commands = propagate_headings(trace.inputs, theta0, setup.offset)
    attrs = dict(trace.attrs)
    attrs["robot_offset"] = setup.offset
    return replace(trace, headings=headings, wheel_commands=commands, attrs=attrs)
