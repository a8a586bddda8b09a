"""
Scenarios
=========

Validated experiment descriptions and their JSON form.

A scenario bundles the interaction graph, the leader polynomials, follower
order and initial states, the controller family and every run parameter.
Canonical JSON keys, in order:

    name, description, controller, topology, leaders, follower_order,
    trajectory_order, initial_states, gains, disturbances, noise,
    estimator_init, dt, sample_dt, horizon, seed, mu, num_runs, robot,
    tolerances

Agents are numbered from 1 in JSON (leaders first). Noise intensities are
listed as ``[from, to, rho]`` triples with rho a scalar or a p-vector.

Authors: ContainPy Development Team
Version: 0.1.0
"""

import json
import os
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Literal, Optional, Tuple, Union

import numpy as np

from ..core.errors import ConditioningWarning, ScenarioError
from ..core.signals import NoiseModel, VectorPolynomial
from ..core.topology import DirectedTopology, check_reachability
from ..core.utils import DEFAULT_TOLERANCES, Tolerances
from ..sim.robot import RobotSetup


# Type alias for the supported controller families
ControllerFamily = Literal[
    "continuous-PIn",
    "continuous-highorder",
    "continuous-estimator",
    "discrete-PIn",
    "discrete-PIn-uniform",
    "discrete-noisy",
    "discrete-highorder",
    "discrete-estimator",
    "robot-application",
]

# Families restricted to single-integrator followers
SINGLE_INTEGRATOR_FAMILIES = (
    "continuous-PIn",
    "discrete-PIn",
    "discrete-PIn-uniform",
    "discrete-noisy",
    "robot-application",
)

ESTIMATOR_FAMILIES = ("continuous-estimator", "discrete-estimator")


def get_controller_families() -> list:
    """Return the list of supported controller families."""
    return [
        "continuous-PIn",
        "continuous-highorder",
        "continuous-estimator",
        "discrete-PIn",
        "discrete-PIn-uniform",
        "discrete-noisy",
        "discrete-highorder",
        "discrete-estimator",
        "robot-application",
    ]


def validate_controller_family(family: str) -> bool:
    """Check whether a controller family name is valid."""
    return family in get_controller_families()


# =============================================================================
# SCENARIO
# =============================================================================

@dataclass(frozen=True, eq=False)
class Scenario:
    """
    One containment experiment.

    Parameters
    ----------
    name : str
        Identifier, also used for output file names.
    controller : ControllerFamily
        Which law (and time domain) to simulate.
    topology : DirectedTopology
        Graph over M leaders and N followers.
    leaders : tuple of VectorPolynomial
        One trajectory per leader, degree at most ``trajectory_order``.
    follower_order : int
        m, the integrator order of every follower.
    trajectory_order : int
        n, the largest leader degree the law is built for.
    initial_states : np.ndarray
        ``(N, m, p)`` follower chains at the start.
    gains : str or np.ndarray
        ``"synthesized"`` or an explicit state-aligned gain of length
        max(m, n + 1).
    disturbances : tuple of VectorPolynomial
        Empty, or one disturbance per follower (single integrators only).
    noise : NoiseModel, optional
        Relative measurement noise (discrete families only).
    estimator_init : str or float
        ``"exact"`` or the standard deviation of the estimator perturbation.
    dt : float
        RK4 step (continuous families).
    sample_dt : float, optional
        Sampling interval of the recorded trace; every step when omitted.
    horizon : float
        Final time, or the number of steps in discrete time.
    seed : int
        Seed of every random draw of the run.
    mu : float or "auto", optional
        Uniform input gain of ``discrete-PIn-uniform``.
    num_runs : int
        Monte Carlo ensemble size of ``discrete-noisy``.
    robot : RobotSetup, optional
        Offset and headings of ``robot-application``.
    tolerances : Tolerances
        Numerical tolerances of certification and acceptance checks.
    """

    name: str
    controller: ControllerFamily
    topology: DirectedTopology
    leaders: Tuple[VectorPolynomial, ...]
    follower_order: int
    trajectory_order: int
    initial_states: np.ndarray
    gains: Union[str, np.ndarray] = "synthesized"
    disturbances: Tuple[VectorPolynomial, ...] = ()
    noise: Optional[NoiseModel] = None
    estimator_init: Union[str, float] = "exact"
    dt: float = 1e-3
    sample_dt: Optional[float] = None
    horizon: float = 60.0
    seed: int = 0
    mu: Optional[Union[float, str]] = None
    num_runs: int = 200
    robot: Optional[RobotSetup] = None
    tolerances: Tolerances = field(default_factory=lambda: DEFAULT_TOLERANCES)
    description: str = ""

    def __post_init__(self):
        _validate(self)

    @property
    def dimension(self) -> int:
        return self.leaders[0].dimension

    @property
    def lifted_order(self) -> int:
        """q = max(m, n + 1)."""
        return max(self.follower_order, self.trajectory_order + 1)

    @property
    def domain(self) -> str:
        return "continuous" if self.controller.startswith("continuous") else "discrete"

    @property
    def weighting(self) -> str:
        return "uniform" if self.controller == "discrete-PIn-uniform" else "normalized"

    @property
    def uses_estimator(self) -> bool:
        return self.controller in ESTIMATOR_FAMILIES

    def with_overrides(self, **changes) -> "Scenario":
        """Copy with some fields replaced (validated again)."""
        return replace(self, **changes)


def _validate(sc: Scenario):
    """Normalise array fields in place and check cross-field consistency."""
    if not validate_controller_family(sc.controller):
        raise ScenarioError(
            f"Invalid controller '{sc.controller}'. "
            f"Must be one of: {get_controller_families()}"
        )
    M, N = sc.topology.num_leaders, sc.topology.num_followers
    m, n = int(sc.follower_order), int(sc.trajectory_order)
    if m < 1 or n < 0:
        raise ScenarioError(f"Need follower_order >= 1 and trajectory_order >= 0, got m={m}, n={n}")
    object.__setattr__(sc, "follower_order", m)
    object.__setattr__(sc, "trajectory_order", n)

    leaders = tuple(sc.leaders)
    if len(leaders) != M:
        raise ScenarioError(f"Topology has {M} leaders but {len(leaders)} trajectories were given")
    p = leaders[0].dimension
    for idx, poly in enumerate(leaders, start=1):
        if poly.dimension != p:
            raise ScenarioError(f"Leader {idx} has dimension {poly.dimension}, expected {p}")
        if poly.degree > n:
            raise ScenarioError(
                f"Leader {idx} has degree {poly.degree} > trajectory_order {n}"
            )
    object.__setattr__(sc, "leaders", leaders)

    if sc.controller in SINGLE_INTEGRATOR_FAMILIES and m != 1:
        raise ScenarioError(f"Controller '{sc.controller}' needs follower_order 1, got {m}")
    if sc.controller in ESTIMATOR_FAMILIES and m < 2:
        raise ScenarioError(f"Controller '{sc.controller}' needs follower_order >= 2, got {m}")

    x0 = np.array(sc.initial_states, dtype=np.float64)
    if x0.ndim == 2 and m == 1:
        x0 = x0[:, None, :]
    if x0.shape != (N, m, p):
        raise ScenarioError(f"initial_states must have shape {(N, m, p)}, got {x0.shape}")
    x0.setflags(write=False)
    object.__setattr__(sc, "initial_states", x0)

    q = max(m, n + 1)
    if isinstance(sc.gains, str):
        if sc.gains != "synthesized":
            raise ScenarioError(f"gains must be 'synthesized' or a list, got '{sc.gains}'")
    else:
        K = np.array(sc.gains, dtype=np.float64).reshape(-1)
        if K.size != q:
            raise ScenarioError(f"Explicit gains must have length max(m, n+1) = {q}, got {K.size}")
        K.setflags(write=False)
        object.__setattr__(sc, "gains", K)

    dist = tuple(sc.disturbances or ())
    if dist:
        if len(dist) != N:
            raise ScenarioError(f"Need one disturbance per follower ({N}), got {len(dist)}")
        if m != 1 and not all(d.is_zero() for d in dist):
            raise ScenarioError("Disturbances are only supported for single-integrator followers")
        if any(d.dimension != p for d in dist):
            raise ScenarioError(f"Disturbances must have dimension {p}")
    object.__setattr__(sc, "disturbances", dist)

    domain = "continuous" if sc.controller.startswith("continuous") else "discrete"
    if sc.noise is not None:
        if domain == "continuous":
            raise ScenarioError("Measurement noise is only modelled in discrete time")
        if sc.noise.dimension != p:
            raise ScenarioError(f"Noise dimension {sc.noise.dimension} does not match p={p}")
    if sc.controller == "discrete-noisy" and sc.noise is None:
        raise ScenarioError("Controller 'discrete-noisy' needs a noise model")

    if domain == "continuous" and not (sc.dt and sc.dt > 0):
        raise ScenarioError(f"dt must be positive, got {sc.dt}")
    if not (sc.horizon and sc.horizon > 0):
        raise ScenarioError(f"horizon must be positive, got {sc.horizon}")
    if sc.sample_dt is not None and sc.sample_dt <= 0:
        raise ScenarioError(f"sample_dt must be positive, got {sc.sample_dt}")

    init = sc.estimator_init
    if not (init == "exact" or isinstance(init, (int, float))):
        raise ScenarioError(f"estimator_init must be 'exact' or a number, got {init!r}")

    mu = sc.mu
    if mu is not None and mu != "auto":
        if not (0.0 < float(mu) < 1.0):
            raise ScenarioError(f"mu must lie in (0, 1), got {mu}")
    if int(sc.num_runs) < 1:
        raise ScenarioError(f"num_runs must be >= 1, got {sc.num_runs}")
    object.__setattr__(sc, "num_runs", int(sc.num_runs))
    object.__setattr__(sc, "seed", int(sc.seed))

    if sc.controller == "robot-application":
        if p != 2:
            raise ScenarioError("Robot application needs planar agents (p = 2)")
        setup = sc.robot or RobotSetup()
        if setup.headings and len(setup.headings) != N:
            raise ScenarioError(f"Need {N} robot headings, got {len(setup.headings)}")
        object.__setattr__(sc, "robot", setup)
    elif sc.robot is not None:
        raise ScenarioError("robot settings are only valid for 'robot-application'")


# =============================================================================
# JSON
# =============================================================================

def _noise_from_dict(data: Optional[dict], p: int, seed: int) -> Optional[NoiseModel]:
    if data is None:
        return None
    intensities = {}
    for pos, entry in enumerate(data.get("intensities", [])):
        try:
            src, dst, rho = entry
        except (TypeError, ValueError):
            raise ScenarioError(f"Noise entry #{pos} {entry!r} is not a [from, to, rho] triple") from None
        intensities[(int(src) - 1, int(dst) - 1)] = rho
    return NoiseModel(dimension=p, intensities=intensities, seed=int(data.get("seed", seed)))


def _noise_to_dict(model: Optional[NoiseModel]) -> Optional[dict]:
    if model is None:
        return None
    entries = sorted(model.intensities.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    return {
        "seed": model.seed,
        "intensities": [[j + 1, i + 1, rho.tolist()] for (j, i), rho in entries],
    }


def scenario_from_dict(
    data: Dict[str, Any],
    allow_uncertified: bool = False,
) -> Scenario:
    """
    Build a validated scenario from its JSON form.

    Parameters
    ----------
    data : dict
        Parsed scenario JSON.
    allow_uncertified : bool
        Downgrade an unreachable follower from an error to a
        ``ConditioningWarning``.

    Raises
    ------
    ScenarioError
        On schema violations, malformed edges, length mismatches and, unless
        allowed, followers with no path from a leader.
    """
    try:
        topo_data = data["topology"]
        topology = DirectedTopology.from_edges(
            topo_data["leaders"], topo_data["followers"], topo_data["edges"]
        )
        leaders = tuple(VectorPolynomial.from_dict(d) for d in data["leaders"])
        disturbances = tuple(VectorPolynomial.from_dict(d) for d in data.get("disturbances") or [])
        p = leaders[0].dimension if leaders else 0
        seed = int(data.get("seed", 0))
        gains = data.get("gains", "synthesized")
        robot = data.get("robot")
        scenario = Scenario(
            name=str(data["name"]),
            description=str(data.get("description", "")),
            controller=data["controller"],
            topology=topology,
            leaders=leaders,
            follower_order=int(data["follower_order"]),
            trajectory_order=int(data["trajectory_order"]),
            initial_states=np.asarray(data["initial_states"], dtype=np.float64),
            gains=gains if isinstance(gains, str) else np.asarray(gains, dtype=np.float64),
            disturbances=disturbances,
            noise=_noise_from_dict(data.get("noise"), p, seed),
            estimator_init=data.get("estimator_init", "exact"),
            dt=float(data.get("dt", 1e-3)),
            sample_dt=None if data.get("sample_dt") is None else float(data["sample_dt"]),
            horizon=float(data.get("horizon", 60.0)),
            seed=seed,
            mu=data.get("mu"),
            num_runs=int(data.get("num_runs", 200)),
            robot=None if robot is None else RobotSetup.from_dict(robot),
            tolerances=DEFAULT_TOLERANCES.with_overrides(data.get("tolerances")),
        )
    except ScenarioError:
        raise
    except KeyError as exc:
        raise ScenarioError(f"Scenario is missing required field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"Invalid scenario: {exc}") from exc

    ok, unreachable = check_reachability(scenario.topology)
    if not ok:
        message = f"Followers {unreachable} have no directed path from any leader"
        if not allow_uncertified:
            raise ScenarioError(message)
        warnings.warn(message, ConditioningWarning, stacklevel=2)
    return scenario


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Canonical JSON form; only tolerances that differ from the defaults are kept."""
    tol = {
        f.name: getattr(scenario.tolerances, f.name)
        for f in fields(Tolerances)
        if getattr(scenario.tolerances, f.name) != getattr(DEFAULT_TOLERANCES, f.name)
    }
    gains = scenario.gains if isinstance(scenario.gains, str) else scenario.gains.tolist()
    return {
        "name": scenario.name,
        "description": scenario.description,
        "controller": scenario.controller,
        "topology": scenario.topology.to_dict(),
        "leaders": [poly.to_dict() for poly in scenario.leaders],
        "follower_order": scenario.follower_order,
        "trajectory_order": scenario.trajectory_order,
        "initial_states": scenario.initial_states.tolist(),
        "gains": gains,
        "disturbances": [poly.to_dict() for poly in scenario.disturbances],
        "noise": _noise_to_dict(scenario.noise),
        "estimator_init": scenario.estimator_init,
        "dt": float(scenario.dt),
        "sample_dt": None if scenario.sample_dt is None else float(scenario.sample_dt),
        "horizon": float(scenario.horizon),
        "seed": scenario.seed,
        "mu": scenario.mu,
        "num_runs": scenario.num_runs,
        "robot": None if scenario.controller != "robot-application" else scenario.robot.to_dict(),
        "tolerances": tol,
    }


def load_scenario(path_or_name: str, allow_uncertified: bool = False) -> Scenario:
    """
    Load a scenario from a JSON file or by built-in name.

    Raises
    ------
    ScenarioError
        If the file cannot be parsed, the name is unknown, or validation
        fails.
    """
    if not os.path.isfile(path_or_name):
        from .builtin import get_builtin_scenario, list_builtin_scenarios

        if path_or_name in list_builtin_scenarios():
            return get_builtin_scenario(path_or_name)
        raise ScenarioError(
            f"'{path_or_name}' is neither a scenario file nor a built-in scenario.\n"
            f"Built-in scenarios: {list_builtin_scenarios()}"
        )
    try:
        with open(path_or_name, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"Could not parse {path_or_name}: {exc}") from exc
    return scenario_from_dict(data, allow_uncertified=allow_uncertified)


def save_scenario(scenario: Scenario, path: str) -> str:
    """Write the canonical JSON form and return the path."""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(scenario_to_dict(scenario), handle, indent=2)
        handle.write("\n")
    return path
