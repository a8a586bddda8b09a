"""
Scenario Runner
===============

Dispatch a scenario to the matching simulator, evaluate the acceptance
checks on the recorded data and write the CSV trace and JSON report.

Sweeps fan independent runs out with dask. Every run is keyed by its own
seed and noise stream, so the reports do not depend on the scheduler.

Authors: ContainPy Development Team
Version: 0.1.0
"""

import json
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import dask
import numpy as np

from ..core.console import (
    print_banner, print_check, print_complete, print_config, print_info,
    print_section, print_success, print_warning,
)
from ..core.utils import REPORT_SCHEMA_VERSION, SOFTWARE_VERSION, utc_timestamp
from ..sim.common import ClosedLoop, DecayFit, cross_validation_gap, fit_decay, prepare_closed_loop
from ..sim.continuous import (
    run_high_order_estimator,
    run_high_order_full_info,
    run_lifted_closed_loop,
    run_pin_single_integrator,
)
from ..sim.discrete import (
    run_discrete_high_order,
    run_discrete_pin,
    run_discrete_pin_noisy,
    run_lifted_discrete,
    simulate_discrete,
    summarize_ensemble,
)
from ..sim.robot import run_robot_application
from ..sim.trace import ContainmentTrace, MonteCarloReport, save_trace_zarr
from .scenario import Scenario, scenario_to_dict


# Families whose agent-level runs have a noise-free lifted counterpart
CROSS_CHECKED_FAMILIES = (
    "continuous-PIn", "continuous-highorder",
    "discrete-PIn", "discrete-PIn-uniform", "discrete-highorder",
)

NOISY_FAMILIES = ("discrete-noisy", "robot-application")


# =============================================================================
# REPORT
# =============================================================================

@dataclass(eq=False)
class RunReport:
    """
    Outcome of one scenario run.

    ``flags`` holds one boolean per acceptance check, each computed from
    the recorded trace (and ensemble, for noisy families).
    """

    scenario: Scenario
    loop: ClosedLoop
    trace: ContainmentTrace
    decay: DecayFit
    containment_ratio: float
    flags: Dict[str, bool]
    estimator_decay: Optional[DecayFit] = None
    cross_validation: Optional[float] = None
    monte_carlo: Optional[MonteCarloReport] = None
    elapsed: float = 0.0
    paths: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    @property
    def certified(self) -> bool:
        return bool(self.flags.get("certified", False))

    def to_dict(self) -> Dict[str, Any]:
        """JSON report (``schema_version`` 1)."""
        loop = self.loop
        out = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "software": f"ContainPy v{SOFTWARE_VERSION}",
            "created": utc_timestamp(),
            "scenario": scenario_to_dict(self.scenario),
            "controller": self.scenario.controller,
            "seed": self.scenario.seed,
            "synthesis": loop.synthesis.to_dict(),
            "spectrum": loop.spectrum.to_dict(),
            "applied_gains": {
                "K": loop.K.tolist(),
                "kappa": loop.kappa.tolist(),
                "explicit": loop.explicit_gains,
                "stability_margin": loop.margin,
                "weighting": loop.weighting,
                "mu": loop.mu,
            },
            "estimator": None if loop.estimator is None else loop.estimator.to_dict(),
            "decay_fit": self.decay.to_dict(),
            "estimator_decay_fit": None if self.estimator_decay is None else self.estimator_decay.to_dict(),
            "containment_error": {
                "initial": float(self.trace.containment_error[0]),
                "final": float(self.trace.containment_error[-1]),
                "ratio": self.containment_ratio,
            },
            "cross_validation_gap": self.cross_validation,
            "monte_carlo": None if self.monte_carlo is None else self.monte_carlo.to_dict(),
            "flags": dict(self.flags),
            "passed": self.passed,
            "elapsed_seconds": self.elapsed,
            "files": dict(self.paths),
        }
        return out


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_report(report: RunReport, out_dir: str, save_zarr: bool = False) -> Dict[str, str]:
    """
    Write ``<name>_trace.csv`` and ``<name>_report.json`` (plus an optional
    Zarr store) and return their paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    name = report.scenario.name
    paths = {"trace": report.trace.to_csv(os.path.join(out_dir, f"{name}_trace.csv"))}
    if save_zarr:
        paths["zarr"] = save_trace_zarr(report.trace.to_dataset(), out_dir, f"{name}_trace")
        if report.monte_carlo is not None:
            paths["monte_carlo_zarr"] = save_trace_zarr(
                report.monte_carlo.to_dataset(), out_dir, f"{name}_monte_carlo"
            )
    report_path = os.path.join(out_dir, f"{name}_report.json")
    paths["report"] = report_path
    report.paths = dict(paths)
    with open(report_path, "w") as f:
        json.dump(report.to_dict(), f, indent=2, default=_json_default)
    return paths


# =============================================================================
# CHECKS
# =============================================================================

def _robot_tail_ok(trace: ContainmentTrace, scenario: Scenario) -> bool:
    """Mean slave hull distance over the last steps below a fraction of the initial one."""
    tol = scenario.tolerances
    start = float(trace.hull_distances[0].mean())
    tail = float(trace.hull_distances[-tol.robot_tail_steps:].mean())
    return tail <= tol.robot_tail_fraction * start


def evaluate_flags(
    scenario: Scenario,
    loop: ClosedLoop,
    trace: ContainmentTrace,
    decay: DecayFit,
    estimator_decay: Optional[DecayFit],
    gap: Optional[float],
    monte_carlo: Optional[MonteCarloReport],
) -> Dict[str, bool]:
    """Pass/fail of every check that applies to the scenario's family."""
    tol = scenario.tolerances
    flags = {"certified": bool(loop.certified)}
    if scenario.controller not in NOISY_FAMILIES:
        flags["decay"] = bool(decay.decaying)
        flags["containment"] = bool(trace.final_ratio() < tol.containment_ratio)
    if gap is not None:
        flags["cross_validation"] = bool(gap < tol.cross_validation_gap)
    if estimator_decay is not None:
        flags["estimator_decay"] = bool(estimator_decay.decaying)
        flags["estimator_final"] = bool(trace.estimator_error[-1] < tol.estimator_final)
    if monte_carlo is not None:
        flags["mean_converged"] = monte_carlo.mean_converged
        flags["second_moment_bounded"] = monte_carlo.second_moment_bounded
    if scenario.controller == "robot-application":
        flags["robot_containment"] = _robot_tail_ok(trace, scenario)
    return flags


# =============================================================================
# RUN
# =============================================================================

def _simulate(
    scenario: Scenario,
    loop: ClosedLoop,
    verbose: bool,
    num_runs: Optional[int],
    scheduler: str,
):
    family = scenario.controller
    monte_carlo = None
    if family == "continuous-PIn":
        trace = run_pin_single_integrator(scenario, loop, verbose=verbose)
    elif family == "continuous-highorder":
        trace = run_high_order_full_info(scenario, loop, verbose=verbose)
    elif family == "continuous-estimator":
        trace = run_high_order_estimator(scenario, loop, verbose=verbose)
    elif family in ("discrete-PIn", "discrete-PIn-uniform"):
        trace = run_discrete_pin(scenario, loop, verbose=verbose)
    elif family == "discrete-highorder":
        trace = run_discrete_high_order(scenario, loop, info="full", verbose=verbose)
    elif family == "discrete-estimator":
        trace = run_discrete_high_order(scenario, loop, info="estimator", verbose=verbose)
    elif family == "discrete-noisy":
        monte_carlo = run_discrete_pin_noisy(
            scenario, loop, num_runs=num_runs, scheduler=scheduler, verbose=verbose
        )
        trace = simulate_discrete(
            scenario, loop, False, scenario.noise.for_run(0), False, "discrete PI^n (noisy)"
        )
    elif family == "robot-application":
        trace = run_robot_application(scenario, loop, verbose=verbose)
    else:
        raise ValueError(f"No simulator for controller family '{family}'")
    return trace, monte_carlo


def _lifted_gap(scenario: Scenario, loop: ClosedLoop, trace: ContainmentTrace) -> float:
    if scenario.domain == "continuous":
        lifted = run_lifted_closed_loop(scenario, loop)
    else:
        lifted = run_lifted_discrete(scenario, loop)
    return cross_validation_gap(trace.positions, lifted.positions)


def run(
    scenario: Scenario,
    out_dir: Optional[str] = None,
    verbose: bool = False,
    save_zarr: bool = False,
    cross_validate: bool = True,
    num_runs: Optional[int] = None,
    scheduler: str = "threads",
) -> RunReport:
    """
    Run a scenario end to end.

    Parameters
    ----------
    scenario : Scenario
        Validated scenario.
    out_dir : str, optional
        When given, ``<name>_trace.csv`` and ``<name>_report.json`` are
        written there.
    verbose : bool
        Print the configuration, progress bars and the check summary.
    save_zarr : bool
        Also archive the trace as a Zstd-compressed Zarr store.
    cross_validate : bool
        Compare against the lifted closed loop for noise-free full
        information families.
    num_runs : int, optional
        Ensemble size for ``discrete-noisy`` (defaults to the scenario's).
    scheduler : str
        Dask scheduler for the ensemble.

    Returns
    -------
    RunReport

    Raises
    ------
    CertificationError
        If the topology fails certification.
    """
    start_time = time.time()
    if verbose:
        print_banner()
        print_section("Scenario")
        print_config("Name", scenario.name)
        print_config("Controller", scenario.controller)
        print_config("Agents", f"{scenario.topology.num_leaders} leaders, {scenario.topology.num_followers} followers")
        print_config("Orders", f"m = {scenario.follower_order}, n = {scenario.trajectory_order}")
        print_config("Gains", "synthesized" if isinstance(scenario.gains, str) else "explicit")

    loop = prepare_closed_loop(scenario)
    if verbose:
        print_config("Stability margin", f"{loop.margin:.6f}")
        if not loop.certified:
            print_warning("Applied gains are not certified for this topology")

    trace, monte_carlo = _simulate(scenario, loop, verbose, num_runs, scheduler)

    gap = None
    if cross_validate and scenario.controller in CROSS_CHECKED_FAMILIES:
        if verbose:
            print_info("Cross-checking against the lifted closed loop...")
        gap = _lifted_gap(scenario, loop, trace)

    decay = fit_decay(trace.times, trace.tracking_error, scenario.tolerances)
    estimator_decay = None
    if trace.estimator_error is not None:
        estimator_decay = fit_decay(trace.times, trace.estimator_error, scenario.tolerances)

    flags = evaluate_flags(scenario, loop, trace, decay, estimator_decay, gap, monte_carlo)
    report = RunReport(
        scenario=scenario,
        loop=loop,
        trace=trace,
        decay=decay,
        containment_ratio=trace.final_ratio(),
        flags=flags,
        estimator_decay=estimator_decay,
        cross_validation=gap,
        monte_carlo=monte_carlo,
        elapsed=time.time() - start_time,
    )

    if out_dir:
        write_report(report, out_dir, save_zarr=save_zarr)
        if verbose:
            print_success(f"Report written to {report.paths['report']}")

    if verbose:
        print_summary(report)
        print_complete("Run complete!", report.elapsed)
    return report


def print_summary(report: RunReport):
    """Check-by-check summary of a run."""
    print_section("Checks")
    details = {
        "certified": f"margin {report.loop.margin:.4g}",
        "decay": f"beta {report.decay.beta:.4g}",
        "containment": f"E_r ratio {report.containment_ratio:.3e}",
    }
    if report.cross_validation is not None:
        details["cross_validation"] = f"gap {report.cross_validation:.3e}"
    if report.estimator_decay is not None:
        details["estimator_final"] = f"||Z_hat|| {float(report.trace.estimator_error[-1]):.3e}"
    for name, passed in report.flags.items():
        print_check(name.replace("_", " "), passed, details.get(name))


# =============================================================================
# SWEEP
# =============================================================================

def seed_variants(scenario: Scenario, num_runs: int) -> List[Scenario]:
    """Copies of ``scenario`` with seed + r and noise stream r."""
    variants = []
    for r in range(int(num_runs)):
        changes: Dict[str, Any] = {"seed": scenario.seed + r, "name": f"{scenario.name}-run{r:03d}"}
        if scenario.noise is not None:
            changes["noise"] = scenario.noise.for_run(r)
        variants.append(scenario.with_overrides(**changes))
    return variants


def sweep(
    scenario: Scenario,
    overrides: Optional[Sequence[Dict[str, Any]]] = None,
    num_runs: Optional[int] = None,
    out_dir: Optional[str] = None,
    scheduler: str = "threads",
    verbose: bool = False,
) -> List[RunReport]:
    """
    Run many variants of one scenario in parallel.

    Parameters
    ----------
    overrides : sequence of dict, optional
        One ``Scenario.with_overrides`` mapping per variant. Without it the
        sweep covers ``num_runs`` seeds (and noise streams).
    num_runs : int, optional
        Seed count when no overrides are given; defaults to
        ``scenario.num_runs``.
    out_dir : str, optional
        When given, ``<name>_sweep.json`` is written there with one summary
        per run and, for noisy discrete families, the per-step ensemble
        mean and second moment of the hull distance.

    Returns
    -------
    list of RunReport
        In variant order.
    """
    if overrides:
        variants = [scenario.with_overrides(**o) for o in overrides]
    else:
        variants = seed_variants(scenario, num_runs or scenario.num_runs)

    if verbose:
        print_section("Sweep")
        print_config("Scenario", scenario.name)
        print_config("Variants", len(variants))
        print_config("Scheduler", scheduler)
        print_info("Running variants...")

    # Ensembles inside a sweep run serially; the sweep itself is the parallel layer
    tasks = [
        dask.delayed(run)(v, cross_validate=False, scheduler="synchronous")
        for v in variants
    ]
    reports = list(dask.compute(*tasks, scheduler=scheduler))

    if out_dir:
        path = write_sweep(scenario, reports, out_dir)
        if verbose:
            print_success(f"Sweep summary written to {path}")
    if verbose:
        passed = sum(r.passed for r in reports)
        print_config("Passed", f"{passed}/{len(reports)}")
    return reports


def sweep_ensemble(reports: Sequence[RunReport]) -> Optional[MonteCarloReport]:
    """Ensemble statistics across a noisy sweep, or None when they do not apply."""
    if len(reports) < 2:
        return None
    if any(r.scenario.noise is None or r.scenario.domain != "discrete" for r in reports):
        return None
    return summarize_ensemble([r.trace for r in reports], reports[0].scenario.noise.seed)


def write_sweep(scenario: Scenario, reports: Sequence[RunReport], out_dir: str) -> str:
    """Write ``<name>_sweep.json`` and return its path."""
    os.makedirs(out_dir, exist_ok=True)
    ensemble = sweep_ensemble(reports)
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "software": f"ContainPy v{SOFTWARE_VERSION}",
        "created": utc_timestamp(),
        "scenario": scenario.name,
        "num_runs": len(reports),
        "runs": [
            {
                "name": r.scenario.name,
                "seed": r.scenario.seed,
                "containment_ratio": r.containment_ratio,
                "decay_beta": r.decay.beta,
                "flags": dict(r.flags),
                "passed": r.passed,
            }
            for r in reports
        ],
        "monte_carlo": None if ensemble is None else ensemble.to_dict(),
    }
    path = os.path.join(out_dir, f"{scenario.name}_sweep.json")
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, default=_json_default)
    return path
