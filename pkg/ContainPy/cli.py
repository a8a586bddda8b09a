#!/usr/bin/env python3
"""
ContainPy v0.1.0 - Command Line Interface

Certify topologies, synthesize gains and run containment scenarios from the
terminal, either through sub-commands or an interactive wizard.

Usage:
    containpy                          # Interactive mode
    containpy list-scenarios           # Built-in scenarios
    containpy verify SCENARIO          # Topology certification only
    containpy synth SCENARIO           # Gain synthesis audit
    containpy run SCENARIO --out DIR   # Simulate and write trace + report
    containpy sweep SCENARIO --runs N  # Parallel seed sweep

SCENARIO is a JSON file or the name of a built-in scenario. The exit code
is 0 exactly when every requested certification passes.

Authors: ContainPy Development Team
"""

import json
import os
import sys
import time
from dataclasses import replace
from typing import List, Optional

import warnings
warnings.filterwarnings('ignore', category=DeprecationWarning)

try:
    import questionary
    from questionary import Style
    QUESTIONARY_AVAILABLE = True
except ImportError:
    QUESTIONARY_AVAILABLE = False

import numpy as np

from .core.console import (
    suppress_warnings, print_banner, print_section, print_config, print_check,
    print_success, print_error, print_info, print_complete, dim,
)
from .core.errors import ContainPyError, ScenarioError
from .core.topology import certify_topology
from .core.utils import as_vector
from .harness.builtin import get_builtin_scenario, list_builtin_scenarios
from .harness.scenario import Scenario, load_scenario

suppress_warnings()

CUSTOM_STYLE = Style([
    ('qmark', 'fg:cyan bold'),
    ('question', 'bold'),
    ('answer', 'fg:green bold'),
    ('pointer', 'fg:cyan bold'),
    ('highlighted', 'fg:cyan bold'),
    ('selected', 'fg:green'),
    ('separator', 'fg:gray'),
    ('instruction', 'fg:gray'),
    ('text', ''),
    ('disabled', 'fg:gray italic'),
]) if QUESTIONARY_AVAILABLE else None

VERBS = {
    'verify': 'Certify the topology (reachability and spectrum)',
    'synth': 'Synthesize and audit the controller gains',
    'run': 'Simulate and evaluate the acceptance checks',
    'sweep': 'Run many seeds in parallel',
}


# =============================================================================
# HELPERS
# =============================================================================

def read_gains(value: str):
    """``"synthesized"`` or a JSON file holding a list or ``{"K": [...]}``."""
    if value == "synthesized":
        return value
    if not os.path.isfile(value):
        raise ScenarioError(f"Gain file not found: {value}")
    with open(value, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if isinstance(data, dict):
        data = data.get("K")
    if not isinstance(data, list):
        raise ScenarioError(f"Gain file {value} must hold a list or an object with key 'K'")
    try:
        return as_vector(data, name=f"Gains in {value}")
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc


def apply_overrides(
    scenario: Scenario,
    seed: Optional[int] = None,
    dt: Optional[float] = None,
    horizon: Optional[float] = None,
    gains: Optional[str] = None,
    runs: Optional[int] = None,
) -> Scenario:
    """Scenario with the command-line overrides applied."""
    changes = {}
    if seed is not None:
        changes["seed"] = seed
        if scenario.noise is not None:
            changes["noise"] = replace(scenario.noise, seed=seed)
    if dt is not None:
        changes["dt"] = dt
    if horizon is not None:
        changes["horizon"] = horizon
    if gains is not None:
        changes["gains"] = read_gains(gains)
    if runs is not None:
        changes["num_runs"] = runs
    return scenario.with_overrides(**changes) if changes else scenario


def _print_scenarios():
    print_section("Built-in Scenarios")
    for name in list_builtin_scenarios():
        sc = get_builtin_scenario(name)
        print(f"  {name:<36} {dim(sc.controller)}")
        if sc.description:
            print(f"  {'':<36} {dim(sc.description)}")


# =============================================================================
# VERBS
# =============================================================================

def cmd_verify(scenario: Scenario) -> int:
    print_section("Topology Certification")
    print_config("Scenario", scenario.name)
    print_config("Leaders", scenario.topology.num_leaders)
    print_config("Followers", scenario.topology.num_followers)
    _, spectrum = certify_topology(scenario.topology, scenario.tolerances)
    print_check("every follower reachable", True)
    print_check("Re spec(L2) > 0", True, f"min Re = {spectrum.lambda_min_real:.6f}")
    print_check(
        "containment weights convex", True,
        f"min = {spectrum.weight_min:.3e}, row error = {spectrum.weight_row_error:.1e}",
    )
    print_check("normalized spectrum inside unit disk at 1", True, f"margin = {spectrum.gershgorin_margin:.6f}")
    return 0


def cmd_synth(scenario: Scenario, out_dir: Optional[str] = None) -> int:
    from .sim.common import prepare_closed_loop

    loop = prepare_closed_loop(scenario)
    syn = loop.synthesis
    print_section("Gain Synthesis")
    print_config("Scenario", scenario.name)
    print_config("Domain", scenario.domain)
    print_config("Lifted order", loop.plant.order)
    print_config("epsilon", f"{syn.epsilon:.6f}")
    print_config("Riccati residual", f"{syn.residual:.3e}")
    print_config("Synthesized K", np.array2string(syn.K, precision=6))
    print_config("Applied K", np.array2string(loop.K, precision=6))
    if loop.weighting is not None:
        print_config("Weighting", loop.weighting if loop.mu is None else f"{loop.weighting} (mu = {loop.mu:.4f})")
    print_check("synthesized gains", syn.certified, f"margin = {syn.margin:.6f}")
    print_check("applied gains", loop.margin > 0, f"margin = {loop.margin:.6f}")
    if loop.estimator is not None:
        print_config("Estimator K_e", np.array2string(loop.estimator.K_e, precision=6))
        print_check("estimator", loop.estimator.certified, f"margin = {loop.estimator.margin:.6f}")

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{scenario.name}_synthesis.json")
        with open(path, "w") as f:
            json.dump({
                "scenario": scenario.name,
                "synthesis": syn.to_dict(),
                "applied_gains": loop.K.tolist(),
                "stability_margin": loop.margin,
                "estimator": None if loop.estimator is None else loop.estimator.to_dict(),
            }, f, indent=2)
        print_success(f"Synthesis written to {path}")
    return 0 if loop.certified else 1


def cmd_run(scenario: Scenario, out_dir: Optional[str], save_zarr: bool = False) -> int:
    from .harness.runner import run

    report = run(scenario, out_dir=out_dir, verbose=True, save_zarr=save_zarr)
    return 0 if report.passed else 1


def cmd_sweep(scenario: Scenario, runs: Optional[int], out_dir: Optional[str]) -> int:
    from .harness.runner import sweep

    start = time.time()
    reports = sweep(scenario, num_runs=runs, out_dir=out_dir, verbose=True)
    print_complete("Sweep complete!", time.time() - start)
    return 0 if all(r.passed for r in reports) else 1


def dispatch(verb: str, scenario: Scenario, out_dir: Optional[str] = None,
             runs: Optional[int] = None, save_zarr: bool = False) -> int:
    if verb == 'verify':
        return cmd_verify(scenario)
    if verb == 'synth':
        return cmd_synth(scenario, out_dir)
    if verb == 'run':
        return cmd_run(scenario, out_dir, save_zarr)
    if verb == 'sweep':
        return cmd_sweep(scenario, runs, out_dir)
    raise ValueError(f"Invalid verb '{verb}'. Must be one of: {list(VERBS)}")


# =============================================================================
# INTERACTIVE MODE
# =============================================================================

def run_interactive():
    """Run the interactive CLI."""
    if not QUESTIONARY_AVAILABLE:
        print_error("Interactive mode requires 'questionary' package.")
        print_info("Install it with: pip install questionary")
        print_info("Or use sub-commands: containpy --help")
        return 1

    print_banner()
    print_info("Welcome to ContainPy Interactive Mode!")
    print_info("Press Ctrl+C at any time to cancel.")
    print()

    try:
        print_section("Scenario")
        choices = [
            questionary.Choice(title=f"{name} - {get_builtin_scenario(name).description}", value=name)
            for name in list_builtin_scenarios()
        ]
        choices.append(questionary.Choice(title="Load a scenario file...", value="__file__"))
        name = questionary.select(
            "Select a scenario:",
            choices=choices,
            style=CUSTOM_STYLE,
            instruction="(use arrow keys)",
        ).ask()
        if name is None:
            return 1
        if name == "__file__":
            name = questionary.path(
                "Scenario JSON file:",
                style=CUSTOM_STYLE,
                validate=lambda x: os.path.isfile(x) or "Please select an existing file",
            ).ask()
            if name is None:
                return 1
        scenario = load_scenario(name)

        print()
        print_section("Action")
        verb = questionary.select(
            "What should be done?",
            choices=[questionary.Choice(title=f"{k} - {v}", value=k) for k, v in VERBS.items()],
            default="run",
            style=CUSTOM_STYLE,
        ).ask()
        if verb is None:
            return 1

        seed = horizon = runs = None
        out_dir = None
        if verb in ('run', 'sweep'):
            seed = questionary.text(
                "Seed:", default=str(scenario.seed), style=CUSTOM_STYLE,
                validate=lambda x: x.lstrip('-').isdigit() or "Enter an integer",
            ).ask()
            horizon = questionary.text(
                "Horizon:", default=str(scenario.horizon), style=CUSTOM_STYLE,
                validate=lambda x: _is_positive(x) or "Enter a positive number",
            ).ask()
            if seed is None or horizon is None:
                return 1
            if verb == 'sweep' or scenario.controller == 'discrete-noisy':
                runs = questionary.text(
                    "Number of runs:", default=str(scenario.num_runs), style=CUSTOM_STYLE,
                    validate=lambda x: (x.isdigit() and int(x) >= 2) or "Enter an integer >= 2",
                ).ask()
                if runs is None:
                    return 1
                runs = int(runs)
            seed, horizon = int(seed), float(horizon)
        if verb in ('run', 'sweep', 'synth'):
            out_dir = questionary.path(
                "Output directory:", only_directories=True, default="./containpy_output",
                style=CUSTOM_STYLE,
            ).ask()
            if out_dir is None:
                return 1

        print()
        print_section("Configuration Summary")
        print_config("Scenario", scenario.name)
        print_config("Controller", scenario.controller)
        print_config("Action", verb)
        if seed is not None:
            print_config("Seed", seed)
            print_config("Horizon", horizon)
        if runs is not None:
            print_config("Runs", runs)
        if out_dir:
            print_config("Output", out_dir)
        print()

        if not questionary.confirm("Proceed?", default=True, style=CUSTOM_STYLE).ask():
            print_info("Cancelled.")
            return 0

        scenario = apply_overrides(scenario, seed=seed, horizon=horizon, runs=runs)
        return dispatch(verb, scenario, out_dir, runs)

    except KeyboardInterrupt:
        print()
        print_info("Cancelled by user.")
        return 1
    except Exception as e:
        print()
        print_error(f"Error: {e}")
        return 1


def _is_positive(text: str) -> bool:
    try:
        return float(text) > 0
    except ValueError:
        return False


# =============================================================================
# COMMAND LINE
# =============================================================================

def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="containpy",
        description="ContainPy v0.1.0 - Containment Control of Multi-Agent Systems",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Interactive Mode:
  containpy                                   Launch interactive wizard

Examples:
  containpy list-scenarios
  containpy verify continuous-highorder-example
  containpy run continuous-highorder-example --out ./results
  containpy run discrete-pin-example --gains synthesized --horizon 300
  containpy sweep robot-application --runs 200 --out ./results
        """,
    )
    parser.add_argument('--version', action='version', version='ContainPy v0.1.0')
    sub = parser.add_subparsers(dest='verb')

    sub.add_parser('list-scenarios', help='List the built-in scenarios')
    for verb, text in VERBS.items():
        p = sub.add_parser(verb, help=text)
        p.add_argument('scenario', help='Scenario JSON file or built-in name')
        p.add_argument('--seed', type=int, help='Override the scenario seed')
        p.add_argument('--dt', type=float, help='Override the integration step (continuous)')
        p.add_argument('--horizon', type=float, help='Override the horizon')
        p.add_argument('--gains', type=str, help="'synthesized' or a JSON gain file")
        p.add_argument('--runs', type=int, help='Monte Carlo / sweep size')
        p.add_argument('-o', '--out', type=str, help='Output directory')
        p.add_argument('--zarr', action='store_true', help='Also archive traces as Zarr')
        p.add_argument('--allow-uncertified', action='store_true',
                       help='Load scenarios with unreachable followers (with a warning)')
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI. Returns the exit code."""
    args_list = sys.argv[1:] if argv is None else list(argv)
    if not args_list:
        return run_interactive()

    args = build_parser().parse_args(args_list)
    if args.verb is None:
        build_parser().print_help()
        return 1
    if args.verb == 'list-scenarios':
        _print_scenarios()
        return 0

    try:
        scenario = load_scenario(args.scenario, allow_uncertified=args.allow_uncertified)
        scenario = apply_overrides(
            scenario, seed=args.seed, dt=args.dt, horizon=args.horizon,
            gains=args.gains, runs=args.runs,
        )
        return dispatch(args.verb, scenario, args.out, args.runs, args.zarr)
    except ContainPyError as e:
        print_error(str(e))
        return 1
    except Exception as e:
        print_error(f"Failed: {e}")
        return 1


def main():
    """Entry point for the containpy command."""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
