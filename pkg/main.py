#!/usr/bin/env python3
"""Ridgeless risk laboratory: main entry point.

Usage:
    python main.py ar1_sweep --config config/presets/ar1_contour.yaml
    python main.py descent_curve --seed 7 --n-x 200 --out results/descent.csv
    python main.py verify [--inject-fault]
    python main.py list
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml
from rich.console import Console
from rich.table import Table

# Ensure project root is on sys.path
sys.path.insert(0, str(Path(__file__).resolve().parent))

from config import EXPERIMENTS, ExperimentConfig, apply_overrides, load_config
from experiments import ExperimentRegistry, ExperimentResult, default_registry
from linalg.errors import ConfigError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

console = Console(stderr=True)

# --------------------------------------------------------------------------- #
# Logging
# --------------------------------------------------------------------------- #

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(verbose: bool = False):
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


# --------------------------------------------------------------------------- #
# CLI
# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Ridgeless interpolation risk laboratory")
    parser.add_argument("experiment", choices=[*EXPERIMENTS, "list"], help="Experiment to run")
    parser.add_argument("--config", type=str, help="Path to override config YAML (or a preset name)")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--out", type=str, help="Output file path")
    parser.add_argument("--n-x", type=int, dest="n_x", help="Number of design draws")
    parser.add_argument("--n-eps", type=int, dest="n_eps", help="Noise draws per design (empirical-cov mode)")
    parser.add_argument("--empirical-cov", action="store_true", default=None,
                        help="Estimate Var(beta_hat | X) from noise draws instead of the trace identity")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--inject-fault", action="store_true", default=None,
                        help="verify only: drop the Haar sign correction (negative control)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, {
        ("run", "seed"): args.seed,
        ("run", "threads"): args.threads,
        ("mc", "n_x"): args.n_x,
        ("mc", "n_eps"): args.n_eps,
        ("mc", "empirical_cov"): args.empirical_cov,
        (args.experiment, "output"): args.out,
        ("verify", "inject_fault"): args.inject_fault,
    })
    return ExperimentConfig.from_dict(cfg, args.experiment)


def print_summary(name: str, result: ExperimentResult):
    if name == "verify" and result.data:
        table = Table(title="verify")
        for col in ("check", "status", "observed", "expected", "tolerance", "detail"):
            table.add_column(col)
        for r in result.data["checks"]:
            status = "[green]PASS[/green]" if r.passed else "[red]FAIL[/red]"
            table.add_row(r.name, status, f"{r.observed:.4g}", f"{r.expected:.4g}", f"{r.tolerance:.3g}", r.detail)
        console.print(table)
    elif result.success:
        console.print(f"[green]✓[/green] {name}: {result.data}")
    if not result.success:
        console.print(f"[red]✗[/red] {name}: {result.error}")
    for f in result.generated_files or []:
        console.print(f"  wrote {f['path']}")


def list_experiments(registry: ExperimentRegistry):
    table = Table(title="experiments")
    table.add_column("name")
    table.add_column("description")
    for exp in registry.all_experiments():
        table.add_row(exp.name, exp.description)
    console.print(table)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    log = logging.getLogger(__name__)
    registry = default_registry()

    if args.experiment == "list":
        list_experiments(registry)
        return EXIT_OK

    try:
        cfg = resolve_config(args)
    except (ConfigError, FileNotFoundError, yaml.YAMLError) as exc:
        log.error("Invalid configuration: %s", exc)
        console.print(f"[red]config error[/red] {exc}")
        return EXIT_CONFIG

    log.info("Running %s (seed=%d, N_X=%d, threads=%d)", cfg.experiment, cfg.seed, cfg.mc.n_x, cfg.mc.threads)
    result = registry.call(cfg.experiment, cfg)
    print_summary(cfg.experiment, result)
    if result.success:
        return EXIT_OK
    return EXIT_CONFIG if result.config_error else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
