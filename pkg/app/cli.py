"""
Command-line entry point: one subcommand per experiment.

Exit codes: 0 every criterion met, 1 a criterion failed, 2 runtime or
configuration error.
"""
import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.core.errors import LabError
from app.experiments import create_experiment, load_config
from app.lab_config import get_logger

log = get_logger("cli")

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2

COMMANDS = {
    "simulate": "simulate",
    "validate-nls": "nls_validity",
    "residual": "residual_scaling",
    "existence": "existence",
    "energy-drift": "energy_drift",
    "props": "property_suite",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nls-lab", description="Pseudospectral NLS-approximation lab")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, experiment in COMMANDS.items():
        p = sub.add_parser(command, help=f"run the {experiment} experiment")
        p.add_argument("--config", type=str, default=None, help="flat key = value config file")
        p.add_argument("--out", type=str, default=None, help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--eps", type=str, default=None, help="comma-separated, strictly decreasing eps list")
        p.add_argument("--k0", type=float, default=None, help="carrier wavenumber")
        p.add_argument("--plot", action="store_true", help="write a log-log plot next to the tables")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    experiment = COMMANDS[args.command]
    overrides = {"seed": args.seed, "eps_list": args.eps, "k0": args.k0, "output_dir": args.out}
    try:
        config = load_config(args.config, experiment=experiment, overrides=overrides)
    except (ValidationError, FileNotFoundError, ValueError) as e:
        log.error(f"❌ [CLI] configuration error: {e}")
        return EXIT_ERROR

    log.info(f"🧪 [CLI] {args.command} (config {config.config_hash()[:12]})")
    try:
        report = create_experiment(config).run()
        paths = report.write(config.output_dir, plot=args.plot)
    except (LabError, ValueError, FloatingPointError, OSError) as e:
        log.error(f"❌ [CLI] {args.command} error: {e}")
        return EXIT_ERROR

    for path in paths:
        log.info(f"💾 [CLI] wrote {path}")
    if report.passed:
        log.info(f"✅ [CLI] {args.command}: all criteria met")
        return EXIT_OK
    log.warning(f"⚠️ [CLI] {args.command}: at least one criterion failed")
    return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
