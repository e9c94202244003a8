"""
floquet-pt - Floquet PT-symmetry lattice toolkit
Command-line entry point.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from config.settings import APP_NAME, LOG_LEVEL
from models.experiment import ExperimentConfig
from utils.errors import ConfigError, NumericalError
from views import experiments

logger = logging.getLogger(APP_NAME)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

RUNNERS = {
    "spectrum": experiments.run_spectrum_sweep,
    "phase-diagram": experiments.run_phase_diagram,
    "trajectory": experiments.run_trajectory,
    "scale-free": experiments.run_scale_free,
    "perturbation": experiments.run_perturbation,
    "validate-model": experiments.run_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Floquet spectra, PT-symmetry breaking and boundary effects of driven lattice models",
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Logging level (default from FLOQUET_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, runner in RUNNERS.items():
        sub = subparsers.add_parser(name, help=(runner.__doc__ or "").strip().splitlines()[0])
        sub.add_argument("--config", required=True, help="Experiment config (JSON)")
        sub.add_argument("--out", default=None, help="Output directory (overrides the config)")
        sub.add_argument("--workers", type=int, default=None, help="Worker processes (overrides the config)")

    subparsers.add_parser("list-models", help="List the available model presets")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file with the --out / --workers overrides applied."""
    cfg = ExperimentConfig.from_file(args.config)
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        overrides["workers"] = args.workers
    return cfg.model_copy(update=overrides) if overrides else cfg


def main(argv: Optional[List[str]] = None) -> int:
    """Main application function."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.command == "list-models":
        for info in experiments.list_models():
            print(f"{info['id']:<10} {info['name']:<28} scan={info['scan_parameter']:<6} {info['description']}")
        return EXIT_OK

    try:
        cfg = load_config(args)
        outcome = RUNNERS[args.command](cfg)
    except ValidationError as e:
        logger.error(f"Invalid configuration:\n{str(e)}")
        return EXIT_CONFIG
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Numerical failure: {str(e)}")
        return EXIT_NUMERICAL

    if args.command == "validate-model":
        print(outcome.summary())
        return EXIT_OK

    for path in outcome["files"]:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
