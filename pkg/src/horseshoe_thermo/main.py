"""Main entry point for horseshoe-thermo.

Loads the configuration, applies command-line overrides and hands the run to
the experiment registry.
"""

import argparse
import logging
import sys
from pathlib import Path

from horseshoe_thermo.config import RunConfig, generate_default_config, load_config
from horseshoe_thermo.errors import ConfigError, HorseshoeError
from horseshoe_thermo.experiments import EXIT_CONFIG, EXIT_ERROR, EXPERIMENTS, run

logger = logging.getLogger("horseshoe_thermo")

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


# ── CLI ──


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(
        prog="horseshoe-thermo",
        description="Thermodynamic formalism numerics for a partially hyperbolic horseshoe",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run the experiment named in the config")
    run_parser.add_argument(
        "--config", type=str, default=None,
        help="Path to a JSON or TOML config file",
    )
    run_parser.add_argument(
        "--out", type=str, default=None,
        help="Output directory (default: results)",
    )
    run_parser.add_argument(
        "--seed", type=int, default=None,
        help="Master seed for every sampling step (default: 12345)",
    )
    run_parser.add_argument(
        "--threads", type=int, default=None,
        help="Worker threads for t-grid sweeps (default: 1)",
    )
    run_parser.add_argument(
        "--log-level", type=str, default=None,
        choices=LOG_LEVELS,
        help="Log level (default: INFO)",
    )

    sub.add_parser("list-experiments", help="List the available experiments and exit")

    gen = sub.add_parser(
        "generate-config",
        help=(
            "Generate a default config file with documentation and exit. "
            "Writes to ~/.config/horseshoe-thermo/config.toml by default, "
            "or to the given PATH if provided (a .json suffix writes JSON)."
        ),
    )
    gen.add_argument("path", nargs="?", default=None, metavar="PATH")
    return parser.parse_args(argv)


def setup_logging(level: str) -> None:
    """Configure logging for the application."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
    )


def _apply_cli_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Return a copy of ``config`` with CLI overrides applied and revalidated.

    Raises:
        ConfigError: If an override is out of range.
    """
    updates = {}
    if args.out is not None:
        updates["output_dir"] = args.out
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.log_level is not None:
        updates["log_level"] = args.log_level
    if not updates:
        return config
    try:
        return RunConfig.model_validate({**config.model_dump(), **updates})
    except ValueError as exc:
        raise ConfigError(f"command-line override rejected: {exc}") from exc


def _list_experiments() -> None:
    print("Available experiments:")
    for kind, experiment in EXPERIMENTS.items():
        print(f"  {kind.value:<20} {experiment.description}")


def main(argv: list[str] | None = None) -> None:
    """Start horseshoe-thermo."""
    args = parse_args(argv)

    if args.command == "list-experiments":
        _list_experiments()
        sys.exit(0)

    if args.command == "generate-config":
        out = None if args.path is None else Path(args.path)
        written = generate_default_config(out)
        print(f"Config file generated: {written}")
        print("Edit it, then run: horseshoe-thermo run --config", written)
        sys.exit(0)

    config_path = Path(args.config) if args.config else None
    try:
        config = _apply_cli_overrides(load_config(config_path), args)
    except ConfigError as exc:
        setup_logging(args.log_level or "INFO")
        logger.error("%s", exc)
        sys.exit(EXIT_CONFIG)

    setup_logging(config.log_level)
    logger.info("horseshoe-thermo starting...")
    logger.info(
        "Experiment: %s | Seed: %d | Threads: %d | Output: %s",
        config.experiment.value,
        config.seed,
        config.threads,
        config.output_dir,
    )
    try:
        code = run(config)
    except HorseshoeError as exc:
        logger.error("%s", exc)
        code = EXIT_ERROR
    except KeyboardInterrupt:
        logger.info("Interrupted by user.")
        code = EXIT_ERROR
    sys.exit(code)


if __name__ == "__main__":
    main()
