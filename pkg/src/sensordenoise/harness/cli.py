"""Command line entry point: ``sensordenoise denoise|learn|sweep|plot``."""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigurationError, SensorDenoiseError
from .config import load_config
from .experiments import cmd_denoise, cmd_learn, cmd_sweep
from .plotting import cmd_plot

log = logging.getLogger("sensordenoise")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

COMMANDS = {"denoise": cmd_denoise, "learn": cmd_learn, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensordenoise",
        description="Denoise sensor labels with best-response dynamics and learn the boundary.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="flat 'key = value' config file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--trials", type=int, help="trial count override")
        p.add_argument("--workers", type=int, help="worker processes override")
    p = sub.add_parser("plot", help="render SVG figures from experiment CSVs")
    p.add_argument("csv", nargs="+", help="denoise.csv or learn.csv files")
    p.add_argument("--out", required=True, help="directory for the SVG files")
    p.add_argument("--config", help="accepted for symmetry; unused")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "plot":
            written = cmd_plot(args.csv, args.out)
        else:
            config = load_config(args.config, seed=args.seed, trials=args.trials, workers=args.workers)
            written = list(COMMANDS[args.command](config, args.out).values())
    except ConfigurationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (SensorDenoiseError, ArithmeticError, RuntimeError, OSError) as exc:
        log.error("run failed: %s", exc)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
