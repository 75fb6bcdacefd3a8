"""Command-line entry point: argument parsing, logging setup, exit codes."""

from __future__ import annotations

import argparse
import logging
import sys

from rawlsian import __version__
from rawlsian.config import METHODS, STATS_MODES
from rawlsian.errors import RawlsianError

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_IO = 3


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rawlsian",
        description="Minimax-fair threshold adaptation from sub-population statistics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--config",
        default="rawlsian.yaml",
        help="Path to config YAML file (default: rawlsian.yaml; defaults apply if absent)",
    )
    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        default=False,
        help="Enable debug logging",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="Generate a seeded synthetic dataset CSV")
    p.add_argument("--preset", required=True, help="synthetic1 or synthetic2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("stats", help="Estimate per-sub-population moments from a dataset CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=STATS_MODES, default=None,
                   help="Estimation mode (default: stats.mode from config)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("fat", help="Fair threshold on a 1-D score from its stats file")
    p.add_argument("--stats", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("flat", help="Fair linear head on an embedding from its stats file")
    p.add_argument("--stats", required=True)
    p.add_argument("--mode", choices=("spherical", "general"), default="spherical")
    p.add_argument("--tol", type=float, default=None,
                   help="Margin-ratio tolerance for general mode (default: flat.tol_kappa)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="Per-sub-population error report of a model on a dataset")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="Exact Rawls classifier of a finite distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("boundary", help="Decision-boundary grid of a 2-D linear model")
    p.add_argument("--model", required=True)
    p.add_argument("--bbox", required=True, help="xmin,ymin,xmax,ymax")
    p.add_argument("--res", type=int, default=200)
    p.add_argument("--out", required=True)

    p = sub.add_parser("experiment", help="Repeated train/test comparison of the methods")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--methods", nargs="+", choices=METHODS, default=None)
    p.add_argument("--out", required=True)
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    return build_parser().parse_args(argv)


def dispatch(args: argparse.Namespace) -> int:
    from rawlsian import cli
    from rawlsian.config import load_config

    config = load_config(args.config)
    if args.command == "synth":
        return cli.cmd_synth(args.preset, args.seed, args.out)
    if args.command == "stats":
        return cli.cmd_stats(args.input, args.mode or config.stats.mode, args.out, config)
    if args.command == "fat":
        return cli.cmd_fat(args.stats, args.out, config)
    if args.command == "flat":
        return cli.cmd_flat(args.stats, args.mode, args.tol, args.out, config)
    if args.command == "eval":
        return cli.cmd_eval(args.input, args.model, args.out)
    if args.command == "oracle":
        return cli.cmd_oracle(args.dist, args.out, config)
    if args.command == "boundary":
        return cli.cmd_boundary(args.model, args.bbox, args.res, args.out)
    if args.command == "experiment":
        return cli.cmd_experiment(args.input, args.methods, args.out, config)
    raise AssertionError(f"unhandled command {args.command!r}")


# ---------------------------------------------------------------------------
# Main
# ---------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    """Parse args, configure logging, run one command and return its exit code."""
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0) if isinstance(exc.code, int) else EXIT_USAGE

    log_level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return dispatch(args)
    except RawlsianError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except ValueError as exc:
        # config validation
        logger.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
