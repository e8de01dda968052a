import argparse
import logging
import sys
from typing import List, Optional

from app.config import ConfigError, settings
from app.commands import compare, evaluate, fit, replicate, select_basis, simulate
from app.data_import import CountDataError
from app.hmc import SamplerStalledError

logger = logging.getLogger("tvcount")

# exit statuses
EXIT_OK = 0
EXIT_SAMPLER = 1
EXIT_INVALID = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvcount",
        description="Time-varying Bayesian autoregressive and INGARCH models for count series",
    )
    parser.add_argument("--log-level", dest="log_level", default=None, help=f"default {settings.log_level}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include commands
    simulate.register(subparsers)
    fit.register(subparsers)
    evaluate.register(subparsers)
    compare.register(subparsers)
    replicate.register(subparsers)
    select_basis.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args)
    except (ConfigError, CountDataError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {e}")
        message = "invalid configuration: " + "; ".join(e.problems) if isinstance(e, ConfigError) else str(e)
        print(f"error: {message}", file=sys.stderr)
        return EXIT_INVALID
    except SamplerStalledError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SAMPLER


if __name__ == "__main__":
    sys.exit(main())
