from pathlib import Path
from app.commands import default_output
from app.data_import import write_count_csv
from app.models import Scenario
from app.simulator import builtin_truth, simulate_path
import numpy as np
import logging

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="simulate a count series from a builtin truth")
    parser.add_argument("--case", required=True, choices=[s.value for s in Scenario])
    parser.add_argument("--T", dest="T", type=int, required=True, help="last time index, the series has T+1 counts")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lambda-init", dest="lambda_init", type=float,
                        help="intensity at t=0, default the local stationary mean")
    parser.add_argument("--out", type=Path, help="series CSV path")
    parser.set_defaults(func=run)


def run(args) -> int:
    truth = builtin_truth(args.case)
    series, _ = simulate_path(truth, args.T, np.random.default_rng(args.seed), args.lambda_init)
    out = args.out or default_output(f"{args.case}_T{args.T}_seed{args.seed}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_count_csv(series, out)
    logger.info(f"Simulated {args.case} series written to {out}")
    print(f"wrote {len(series)} counts to {out}")
    return 0
