from pathlib import Path
from app.commands import add_fit_arguments, config_from_args, default_output
from app.models import Scenario
from app.services.experiment_service import CASE_ORDERS, replicate
import logging

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("replicate", help="simulate and fit several series from a builtin truth")
    parser.add_argument("--case", required=True, choices=[s.value for s in Scenario])
    parser.add_argument("--T", dest="T", type=int, required=True)
    parser.add_argument("--replicates", type=int, default=5)
    parser.add_argument("--data-seed", dest="data_seed", type=int)
    parser.add_argument("--out", type=Path, help="replicate table CSV path")
    add_fit_arguments(parser)
    parser.set_defaults(func=run)


def run(args) -> int:
    model, p, q = CASE_ORDERS[Scenario(args.case)]
    config = config_from_args(args, {"model": model.value, "p": p, "q": q})
    table = replicate(args.case, args.T, args.replicates, config, args.data_seed)

    out = args.out or default_output(f"replicate_{args.case}_T{args.T}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, index=False, float_format="%.17g")
    print(table.to_string(index=False))
    logger.info(f"Replicate table written to {out}")
    return 0
