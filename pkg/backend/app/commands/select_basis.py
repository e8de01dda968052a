from pathlib import Path
from app.commands import add_fit_arguments, config_from_args
from app.data_import import read_count_csv
from app.services.experiment_service import select_num_basis
import logging

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("select-basis", help="choose the number of basis functions by AMSE stabilization")
    parser.add_argument("--input", type=Path, required=True)
    parser.add_argument("--candidates", type=int, nargs="+", default=[4, 6, 8, 10, 12])
    parser.add_argument("--tol", type=float, default=0.05, help="relative AMSE change treated as stable")
    add_fit_arguments(parser)
    parser.set_defaults(func=run)


def run(args) -> int:
    config = config_from_args(args)
    series = read_count_csv(args.input)
    chosen, scores = select_num_basis(series, config, args.candidates, args.tol)
    for k, score in scores.items():
        print(f"num_basis={k} amse={score:.6g}")
    print(f"selected num_basis={chosen}")
    return 0
