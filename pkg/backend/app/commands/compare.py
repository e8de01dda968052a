from pathlib import Path
from app.commands import add_fit_arguments, config_from_args, default_output
from app.data_import import read_count_csv
from app.services.experiment_service import compare_models, parse_model_spec
import logging

logger = logging.getLogger(__name__)

DEFAULT_MODELS = ["tvbarc:1", "tvbarc:10", "tvbingarch:1,1", "baseline:1"]


def register(subparsers):
    parser = subparsers.add_parser("compare", help="AMSE of several model specifications on one series")
    parser.add_argument("--input", type=Path, required=True)
    parser.add_argument("--models", nargs="+", default=DEFAULT_MODELS,
                        help="specifications such as tvbarc:1 tvbingarch:1,1 baseline:1")
    parser.add_argument("--out", type=Path, help="comparison CSV path")
    add_fit_arguments(parser, with_model=False)
    parser.set_defaults(func=run)


def run(args) -> int:
    specs = [parse_model_spec(text) for text in args.models]
    config = config_from_args(args)
    series = read_count_csv(args.input)
    table = compare_models(series, specs, config)

    out = args.out or default_output("comparison.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, index=False, float_format="%.17g")
    print(table.to_string(index=False))
    logger.info(f"Comparison written to {out}")
    return 0
