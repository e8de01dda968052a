from pathlib import Path
from app.commands import add_fit_arguments, config_from_args, default_output
from app.config import settings
from app.data_import import read_count_csv
from app.services.fit_service import fit_series, persist_fit
import logging

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("fit", help="sample the posterior of a model for a count series")
    parser.add_argument("--input", type=Path, help="count file (date,count or t,x)")
    parser.add_argument("--out", type=Path, help="run directory")
    parser.add_argument("--chains", type=int, default=1)
    parser.add_argument("--workers", type=int, default=None, help="processes for multiple chains")
    add_fit_arguments(parser)
    parser.set_defaults(func=run)


def run(args) -> int:
    defaults = {"input_path": str(args.input)} if args.input else {}
    config = config_from_args(args, defaults)
    if config.input_path is None:
        raise ValueError("fit needs --input or input_path in the config file")
    series = read_count_csv(config.input_path)

    out = args.out or config.output_dir or default_output("fit")
    config = config.model_copy(update={"output_dir": Path(out)})
    workers = args.workers if args.workers is not None else settings.chain_workers
    result = fit_series(series, config, n_chains=args.chains, workers=workers)
    persist_fit(result, out)

    rates = ", ".join(f"{name}={rate:.3f}" for name, rate in result.acceptance.items())
    print(f"amse={result.amse:.6g} acceptance: {rates} -> {out}")
    return 0
