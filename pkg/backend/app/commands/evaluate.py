from pathlib import Path
from app.evaluation import amse, coverage, credible_band, median_band_width
from app.models import AmseReading, Scenario
from app.services.fit_service import load_fit
from app.simulator import builtin_truth
from app.utils import write_key_values
import logging

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("evaluate", help="recompute AMSE and band coverage from a stored run")
    parser.add_argument("--run", type=Path, required=True, help="run directory written by fit")
    parser.add_argument("--truth", choices=[s.value for s in Scenario], help="builtin truth for coverage")
    parser.add_argument("--band-level", dest="band_level", type=float)
    parser.add_argument("--reading", choices=[r.value for r in AmseReading], default=AmseReading.PER_DRAW.value)
    parser.set_defaults(func=run)


def run(args) -> int:
    config, series, model, chain = load_fit(args.run)
    level = args.band_level if args.band_level is not None else config.band_level
    report = {"amse": amse(chain, series, model, AmseReading(args.reading)), "amse_reading": args.reading}

    truth = builtin_truth(args.truth) if args.truth else None
    names = model.coefficient_curves(model.unpack(chain.draws[0]), [0.0]).keys()
    for name in names:
        band = credible_band(chain, model, name, level=level)
        report[f"median_width_{name}"] = median_band_width(band)
        if truth is not None:
            try:
                report[f"coverage_{name}"] = coverage(band, lambda x, name=name: truth.curve(name, x))
            except IndexError:
                logger.warning(f"truth {truth.label} has no curve {name}, coverage skipped")

    path = write_key_values(report, args.run / "evaluation.txt")
    for key, value in report.items():
        print(f"{key}={value}")
    logger.info(f"Evaluation written to {path}")
    return 0
