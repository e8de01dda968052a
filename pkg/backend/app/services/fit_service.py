"""
Fit orchestration: build the model a configuration names, run the sampler,
summarize the draws and persist the run directory.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union
from app.config import build_fit_config, load_config_file
from app.data_import import read_count_csv, write_count_csv
from app.evaluation import (
    BaselineFit,
    CredibleBand,
    amse,
    credible_band,
    fit_constant_baseline,
    posterior_mean_intensity,
)
from app.hmc import Chain, pool_chains, run_chain, run_chains
from app.models import FitConfig, ModelType
from app.splines import build_basis
from app.tvbarc import CountSeries, TvbarcModel
from app.tvbingarch import TvbingarchModel
from app.utils import write_amse_report, write_band_csv, write_intensity_csv, write_manifest
import numpy as np
import logging

logger = logging.getLogger(__name__)

Model = Union[TvbarcModel, TvbingarchModel]

MANIFEST = "manifest.txt"
SERIES = "series.csv"


@dataclass
class FitResult:
    config: FitConfig
    series: CountSeries
    model: Model
    chains: List[Chain]
    chain: Chain
    amse: float
    bands: Dict[str, CredibleBand]
    intensity: np.ndarray
    acceptance: Dict[str, float]
    baseline: Optional[BaselineFit] = None


def build_model(series: CountSeries, config: FitConfig) -> Model:
    basis = build_basis(config.num_basis, config.degree)
    if config.model == ModelType.TVBARC:
        return TvbarcModel(series, basis, config.p, config.hyper)
    return TvbingarchModel(
        series, basis, config.p, config.q, config.hyper,
        gradient_mode=config.gradient_mode,
        likelihood_start=config.likelihood_start,
    )


def fit_series(series: CountSeries, config: FitConfig, n_chains: int = 1, workers: int = 1,
               with_baseline: bool = True) -> FitResult:
    """Sample the posterior and compute AMSE, credible bands and the posterior mean intensity"""
    model = build_model(series, config)
    logger.info(
        f"Fitting {config.model.value}(p={config.p}, q={config.q}) with {config.num_basis} basis functions "
        f"on {len(series)} observations"
    )
    if n_chains == 1:
        chains = [run_chain(model, config.hmc)]
    else:
        chains = run_chains(model, config.hmc, n_chains, workers)
    chain = pool_chains(chains)

    grid = np.arange(1, len(series)) / series.T
    curves = model.coefficient_curves(model.unpack(chain.draws[0]), grid[:1])
    bands = {name: credible_band(chain, model, name, grid, config.band_level) for name in curves}

    result = FitResult(
        config=config,
        series=series,
        model=model,
        chains=chains,
        chain=chain,
        amse=amse(chain, series, model),
        bands=bands,
        intensity=posterior_mean_intensity(chain, model),
        acceptance=chain.acceptance_rates(),
    )
    if with_baseline:
        result.baseline = fit_constant_baseline(series, config.p)
    logger.info(f"Fit finished: AMSE {result.amse:.4f}, acceptance {result.acceptance}")
    return result


def persist_fit(result: FitResult, out_dir) -> Path:
    """Write chain, bands, intensities, AMSE report, series and manifest into out_dir"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for index, chain in enumerate(result.chains):
        chain.to_csv(out_dir / ("chain.csv" if index == 0 else f"chain_{index + 1}.csv"))
    for name, band in result.bands.items():
        write_band_csv(band, out_dir / f"band_{name}.csv")

    model = result.model
    write_intensity_csv(model.term_index, result.series.values[model.term_index], result.intensity, out_dir / "intensity.csv")
    write_count_csv(result.series, out_dir / SERIES)

    baseline = result.baseline.amse if result.baseline is not None else None
    write_amse_report(result.amse, out_dir / "amse.txt", baseline=baseline)

    first = result.chains[0]
    write_manifest(
        result.config.to_flat(),
        result.acceptance,
        out_dir / MANIFEST,
        results={
            "amse": result.amse,
            "chains": len(result.chains),
            "burn_in": first.burn_in,
            "iterations": first.iterations,
        },
    )
    logger.info(f"Run written to {out_dir}")
    return out_dir


def load_fit(run_dir) -> Tuple[FitConfig, CountSeries, Model, Chain]:
    """Rebuild configuration, series, model and the pooled chain from a run directory"""
    run_dir = Path(run_dir)
    config = build_fit_config(load_config_file(run_dir / MANIFEST))
    series = read_count_csv(run_dir / SERIES)
    model = build_model(series, config)

    paths = [run_dir / "chain.csv"] + sorted(
        run_dir.glob("chain_*.csv"), key=lambda path: int(path.stem.split("_")[1])
    )
    chains = [Chain.from_csv(path, rng_seed=config.hmc.seed, chain_index=i) for i, path in enumerate(paths) if path.exists()]
    if not chains:
        raise FileNotFoundError(f"{run_dir}: no chain.csv found")
    return config, series, model, pool_chains(chains)
