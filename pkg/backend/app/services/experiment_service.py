"""
Replicated simulation experiments, basis-size selection and model comparison
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
from app.evaluation import fit_constant_baseline
from app.models import FitConfig, ModelType, Scenario
from app.services.fit_service import fit_series
from app.simulator import builtin_truth, simulate
from app.tvbarc import CountSeries
import numpy as np
import pandas as pd
import logging

logger = logging.getLogger(__name__)

BASELINE = "baseline"

# model orders matching each builtin truth
CASE_ORDERS: Dict[Scenario, Tuple[ModelType, int, int]] = {
    Scenario.AR1: (ModelType.TVBARC, 1, 0),
    Scenario.AR2: (ModelType.TVBARC, 2, 0),
    Scenario.INGARCH11: (ModelType.TVBINGARCH, 1, 1),
}


@dataclass(frozen=True)
class ModelSpec:
    model: str
    p: int
    q: int = 0

    @property
    def label(self) -> str:
        if self.model == ModelType.TVBINGARCH.value:
            return f"{self.model}({self.p},{self.q})"
        return f"{self.model}({self.p})"


def parse_model_spec(text: str) -> ModelSpec:
    """tvbarc:1, tvbingarch:1,1 or baseline:1"""
    name, _, orders = text.strip().partition(":")
    name = name.strip().lower()
    if name not in {ModelType.TVBARC.value, ModelType.TVBINGARCH.value, BASELINE}:
        raise ValueError(f"unknown model {name!r} in {text!r}")
    try:
        values = [int(v) for v in orders.split(",")] if orders else []
    except ValueError:
        raise ValueError(f"orders in {text!r} must be integers")
    if name == ModelType.TVBINGARCH.value:
        if len(values) != 2:
            raise ValueError(f"{text!r}: tvbingarch needs two orders, e.g. tvbingarch:1,1")
        return ModelSpec(name, values[0], values[1])
    if len(values) > 1:
        raise ValueError(f"{text!r}: {name} takes a single order")
    return ModelSpec(name, values[0] if values else 1)


def with_orders(config: FitConfig, model: ModelType, p: int, q: int) -> FitConfig:
    return FitConfig.model_validate({**config.model_dump(), "model": model, "p": p, "q": q})


def with_seed(config: FitConfig, seed: int) -> FitConfig:
    return config.model_copy(update={"hmc": config.hmc.model_copy(update={"seed": seed})})


def replicate(case, T: int, replicates: int, config: FitConfig, data_seed: Optional[int] = None) -> pd.DataFrame:
    """
    Simulate `replicates` series from a builtin truth, fit each one and the
    constant baseline, and tabulate the AMSE of both.

    Replicate r simulates with data_seed + r and samples with hmc.seed + r.
    The last row holds the means.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    truth = builtin_truth(case)
    data_seed = config.hmc.seed if data_seed is None else data_seed
    rows = []
    for r in range(replicates):
        series = simulate(truth, T, np.random.default_rng(data_seed + r))
        result = fit_series(series, with_seed(config, config.hmc.seed + r))
        rows.append({
            "replicate": r + 1,
            "amse": result.amse,
            "baseline_amse": result.baseline.amse,
            **{f"accept_{name}": rate for name, rate in result.acceptance.items()},
        })
        logger.info(f"{truth.label} replicate {r + 1}/{replicates}: AMSE {result.amse:.4f}, baseline {result.baseline.amse:.4f}")

    table = pd.DataFrame(rows)
    means = table.drop(columns="replicate").mean().to_dict()
    table = pd.concat([table.astype({"replicate": object}), pd.DataFrame([{"replicate": "mean", **means}])], ignore_index=True)
    return table


def select_num_basis(series: CountSeries, config: FitConfig, candidates: Sequence[int],
                     tol: float = 0.05) -> Tuple[int, Dict[int, float]]:
    """
    Fit each candidate basis size in increasing order and return the first K
    whose AMSE changes by less than tol (relative) when moving to the next
    candidate, together with the AMSE per K.
    """
    candidates = sorted(set(int(k) for k in candidates))
    if not candidates:
        raise ValueError("no basis sizes to try")
    scores: Dict[int, float] = {}
    for k in candidates:
        fitted = FitConfig.model_validate({**config.model_dump(), "num_basis": k})
        scores[k] = fit_series(series, fitted, with_baseline=False).amse
        logger.info(f"num_basis={k}: AMSE {scores[k]:.4f}")

    for current, following in zip(candidates, candidates[1:]):
        if abs(scores[following] - scores[current]) <= tol * abs(scores[current]):
            return current, scores
    return candidates[-1], scores


def compare_models(series: CountSeries, specs: List[ModelSpec], config: FitConfig) -> pd.DataFrame:
    """AMSE of each model specification on one series, in the order given"""
    rows = []
    for spec in specs:
        if spec.model == BASELINE:
            baseline = fit_constant_baseline(series, spec.p)
            rows.append({"model": f"{BASELINE}({spec.p})", "p": spec.p, "q": 0, "amse": baseline.amse})
            continue
        result = fit_series(series, with_orders(config, ModelType(spec.model), spec.p, spec.q), with_baseline=False)
        rows.append({"model": spec.label, "p": spec.p, "q": spec.q, "amse": result.amse,
                     **{f"accept_{name}": rate for name, rate in result.acceptance.items()}})
        logger.info(f"{spec.label}: AMSE {result.amse:.4f}")
    return pd.DataFrame(rows)
