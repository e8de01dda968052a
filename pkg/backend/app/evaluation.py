"""
Posterior summaries: AMSE, pointwise credible bands, coverage and a
time-constant Poisson AR baseline.
"""
from dataclasses import dataclass
from typing import Callable
from scipy.optimize import LinearConstraint, minimize
from scipy.special import xlogy
from app.models import AmseReading
from app.hmc import Chain
from app.tvbarc import CountSeries
import numpy as np
import pandas as pd
import logging

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CredibleBand:
    grid: np.ndarray
    lower: np.ndarray
    mean: np.ndarray
    upper: np.ndarray
    level: float
    label: str = ""

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.grid, "lower": self.lower, "mean": self.mean, "upper": self.upper})


@dataclass(frozen=True)
class BaselineFit:
    mu: float
    a: np.ndarray
    amse: float
    log_likelihood: float
    converged: bool
    iterations: int


def default_grid(series: CountSeries) -> np.ndarray:
    """Observation grid 1/T, 2/T, ..., 1"""
    return np.arange(1, len(series)) / series.T


def _post_burn_in(chain: Chain) -> np.ndarray:
    draws = chain.post_burn_in()
    if draws.shape[0] == 0:
        raise ValueError("chain has no post burn-in draws")
    return draws


def intensity_draws(chain: Chain, model) -> np.ndarray:
    """Fitted intensity path of every post burn-in draw, one row per draw"""
    draws = _post_burn_in(chain)
    return np.vstack([model.fitted_intensities(model.unpack(draw)) for draw in draws])


def amse(chain: Chain, series: CountSeries, model, reading: AmseReading = AmseReading.PER_DRAW) -> float:
    """Average squared error between X_t and fitted intensities over the post burn-in draws"""
    observed = series.values[model.term_index].astype(float)
    paths = intensity_draws(chain, model)
    if AmseReading(reading) == AmseReading.POSTERIOR_MEAN:
        return float(np.mean((observed - paths.mean(axis=0)) ** 2))
    return float(np.mean(np.mean((observed[None, :] - paths) ** 2, axis=1)))


def posterior_mean_intensity(chain: Chain, model) -> np.ndarray:
    return intensity_draws(chain, model).mean(axis=0)


def fitted_residuals(series: CountSeries, model, fitted: np.ndarray) -> np.ndarray:
    return series.values[model.term_index] - fitted


def band_from_draws(values: np.ndarray, grid, level: float = 0.95, label: str = "") -> CredibleBand:
    """Pointwise equal-tailed quantile band, linear interpolation between order statistics"""
    if not 0.0 < level < 1.0:
        raise ValueError("band level must lie in (0, 1)")
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.size > 1 and np.any(np.diff(grid) <= 0.0):
        raise ValueError("band grid must be strictly increasing")
    tail = (1.0 - level) / 2.0
    lower, upper = np.quantile(values, [tail, 1.0 - tail], axis=0, method="linear")
    mean = values.mean(axis=0)
    # the mean can escape a narrow band through round-off when all draws agree
    lower = np.minimum(lower, mean)
    upper = np.maximum(upper, mean)
    return CredibleBand(grid=grid, lower=lower, mean=mean, upper=upper, level=level, label=label)


def credible_band(chain: Chain, model, function_selector: str, grid=None, level: float = 0.95) -> CredibleBand:
    """Band for mu, a_i or b_k from the post burn-in draws"""
    grid = default_grid(model.series) if grid is None else np.asarray(grid, dtype=float)
    draws = _post_burn_in(chain)
    available = model.coefficient_curves(model.unpack(draws[0]), grid[:1]).keys()
    if function_selector not in available:
        raise ValueError(f"unknown coefficient function {function_selector!r}, expected one of {sorted(available)}")
    values = np.vstack([model.coefficient_curves(model.unpack(draw), grid)[function_selector] for draw in draws])
    return band_from_draws(values, grid, level, label=function_selector)


def coverage(band: CredibleBand, truth: Callable[[np.ndarray], np.ndarray]) -> float:
    """Share of grid points where the truth lies inside the band"""
    values = np.broadcast_to(np.asarray(truth(band.grid), dtype=float), band.grid.shape)
    return float(np.mean((band.lower <= values) & (values <= band.upper)))


def median_band_width(band: CredibleBand) -> float:
    return float(np.median(band.upper - band.lower))


def fit_constant_baseline(series: CountSeries, p: int, max_iter: int = 500, tol: float = 1e-10) -> BaselineFit:
    """
    Maximum likelihood for lambda_t = mu + sum_i a_i X_{t-i} with constant
    coefficients, mu > 0, a_i >= 0 and sum a_i < 1.
    """
    if len(series) < p + 2:
        raise ValueError(f"series of length {len(series)} is too short for lag {p}")
    values = series.values.astype(float)
    T = series.T
    y = values[p:]
    z = np.column_stack([np.ones(y.size)] + [values[p - i:T + 1 - i] for i in range(1, p + 1)])
    cap = 1.0 - 1e-6

    # mean negative log likelihood keeps the objective on a per-term scale
    def objective(w):
        lam = z @ w
        if np.any(lam <= 0.0):
            return np.inf
        return float(np.mean(lam - xlogy(y, lam)))

    def jacobian(w):
        lam = np.maximum(z @ w, 1e-300)
        return z.T @ (1.0 - y / lam) / y.size

    a0 = np.full(p, min(0.1, 0.5 / p)) if p else np.zeros(0)
    w0 = np.concatenate([[max(y.mean() * (1.0 - a0.sum()), 1e-3)], a0])
    bounds = [(1e-8, None)] + [(0.0, cap)] * p
    constraints = []
    if p:
        constraints.append(LinearConstraint(np.concatenate([[0.0], np.ones(p)])[None, :], -np.inf, cap))

    res = minimize(objective, w0, jac=jacobian, method="SLSQP", bounds=bounds, constraints=constraints,
                   options={"maxiter": max_iter, "ftol": tol})
    if not res.success:
        logger.warning(f"constant baseline did not converge ({res.message}), returning best iterate")

    w = res.x
    lam = z @ w
    return BaselineFit(
        mu=float(w[0]),
        a=w[1:].copy(),
        amse=float(np.mean((y - lam) ** 2)),
        log_likelihood=float(np.sum(-lam + xlogy(y, lam))),
        converged=bool(res.success),
        iterations=int(res.nit),
    )
