"""
Time-varying Poisson autoregression for counts, TVBARC(p).

    X_t | past ~ Poisson(lambda_t),  lambda_t = mu(t/T) + sum_i a_i(t/T) X_{t-i}

with mu(x) = sum_j exp(beta_j) B_j(x) and a_i(x) = M_i sum_j theta_ij B_j(x),
M = softmax(delta) over indices 0..p. Because every theta_ij lies in [0, 1] and
the basis is a partition of unity, sup_x sum_i a_i(x) <= sum_{i>=1} M_i < 1.
"""
from dataclasses import dataclass
from typing import Optional, List, Dict, Tuple
from scipy.special import softmax, xlogy
from app.models import Hyper
from app.splines import SplineBasis, design_matrix
from app.hmc import Block
import numpy as np
import logging

logger = logging.getLogger(__name__)

STABILITY_GRID = np.linspace(0.0, 1.0, 201)


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class CountSeries:
    values: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("a count series needs at least one observation")
        if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values != np.floor(values)):
            raise ValueError("counts must be nonnegative integers")
        values = values.astype(np.int64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return self.values.size - 1

    def __len__(self) -> int:
        return self.values.size


@dataclass
class TvbarcParams:
    beta: np.ndarray
    theta: np.ndarray
    delta: np.ndarray

    @property
    def p(self) -> int:
        return self.theta.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return simplex_weights(self.delta)


def simplex_weights(delta) -> np.ndarray:
    """Softmax of delta; scipy subtracts the maximum before exponentiating"""
    return softmax(np.asarray(delta, dtype=float))


def in_unit_box(values: np.ndarray) -> bool:
    return bool(np.all((values >= 0.0) & (values <= 1.0)))


def coefficient_at(params: TvbarcParams, basis: SplineBasis, x: float) -> Tuple[float, np.ndarray]:
    """Evaluate mu(x) and a_1(x)..a_p(x)"""
    if not in_unit_box(params.theta):
        raise ParameterError("theta entries must lie in [0, 1]")
    row = design_matrix(basis, [x])[0]
    mu = float(row @ np.exp(params.beta))
    a = params.weights[1:] * (params.theta @ row)
    return mu, a


class TvbarcModel:
    """TVBARC(p) posterior over a fixed series, with the basis cached on the fit grid"""

    def __init__(self, series: CountSeries, basis: SplineBasis, p: int, hyper: Optional[Hyper] = None):
        if p < 0:
            raise ValueError("p must be >= 0")
        if len(series) < max(p + 1, 2):
            raise ValueError(f"series of length {len(series)} is too short for lag {p}")

        self.series = series
        self.basis = basis
        self.p = p
        self.hyper = hyper or Hyper()
        self.K = basis.num_basis

        values = series.values.astype(float)
        T = series.T
        # Poisson terms run over t = p..T
        self.term_index = np.arange(p, T + 1)
        self.x = values[p:]
        self.design = design_matrix(basis, self.term_index / T)
        self.lags = np.column_stack([values[p - i:T + 1 - i] for i in range(1, p + 1)]) if p else np.zeros((self.x.size, 0))

        K = self.K
        self.blocks: List[Block] = [Block("beta", slice(0, K))]
        if p:
            self.blocks.append(Block("theta", slice(K, K + p * K), lower=0.0, upper=1.0))
        self.blocks.append(Block("delta", slice(K + p * K, K + p * K + p + 1)))
        self.dim = K + p * K + p + 1

    # flat sampler vector <-> parameters
    def unpack(self, position: np.ndarray) -> TvbarcParams:
        K, p = self.K, self.p
        return TvbarcParams(
            beta=position[:K],
            theta=position[K:K + p * K].reshape(p, K),
            delta=position[K + p * K:],
        )

    def pack(self, params: TvbarcParams) -> np.ndarray:
        return np.concatenate([params.beta, params.theta.ravel(), params.delta])

    def parameter_names(self) -> List[str]:
        names = [f"beta[{j}]" for j in range(1, self.K + 1)]
        names += [f"theta[{i},{j}]" for i in range(1, self.p + 1) for j in range(1, self.K + 1)]
        names += [f"delta[{l}]" for l in range(self.p + 1)]
        return names

    def initial_params(self) -> TvbarcParams:
        """delta = 0, theta = 0.5 and mu at the share of the sample mean left over by the AR part"""
        p = self.p
        delta = np.zeros(p + 1)
        theta = np.full((p, self.K), 0.5)
        ar_share = 0.5 * simplex_weights(delta)[1:].sum()
        mu0 = max(float(np.mean(self.series.values)) * (1.0 - ar_share), 1e-3)
        beta = np.full(self.K, np.log(mu0))
        return TvbarcParams(beta=beta, theta=theta, delta=delta)

    def initial_position(self) -> np.ndarray:
        return self.pack(self.initial_params())

    # model quantities
    def coefficient_curves(self, params: TvbarcParams, grid) -> Dict[str, np.ndarray]:
        """mu and a_i evaluated on an arbitrary grid of [0, 1]"""
        rows = design_matrix(self.basis, grid)
        curves = {"mu": rows @ np.exp(params.beta)}
        a = rows @ (params.theta * params.weights[1:, None]).T
        for i in range(self.p):
            curves[f"a{i + 1}"] = a[:, i]
        return curves

    def max_total_coefficient(self, params: TvbarcParams, grid=STABILITY_GRID) -> float:
        curves = self.coefficient_curves(params, grid)
        total = sum(curves[f"a{i}"] for i in range(1, self.p + 1))
        return float(np.max(total)) if self.p else 0.0

    def intensities(self, params: TvbarcParams) -> np.ndarray:
        """lambda_t for t = p..T"""
        mu = self.design @ np.exp(params.beta)
        a = self.design @ (params.theta * params.weights[1:, None]).T
        return mu + np.sum(a * self.lags, axis=1)

    def fitted_intensities(self, params: TvbarcParams) -> np.ndarray:
        """Intensities on term_index, the time points the likelihood scores"""
        return self.intensities(params)

    def per_term_loglik(self, params: TvbarcParams) -> np.ndarray:
        """Poisson log pmf per t without the log X_t! constant"""
        lam = self.intensities(params)
        return -lam + xlogy(self.x, lam)

    def log_prior(self, params: TvbarcParams) -> float:
        return float(-np.sum(params.beta ** 2) / (2 * self.hyper.c2) - np.sum(params.delta ** 2) / (2 * self.hyper.c1))

    def log_posterior_params(self, params: TvbarcParams) -> float:
        if not in_unit_box(params.theta):
            return -np.inf
        lam = self.intensities(params)
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
            return -np.inf
        return float(np.sum(-lam + xlogy(self.x, lam))) + self.log_prior(params)

    def log_posterior(self, position: np.ndarray) -> float:
        return self.log_posterior_params(self.unpack(position))

    def gradients(self, params: TvbarcParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Ascent gradient of the log posterior in (beta, theta, delta)"""
        weights = params.weights
        alpha = np.exp(params.beta)
        lam = self.intensities(params)
        # d loglik / d lambda_t
        resid = self.x / lam - 1.0

        dbeta = alpha * (self.design.T @ resid) - params.beta / self.hyper.c2

        weighted_lags = self.lags * resid[:, None]
        dtheta = weights[1:, None] * (weighted_lags.T @ self.design)

        # lambda_t depends on M_i through sum_j theta_ij B_j(t/T) X_{t-i}
        grad_m = np.zeros(self.p + 1)
        grad_m[1:] = np.sum((self.design @ params.theta.T) * weighted_lags, axis=0)
        ddelta = weights * (grad_m - weights @ grad_m) - params.delta / self.hyper.c1
        return dbeta, dtheta, ddelta

    def gradient(self, position: np.ndarray, block: Block) -> np.ndarray:
        dbeta, dtheta, ddelta = self.gradients(self.unpack(position))
        return {"beta": dbeta, "theta": dtheta.ravel(), "delta": ddelta}[block.name]


def intensities(params: TvbarcParams, series: CountSeries, basis: SplineBasis) -> np.ndarray:
    return TvbarcModel(series, basis, params.p).intensities(params)


def log_posterior(params: TvbarcParams, series: CountSeries, basis: SplineBasis, hyper: Hyper) -> float:
    return TvbarcModel(series, basis, params.p, hyper).log_posterior_params(params)


def grad_log_posterior(params: TvbarcParams, series: CountSeries, basis: SplineBasis, hyper: Hyper):
    return TvbarcModel(series, basis, params.p, hyper).gradients(params)
