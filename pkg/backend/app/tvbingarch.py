"""
Time-varying integer-valued GARCH for counts, TVBINGARCH(p, q).

    lambda_t = mu(t/T) + sum_i a_i(t/T) X_{t-i} + sum_k b_k(t/T) lambda_{t-k}

with X_t = lambda_t = 0 for t < 0 and lambda_0 a free parameter with an
Inverse-Gamma(d1, d1) prior. b_k(x) = M_{p+k} sum_j eta_kj B_j(x) and the
softmax weights run over p + q + 1 components.
"""
from dataclasses import dataclass
from typing import Optional, List, Dict, Tuple
from scipy.special import xlogy
from app.models import HyperIngarch, GradientMode
from app.splines import SplineBasis, design_matrix
from app.tvbarc import CountSeries, ParameterError, simplex_weights, in_unit_box, STABILITY_GRID
from app.hmc import Block
import numpy as np
import logging

logger = logging.getLogger(__name__)


@dataclass
class TvbingarchParams:
    beta: np.ndarray
    theta: np.ndarray
    eta: np.ndarray
    delta: np.ndarray
    lambda0: float

    @property
    def p(self) -> int:
        return self.theta.shape[0]

    @property
    def q(self) -> int:
        return self.eta.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return simplex_weights(self.delta)


def lambda0_step(lambda0: float) -> float:
    """Central-difference step for the lambda0 derivative, kept inside (0, inf)"""
    return min(max(1e-4, 1e-4 * lambda0), 0.5 * lambda0)


class TvbingarchModel:
    """TVBINGARCH(p, q) posterior; the sampler sees log(lambda0) in place of lambda0"""

    def __init__(self, series: CountSeries, basis: SplineBasis, p: int, q: int,
                 hyper: Optional[HyperIngarch] = None,
                 gradient_mode: GradientMode = GradientMode.DETACHED,
                 likelihood_start: int = 1):
        if p < 0 or q < 0:
            raise ValueError("orders must be nonnegative")
        if likelihood_start not in (0, 1):
            raise ValueError("likelihood_start must be 0 or 1")
        if len(series) < max(p + 1, 2):
            raise ValueError(f"series of length {len(series)} is too short for lag {p}")

        self.series = series
        self.basis = basis
        self.p = p
        self.q = q
        self.hyper = hyper or HyperIngarch()
        self.gradient_mode = GradientMode(gradient_mode)
        self.likelihood_start = likelihood_start
        self.term_index = np.arange(likelihood_start, series.T + 1)
        self.K = basis.num_basis

        values = series.values.astype(float)
        T = series.T
        self.T = T
        self.x = values
        self.design = design_matrix(basis, np.arange(T + 1) / T)
        # X_{t-i} with zeros before the start of the series
        self.xlags = np.zeros((T + 1, p))
        for i in range(1, p + 1):
            self.xlags[i:, i - 1] = values[:T + 1 - i]

        K = self.K
        n_box = (p + q) * K
        self.blocks: List[Block] = [
            Block("mu", slice(0, K)),
            Block(
                "coef",
                slice(K, K + n_box + p + q + 2),
                lower=np.concatenate([np.zeros(n_box), np.full(p + q + 2, -np.inf)]),
                upper=np.concatenate([np.ones(n_box), np.full(p + q + 2, np.inf)]),
            ),
        ]
        self.dim = K + n_box + p + q + 2

    # flat sampler vector <-> parameters
    def unpack(self, position: np.ndarray) -> TvbingarchParams:
        K, p, q = self.K, self.p, self.q
        start = K
        theta = position[start:start + p * K].reshape(p, K)
        start += p * K
        eta = position[start:start + q * K].reshape(q, K)
        start += q * K
        delta = position[start:start + p + q + 1]
        return TvbingarchParams(beta=position[:K], theta=theta, eta=eta, delta=delta, lambda0=float(np.exp(position[-1])))

    def pack(self, params: TvbingarchParams) -> np.ndarray:
        return np.concatenate([params.beta, params.theta.ravel(), params.eta.ravel(), params.delta, [np.log(params.lambda0)]])

    def parameter_names(self) -> List[str]:
        K = self.K
        names = [f"beta[{j}]" for j in range(1, K + 1)]
        names += [f"theta[{i},{j}]" for i in range(1, self.p + 1) for j in range(1, K + 1)]
        names += [f"eta[{k},{j}]" for k in range(1, self.q + 1) for j in range(1, K + 1)]
        names += [f"delta[{l}]" for l in range(self.p + self.q + 1)]
        names.append("log_lambda0")
        return names

    def initial_params(self) -> TvbingarchParams:
        p, q = self.p, self.q
        delta = np.zeros(p + q + 1)
        share = 0.5 * simplex_weights(delta)[1:].sum()
        mean = float(np.mean(self.series.values))
        mu0 = max(mean * (1.0 - share), 1e-3)
        return TvbingarchParams(
            beta=np.full(self.K, np.log(mu0)),
            theta=np.full((p, self.K), 0.5),
            eta=np.full((q, self.K), 0.5),
            delta=delta,
            lambda0=max(mean, 1e-3),
        )

    def initial_position(self) -> np.ndarray:
        return self.pack(self.initial_params())

    # model quantities
    def _coefficient_paths(self, params: TvbingarchParams, rows: np.ndarray):
        weights = params.weights
        p = self.p
        mu = rows @ np.exp(params.beta)
        a = rows @ (params.theta * weights[1:p + 1, None]).T
        b = rows @ (params.eta * weights[p + 1:, None]).T
        return mu, a, b

    def coefficient_curves(self, params: TvbingarchParams, grid) -> Dict[str, np.ndarray]:
        mu, a, b = self._coefficient_paths(params, design_matrix(self.basis, grid))
        curves = {"mu": mu}
        for i in range(self.p):
            curves[f"a{i + 1}"] = a[:, i]
        for k in range(self.q):
            curves[f"b{k + 1}"] = b[:, k]
        return curves

    def max_total_coefficient(self, params: TvbingarchParams, grid=STABILITY_GRID) -> float:
        _, a, b = self._coefficient_paths(params, design_matrix(self.basis, grid))
        if self.p + self.q == 0:
            return 0.0
        return float(np.max(a.sum(axis=1) + b.sum(axis=1)))

    def _recursion(self, params: TvbingarchParams):
        """lambda_0..lambda_T together with the b_k(t/T) path"""
        mu, a, b = self._coefficient_paths(params, self.design)
        drive = (mu + np.sum(a * self.xlags, axis=1)).tolist()
        b_rows = b.tolist()
        q = self.q

        lam = [0.0] * (self.T + 1)
        lam[0] = float(params.lambda0)
        for t in range(1, self.T + 1):
            acc = drive[t]
            row = b_rows[t]
            for k in range(1, min(q, t) + 1):
                acc += row[k - 1] * lam[t - k]
            lam[t] = acc
        return np.asarray(lam), b

    def intensities(self, params: TvbingarchParams) -> np.ndarray:
        if not params.lambda0 > 0.0:
            raise ParameterError("lambda0 must be positive")
        return self._recursion(params)[0]

    def _lambda_lags(self, lam: np.ndarray) -> np.ndarray:
        lags = np.zeros((self.T + 1, self.q))
        for k in range(1, self.q + 1):
            lags[k:, k - 1] = lam[:self.T + 1 - k]
        return lags

    def fitted_intensities(self, params: TvbingarchParams) -> np.ndarray:
        return self.intensities(params)[self.likelihood_start:]

    def per_term_loglik(self, params: TvbingarchParams) -> np.ndarray:
        """Poisson log pmf for t = likelihood_start..T without log X_t!"""
        lam = self.intensities(params)[self.likelihood_start:]
        return -lam + xlogy(self.x[self.likelihood_start:], lam)

    def log_prior(self, params: TvbingarchParams) -> float:
        h = self.hyper
        lam0 = params.lambda0
        return float(
            -np.sum(params.beta ** 2) / (2 * h.c2)
            - np.sum(params.delta ** 2) / (2 * h.c1)
            - (h.d1 + 1.0) * np.log(lam0) - h.d1 / lam0
        )

    def log_posterior_params(self, params: TvbingarchParams) -> float:
        if not in_unit_box(params.theta) or not in_unit_box(params.eta):
            return -np.inf
        if not (np.isfinite(params.lambda0) and params.lambda0 > 0.0):
            return -np.inf
        lam = self._recursion(params)[0][self.likelihood_start:]
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
            return -np.inf
        return float(np.sum(-lam + xlogy(self.x[self.likelihood_start:], lam))) + self.log_prior(params)

    def log_posterior(self, position: np.ndarray) -> float:
        # + log(lambda0): Jacobian of sampling on the log scale
        return self.log_posterior_params(self.unpack(position)) + float(position[-1])

    def _dlambda0_numeric(self, params: TvbingarchParams) -> float:
        h = lambda0_step(params.lambda0)
        up = TvbingarchParams(params.beta, params.theta, params.eta, params.delta, params.lambda0 + h)
        down = TvbingarchParams(params.beta, params.theta, params.eta, params.delta, params.lambda0 - h)
        return (self.log_posterior_params(up) - self.log_posterior_params(down)) / (2 * h)

    def gradients(self, params: TvbingarchParams,
                  with_lambda0: bool = True) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
        """Ascent gradient in (beta, theta, eta, delta, lambda0); with_lambda0=False skips the lambda0 difference quotient"""
        h = self.hyper
        p, q = self.p, self.q
        weights = params.weights
        lam, b = self._recursion(params)

        resid = self.x / lam - 1.0
        if self.likelihood_start == 1:
            resid[0] = 0.0

        if self.gradient_mode == GradientMode.ADJOINT:
            # total derivative of the log likelihood w.r.t. each lambda_t
            adj = resid.tolist()
            b_rows = b.tolist()
            for t in range(self.T, -1, -1):
                acc = adj[t]
                for k in range(1, q + 1):
                    if t + k <= self.T:
                        acc += b_rows[t + k][k - 1] * adj[t + k]
                adj[t] = acc
            w = np.asarray(adj)
            dlambda0 = w[0] - (h.d1 + 1.0) / params.lambda0 + h.d1 / params.lambda0 ** 2
        else:
            # lambda history treated as data, lambda0 by central difference
            w = resid
            dlambda0 = self._dlambda0_numeric(params) if with_lambda0 else 0.0

        # lambda_0 is a parameter, the spline terms act from t = 1 on
        rows = self.design[1:]
        w = w[1:]
        xlags = self.xlags[1:]
        lamlags = self._lambda_lags(lam)[1:]

        dbeta = np.exp(params.beta) * (rows.T @ w) - params.beta / h.c2
        weighted_x = xlags * w[:, None]
        weighted_lam = lamlags * w[:, None]
        dtheta = weights[1:p + 1, None] * (weighted_x.T @ rows)
        deta = weights[p + 1:, None] * (weighted_lam.T @ rows)

        grad_m = np.zeros(p + q + 1)
        grad_m[1:p + 1] = np.sum((rows @ params.theta.T) * weighted_x, axis=0)
        grad_m[p + 1:] = np.sum((rows @ params.eta.T) * weighted_lam, axis=0)
        ddelta = weights * (grad_m - weights @ grad_m) - params.delta / h.c1
        return dbeta, dtheta, deta, ddelta, float(dlambda0)

    def gradient(self, position: np.ndarray, block: Block) -> np.ndarray:
        params = self.unpack(position)
        dbeta, dtheta, deta, ddelta, dlambda0 = self.gradients(params, with_lambda0=block.name != "mu")
        if block.name == "mu":
            return dbeta
        # chain rule to log(lambda0) plus the Jacobian term
        dlog = params.lambda0 * dlambda0 + 1.0
        return np.concatenate([dtheta.ravel(), deta.ravel(), ddelta, [dlog]])


def intensities_recursive(params: TvbingarchParams, series: CountSeries, basis: SplineBasis) -> np.ndarray:
    return TvbingarchModel(series, basis, params.p, params.q).intensities(params)


def log_posterior_ingarch(params: TvbingarchParams, series: CountSeries, basis: SplineBasis,
                          hyper: HyperIngarch, likelihood_start: int = 1) -> float:
    model = TvbingarchModel(series, basis, params.p, params.q, hyper, likelihood_start=likelihood_start)
    return model.log_posterior_params(params)


def grad_log_posterior_ingarch(params: TvbingarchParams, series: CountSeries, basis: SplineBasis,
                               hyper: HyperIngarch, gradient_mode: GradientMode = GradientMode.DETACHED,
                               likelihood_start: int = 1):
    model = TvbingarchModel(series, basis, params.p, params.q, hyper, gradient_mode, likelihood_start)
    return model.gradients(params)
