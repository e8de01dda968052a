"""
Synthetic count series from known coefficient functions
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple
from app.models import Scenario
from app.tvbarc import CountSeries
import numpy as np
import logging

logger = logging.getLogger(__name__)

CoefficientFn = Callable[[np.ndarray], np.ndarray]

CHECK_GRID = np.linspace(0.0, 1.0, 201)


@dataclass(frozen=True)
class TruthFunctions:
    mu: CoefficientFn
    a: List[CoefficientFn] = field(default_factory=list)
    b: List[CoefficientFn] = field(default_factory=list)
    label: str = "custom"

    def __post_init__(self):
        mu = _on_grid(self.mu, CHECK_GRID)
        if np.any(mu <= 0.0):
            raise ValueError(f"{self.label}: mu must be positive on [0, 1]")
        total = self.total_coefficient(CHECK_GRID)
        for fn in [*self.a, *self.b]:
            values = _on_grid(fn, CHECK_GRID)
            if np.any(values < 0.0) or np.any(values >= 1.0):
                raise ValueError(f"{self.label}: coefficient functions must map into [0, 1)")
        if np.max(total) >= 1.0:
            raise ValueError(f"{self.label}: sum of AR and CH coefficients reaches {np.max(total):.4f}, must stay below 1")

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    def total_coefficient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for fn in [*self.a, *self.b]:
            total = total + _on_grid(fn, x)
        return total

    def curve(self, name: str, x) -> np.ndarray:
        """Truth for a curve name as used by credible bands: mu, a1.., b1.."""
        x = np.asarray(x, dtype=float)
        if name == "mu":
            return _on_grid(self.mu, x)
        kind, index = name[0], int(name[1:]) - 1
        return _on_grid({"a": self.a, "b": self.b}[kind][index], x)


def _bump(height: float) -> CoefficientFn:
    return lambda x: height * np.exp(-(np.asarray(x) - 0.5) ** 2 / 0.1)


def _a_decreasing(x):
    return 0.3 * (np.asarray(x) - 1.0) ** 2 + 0.1


def _a_increasing(x):
    return 0.4 * np.asarray(x) ** 2 + 0.1


def _b_slow(x):
    return 0.1 * np.asarray(x) ** 1.5 + 0.1


def builtin_truth(case) -> TruthFunctions:
    """The bundled simulation scenarios"""
    try:
        case = Scenario(case)
    except ValueError:
        raise ValueError(f"unknown scenario {case!r}, expected one of {[s.value for s in Scenario]}")

    if case == Scenario.AR1:
        return TruthFunctions(mu=_bump(10.0), a=[_a_decreasing], label=case.value)
    if case == Scenario.AR2:
        return TruthFunctions(mu=_bump(10.0), a=[_a_decreasing, _a_increasing], label=case.value)
    return TruthFunctions(mu=_bump(25.0), a=[_a_decreasing], b=[_b_slow], label=case.value)


def _on_grid(fn: CoefficientFn, grid: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(fn(grid), dtype=float), grid.shape)


def stationary_start(truth: TruthFunctions) -> float:
    """Local stationary mean at x = 0"""
    origin = np.array([0.0])
    return float(_on_grid(truth.mu, origin)[0] / (1.0 - truth.total_coefficient(origin)[0]))


def simulate_path(truth: TruthFunctions, T: int, rng: np.random.Generator,
                  lambda_init: Optional[float] = None) -> Tuple[CountSeries, np.ndarray]:
    """Draw X_0..X_T and return them with the intensity path used"""
    if T < 10:
        raise ValueError("T must be at least 10")
    lambda_init = stationary_start(truth) if lambda_init is None else float(lambda_init)
    if not lambda_init > 0.0:
        raise ValueError("lambda_init must be positive")

    grid = np.arange(T + 1) / T
    mu = _on_grid(truth.mu, grid)
    a = [_on_grid(fn, grid) for fn in truth.a]
    b = [_on_grid(fn, grid) for fn in truth.b]

    x = np.zeros(T + 1, dtype=np.int64)
    lam = np.zeros(T + 1)
    lam[0] = lambda_init
    x[0] = rng.poisson(lambda_init)
    for t in range(1, T + 1):
        value = mu[t]
        # lags before the start of the series count as zero
        for i, coef in enumerate(a, start=1):
            if t - i >= 0:
                value += coef[t] * x[t - i]
        for k, coef in enumerate(b, start=1):
            if t - k >= 0:
                value += coef[t] * lam[t - k]
        lam[t] = value
        x[t] = rng.poisson(value)

    logger.debug(f"simulated {truth.label} with T={T}, mean count {x.mean():.2f}")
    return CountSeries(values=x), lam


def simulate(truth: TruthFunctions, T: int, rng: np.random.Generator,
             lambda_init: Optional[float] = None) -> CountSeries:
    return simulate_path(truth, T, rng, lambda_init)[0]


def mean_path(truth: TruthFunctions, T: int, m0: Optional[float] = None) -> np.ndarray:
    """E[X_t] from the recursion E[X_t] = mu + sum_i a_i E[X_{t-i}] + sum_k b_k E[lambda_{t-k}]"""
    m0 = stationary_start(truth) if m0 is None else float(m0)
    grid = np.arange(T + 1) / T
    mu = _on_grid(truth.mu, grid)
    a = [_on_grid(fn, grid) for fn in truth.a]
    b = [_on_grid(fn, grid) for fn in truth.b]

    # E[lambda_t] = E[X_t], so both lag sums use the same path
    mean = np.zeros(T + 1)
    mean[0] = m0
    for t in range(1, T + 1):
        value = mu[t]
        for i, coef in enumerate(a, start=1):
            if t - i >= 0:
                value += coef[t] * mean[t - i]
        for k, coef in enumerate(b, start=1):
            if t - k >= 0:
                value += coef[t] * mean[t - k]
        mean[t] = value
    return mean
