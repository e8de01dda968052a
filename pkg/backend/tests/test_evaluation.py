import numpy as np
import pytest

from app.evaluation import (
    CredibleBand,
    amse,
    band_from_draws,
    coverage,
    credible_band,
    default_grid,
    fit_constant_baseline,
    fitted_residuals,
    median_band_width,
    posterior_mean_intensity,
)
from app.hmc import Chain, run_chain
from app.models import AmseReading, HmcConfig
from app.simulator import TruthFunctions, builtin_truth, simulate
from app.splines import build_basis
from app.tvbarc import CountSeries, TvbarcModel, TvbarcParams


def chain_of(model, positions, burn_in=0):
    positions = np.atleast_2d(positions)
    n = positions.shape[0]
    return Chain(
        draws=positions,
        log_posterior=np.zeros(n),
        accept_history=np.ones((n, len(model.blocks)), dtype=bool),
        step_size_history=np.ones((n, len(model.blocks))),
        burn_in=burn_in,
        rng_seed=0,
        parameter_names=model.parameter_names(),
        block_names=[b.name for b in model.blocks],
    )


def constant_model(values, level):
    """p = 0 model whose only draw gives lambda identically equal to level"""
    model = TvbarcModel(CountSeries(values=np.asarray(values)), build_basis(4), p=0)
    params = TvbarcParams(beta=np.full(4, np.log(level)), theta=np.zeros((0, 4)), delta=np.zeros(1))
    return model, model.pack(params)


class TestAmse:
    def test_exact_fit_is_zero(self):
        model, position = constant_model([4, 4, 4], 4.0)
        assert amse(chain_of(model, position), model.series, model) == pytest.approx(0.0, abs=1e-20)

    def test_hand_residuals(self):
        model, position = constant_model([3, 5], 4.0)
        assert amse(chain_of(model, position), model.series, model) == pytest.approx(1.0, rel=1e-12)

    def test_burn_in_draws_are_ignored(self):
        model, good = constant_model([4, 4, 4], 4.0)
        _, bad = constant_model([4, 4, 4], 40.0)
        chain = chain_of(model, np.vstack([bad, bad, good]), burn_in=2)
        assert amse(chain, model.series, model) == pytest.approx(0.0, abs=1e-20)

    def test_readings(self):
        model, low = constant_model([3, 5], 3.0)
        _, high = constant_model([3, 5], 5.0)
        chain = chain_of(model, np.vstack([low, high]))
        # per draw: residuals (0, 2) and (-2, 0); posterior mean fit: (-1, 1)
        assert amse(chain, model.series, model, AmseReading.PER_DRAW) == pytest.approx(2.0, rel=1e-12)
        assert amse(chain, model.series, model, AmseReading.POSTERIOR_MEAN) == pytest.approx(1.0, rel=1e-12)

    def test_draw_order_does_not_matter(self, rng, basis, ar1_series):
        model = TvbarcModel(ar1_series, basis, 1)
        positions = np.vstack([model.initial_position() + rng.normal(0, 0.05, model.dim) for _ in range(5)])
        positions[:, 6:12] = np.clip(positions[:, 6:12], 0, 1)
        forward = amse(chain_of(model, positions), ar1_series, model)
        backward = amse(chain_of(model, positions[::-1]), ar1_series, model)
        assert forward == pytest.approx(backward, rel=1e-12)

    def test_residuals_use_posterior_mean(self):
        model, low = constant_model([3, 5], 3.0)
        _, high = constant_model([3, 5], 5.0)
        fitted = posterior_mean_intensity(chain_of(model, np.vstack([low, high])), model)
        np.testing.assert_allclose(fitted, [4.0, 4.0])
        np.testing.assert_allclose(fitted_residuals(model.series, model, fitted), [-1.0, 1.0])


class TestBands:
    def test_identical_draws_collapse(self):
        values = np.tile(np.linspace(1, 2, 11), (20, 1))
        band = band_from_draws(values, np.linspace(0, 1, 11))
        np.testing.assert_allclose(band.lower, band.upper, rtol=1e-14)
        np.testing.assert_allclose(band.mean, np.linspace(1, 2, 11), rtol=1e-14)

    def test_linear_quantile_convention(self):
        values = np.tile(np.arange(1.0, 101.0)[:, None], (1, 5))
        band = band_from_draws(values, np.linspace(0, 1, 5), level=0.95)
        np.testing.assert_allclose(band.lower, 3.475)
        np.testing.assert_allclose(band.upper, 97.525)

    def test_levels_nest(self, rng):
        values = rng.normal(size=(400, 7))
        grid = np.linspace(0, 1, 7)
        wide, narrow = band_from_draws(values, grid, 0.95), band_from_draws(values, grid, 0.5)
        assert np.all(wide.lower <= narrow.lower) and np.all(narrow.upper <= wide.upper)
        assert median_band_width(narrow) < median_band_width(wide)

    def test_bad_level_rejected(self):
        with pytest.raises(ValueError):
            band_from_draws(np.ones((3, 2)), [0.0, 1.0], level=1.0)

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            band_from_draws(np.ones((3, 2)), [0.5, 0.5])

    def test_credible_band_of_model(self, basis, ar1_series):
        model = TvbarcModel(ar1_series, basis, 1)
        chain = chain_of(model, np.vstack([model.initial_position()] * 4))
        band = credible_band(chain, model, "a1")
        np.testing.assert_allclose(band.grid, default_grid(ar1_series))
        np.testing.assert_allclose(band.mean, 0.25)
        assert band.label == "a1"
        assert list(band.to_frame().columns) == ["x", "lower", "mean", "upper"]

    def test_unknown_function_rejected(self, basis, ar1_series):
        model = TvbarcModel(ar1_series, basis, 1)
        with pytest.raises(ValueError):
            credible_band(chain_of(model, model.initial_position()), model, "b1")


class TestCoverage:
    def band(self):
        grid = np.linspace(0, 1, 5)
        return CredibleBand(grid=grid, lower=grid - 0.1, mean=grid, upper=grid + 0.1, level=0.95)

    def test_truth_on_mean(self):
        assert coverage(self.band(), lambda x: x) == 1.0

    def test_truth_above(self):
        assert coverage(self.band(), lambda x: x + 1.0) == 0.0

    def test_partial(self):
        assert coverage(self.band(), lambda x: np.where(x < 0.5, x, 5.0)) == pytest.approx(0.4)


class TestConstantBaseline:
    def test_recovers_constant_truth(self):
        series = simulate(TruthFunctions(mu=lambda x: 5.0, a=[lambda x: 0.3]), 2000, np.random.default_rng(21))
        fit = fit_constant_baseline(series, 1)
        assert fit.converged
        assert fit.mu / (1 - fit.a.sum()) == pytest.approx(5.0 / 0.7, rel=0.05)
        assert fit.a[0] == pytest.approx(0.3, abs=0.1)
        assert fit.mu == pytest.approx(5.0, abs=1.0)

    def test_p_zero_is_sample_mean(self, poisson_series):
        fit = fit_constant_baseline(poisson_series, 0)
        assert fit.mu == pytest.approx(poisson_series.values.mean(), rel=1e-6)
        assert fit.a.size == 0

    def test_coefficients_stay_feasible(self, ar2_series):
        fit = fit_constant_baseline(ar2_series, 3)
        assert fit.mu > 0 and np.all(fit.a >= 0) and fit.a.sum() < 1

    def test_no_nearby_feasible_point_is_better(self, ar2_series):
        fit = fit_constant_baseline(ar2_series, 2)
        x = ar2_series.values.astype(float)
        z = np.column_stack([np.ones(x.size - 2), x[1:-1], x[:-2]])
        y = x[2:]
        w = np.concatenate([[fit.mu], fit.a])
        for k in range(3):
            for h in (-1e-2, 1e-2):
                moved = w.copy()
                moved[k] += h
                if moved[0] <= 0 or np.any(moved[1:] < 0) or moved[1:].sum() >= 1:
                    continue
                lam = z @ moved
                assert np.sum(-lam + y * np.log(lam)) <= fit.log_likelihood + 1e-5

    def test_explosive_series_stops_at_the_cap(self):
        # x_t = 1 + x_{t-1} wants a = 1
        fit = fit_constant_baseline(CountSeries(values=np.arange(1, 201)), 1)
        assert fit.a.sum() < 1.0
        assert fit.a[0] > 0.9

    def test_loses_to_time_varying_fit_on_ar1(self):
        series = simulate(builtin_truth("AR1"), 300, np.random.default_rng(5))
        model = TvbarcModel(series, build_basis(6), 1)
        chain = run_chain(model, HmcConfig(iterations=1000, burn_in=500, leapfrog_steps=15,
                                           initial_step_size=0.01, adapt_interval=50, seed=2))
        assert amse(chain, series, model) < fit_constant_baseline(series, 1).amse
