from types import SimpleNamespace

import numpy as np
import pytest

from app.models import FitConfig, HmcConfig, ModelType, Scenario
from app.services import experiment_service
from app.services.experiment_service import ModelSpec, parse_model_spec, select_num_basis
from app.services.fit_service import build_model, fit_series, load_fit, persist_fit
from app.tvbarc import TvbarcModel
from app.tvbingarch import TvbingarchModel


@pytest.fixture
def quick_config(quick_hmc):
    return FitConfig(hmc=quick_hmc)


class TestBuildModel:
    def test_tvbarc(self, ar1_series, quick_config):
        model = build_model(ar1_series, quick_config)
        assert isinstance(model, TvbarcModel) and model.K == 6

    def test_tvbingarch_options(self, ingarch_series):
        config = FitConfig(model="tvbingarch", p=1, q=1, num_basis=8, gradient_mode="adjoint", likelihood_start=0)
        model = build_model(ingarch_series, config)
        assert isinstance(model, TvbingarchModel)
        assert model.K == 8 and model.likelihood_start == 0 and model.gradient_mode.value == "adjoint"


class TestFitAndPersist:
    def test_fit_summaries(self, ar1_series, quick_config):
        result = fit_series(ar1_series, quick_config)
        assert set(result.bands) == {"mu", "a1"}
        assert result.intensity.shape == (len(ar1_series) - 1,)
        assert set(result.acceptance) == {"beta", "theta", "delta"}
        assert result.baseline is not None and result.baseline.converged

    def test_draws_respect_constraints(self, ar2_series, quick_config):
        config = FitConfig(p=2, hmc=quick_config.hmc)
        result = fit_series(ar2_series, config, with_baseline=False)
        model = result.model
        for draw in result.chain.draws:
            params = model.unpack(draw)
            assert abs(params.weights.sum() - 1.0) <= 1e-12
            assert np.all((params.theta >= 0) & (params.theta <= 1))
            assert model.max_total_coefficient(params) < 1.0
            assert np.all(model.coefficient_curves(params, np.linspace(0, 1, 201))["mu"] > 0)

    def test_ingarch_draws_respect_constraints(self, ingarch_series, quick_config):
        config = FitConfig(model="tvbingarch", p=1, q=1, hmc=quick_config.hmc)
        result = fit_series(ingarch_series, config, with_baseline=False)
        model = result.model
        for draw in result.chain.draws:
            params = model.unpack(draw)
            assert abs(params.weights.sum() - 1.0) <= 1e-12
            assert np.all((params.theta >= 0) & (params.theta <= 1))
            assert np.all((params.eta >= 0) & (params.eta <= 1))
            assert model.max_total_coefficient(params) < 1.0
            assert np.all(model.coefficient_curves(params, np.linspace(0, 1, 201))["mu"] > 0)
            assert params.lambda0 > 0

    def test_persist_and_load(self, tmp_path, ar1_series, quick_config):
        result = fit_series(ar1_series, quick_config, n_chains=2)
        persist_fit(result, tmp_path)
        assert (tmp_path / "chain.csv").exists() and (tmp_path / "chain_2.csv").exists()

        config, series, model, chain = load_fit(tmp_path)
        assert config == quick_config
        np.testing.assert_array_equal(series.values, ar1_series.values)
        np.testing.assert_array_equal(chain.draws, result.chain.draws)
        assert model.parameter_names() == result.model.parameter_names()


class TestModelSpecs:
    @pytest.mark.parametrize("text,expected", [
        ("tvbarc:10", ModelSpec("tvbarc", 10, 0)),
        ("tvbingarch:1,1", ModelSpec("tvbingarch", 1, 1)),
        ("baseline", ModelSpec("baseline", 1, 0)),
        (" TVBARC:2 ", ModelSpec("tvbarc", 2, 0)),
    ])
    def test_parse(self, text, expected):
        assert parse_model_spec(text) == expected

    @pytest.mark.parametrize("text", ["garch:1", "tvbingarch:1", "tvbarc:1,2", "tvbarc:x"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_model_spec(text)

    def test_labels(self):
        assert ModelSpec("tvbingarch", 1, 1).label == "tvbingarch(1,1)"
        assert ModelSpec("tvbarc", 10).label == "tvbarc(10)"


class TestSelectNumBasis:
    def fake_fits(self, monkeypatch, scores):
        seen = []

        def fake(series, config, with_baseline=True):
            seen.append(config.num_basis)
            return SimpleNamespace(amse=scores[config.num_basis])

        monkeypatch.setattr(experiment_service, "fit_series", fake)
        return seen

    def test_first_stable_size(self, monkeypatch, ar1_series):
        seen = self.fake_fits(monkeypatch, {4: 10.0, 6: 8.0, 8: 7.9, 10: 7.85})
        chosen, scores = select_num_basis(ar1_series, FitConfig(), [10, 4, 8, 6], tol=0.05)
        assert chosen == 6
        assert seen == [4, 6, 8, 10]
        assert scores[8] == 7.9

    def test_never_stable_takes_largest(self, monkeypatch, ar1_series):
        self.fake_fits(monkeypatch, {4: 10.0, 6: 5.0, 8: 2.0})
        assert select_num_basis(ar1_series, FitConfig(), [4, 6, 8], tol=0.01)[0] == 8

    def test_needs_candidates(self, ar1_series):
        with pytest.raises(ValueError):
            select_num_basis(ar1_series, FitConfig(), [])


class TestReplicate:
    def test_seeds_and_means(self, monkeypatch):
        calls = []

        def fake(series, config, with_baseline=True):
            calls.append((int(series.values.sum()), config.hmc.seed))
            return SimpleNamespace(amse=float(config.hmc.seed), baseline=SimpleNamespace(amse=10.0),
                                   acceptance={"beta": 0.7})

        monkeypatch.setattr(experiment_service, "fit_series", fake)
        config = FitConfig(hmc=HmcConfig(iterations=10, burn_in=5, seed=3))
        table = experiment_service.replicate("AR1", 30, 3, config)
        assert [seed for _, seed in calls] == [3, 4, 5]
        assert len({total for total, _ in calls}) == 3
        assert table["amse"].iloc[-1] == pytest.approx(4.0)
        assert table["replicate"].iloc[-1] == "mean"

    def test_case_orders(self):
        assert experiment_service.CASE_ORDERS[Scenario.INGARCH11] == (ModelType.TVBINGARCH, 1, 1)
