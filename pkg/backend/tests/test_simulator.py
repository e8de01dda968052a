import math

import numpy as np
import pytest

from app.data_import import read_count_csv, write_count_csv
from app.simulator import TruthFunctions, builtin_truth, mean_path, simulate, simulate_path, stationary_start


class TestTruthFunctions:
    def test_ar1_midpoint(self):
        truth = builtin_truth("AR1")
        assert truth.curve("mu", 0.5) == pytest.approx(10.0)
        assert truth.curve("a1", 0.5) == pytest.approx(0.175)

    def test_ar2_right_end(self):
        truth = builtin_truth("AR2")
        assert truth.curve("a1", 1.0) == pytest.approx(0.1)
        assert truth.curve("a2", 1.0) == pytest.approx(0.5)
        assert truth.total_coefficient(np.array([1.0]))[0] == pytest.approx(0.6)

    def test_ingarch_left_end(self):
        truth = builtin_truth("INGARCH11")
        assert truth.curve("mu", 0.0) == pytest.approx(25 * math.exp(-2.5))
        assert truth.curve("a1", 0.0) == pytest.approx(0.4)
        assert truth.curve("b1", 0.0) == pytest.approx(0.1)
        assert (truth.p, truth.q) == (1, 1)

    def test_zero_mu_rejected(self):
        with pytest.raises(ValueError):
            TruthFunctions(mu=lambda x: 0.0 * x)

    def test_explosive_coefficients_rejected(self):
        with pytest.raises(ValueError):
            TruthFunctions(mu=lambda x: 5.0, a=[lambda x: 0.6, lambda x: 0.5])

    def test_unknown_case(self):
        with pytest.raises(ValueError):
            builtin_truth("AR7")


class TestSimulate:
    def test_constant_poisson_mean(self):
        series = simulate(TruthFunctions(mu=lambda x: 5.0), 10000, np.random.default_rng(0))
        assert 4.8 <= series.values.mean() <= 5.2

    def test_seed_reproduces_series(self):
        first = simulate(builtin_truth("AR1"), 100, np.random.default_rng(42))
        second = simulate(builtin_truth("AR1"), 100, np.random.default_rng(42))
        np.testing.assert_array_equal(first.values, second.values)

    def test_path_is_the_recursion(self):
        truth = builtin_truth("INGARCH11")
        series, lam = simulate_path(truth, 60, np.random.default_rng(1), lambda_init=3.0)
        grid = np.arange(61) / 60
        x = series.values
        assert lam[0] == 3.0
        expected = truth.curve("mu", grid[1:]) + truth.curve("a1", grid[1:]) * x[:-1] + truth.curve("b1", grid[1:]) * lam[:-1]
        np.testing.assert_allclose(lam[1:], expected, rtol=1e-12)

    def test_stationary_start(self):
        truth = builtin_truth("AR1")
        assert stationary_start(truth) == pytest.approx(truth.curve("mu", 0.0) / (1 - 0.4))

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            simulate(builtin_truth("AR1"), 5, np.random.default_rng(0))

    def test_csv_round_trip(self, tmp_path):
        series = simulate(builtin_truth("AR2"), 200, np.random.default_rng(3))
        path = write_count_csv(series, tmp_path / "series.csv")
        np.testing.assert_array_equal(read_count_csv(path).values, series.values)

    def test_csv_bytes_repeat(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            write_count_csv(simulate(builtin_truth("AR1"), 100, np.random.default_rng(42)), tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestMeanPath:
    def test_constant_truth(self):
        np.testing.assert_allclose(mean_path(TruthFunctions(mu=lambda x: 4.0), 50), 4.0)

    def test_tracks_replicate_average(self):
        truth = builtin_truth("AR1")
        T, n = 200, 300
        rng = np.random.default_rng(11)
        paths = np.vstack([simulate(truth, T, rng).values for _ in range(n)])
        expected = mean_path(truth, T)
        se = paths.std(axis=0, ddof=1) / np.sqrt(n)
        # X_0 is Poisson with the stationary mean, so the recursion starts from it
        assert np.all(np.abs(paths.mean(axis=0) - expected) <= 5 * se + 1e-12)

    @pytest.mark.slow
    def test_tracks_replicate_average_full_scale(self):
        truth = builtin_truth("AR1")
        rng = np.random.default_rng(12)
        paths = np.vstack([simulate(truth, 500, rng).values for _ in range(200)])
        se = paths.std(axis=0, ddof=1) / np.sqrt(200)
        assert np.all(np.abs(paths.mean(axis=0) - mean_path(truth, 500)) <= 5 * se + 1e-12)
