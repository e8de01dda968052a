import numpy as np
from pytest import fixture

from app.models import HmcConfig, HyperIngarch
from app.simulator import builtin_truth, simulate
from app.splines import build_basis
from app.tvbarc import CountSeries


@fixture
def rng():
    return np.random.default_rng(20240611)


@fixture
def basis():
    return build_basis(6)


@fixture
def hyper():
    return HyperIngarch()


@fixture
def ar1_series():
    return simulate(builtin_truth("AR1"), 50, np.random.default_rng(7))


@fixture
def ar2_series():
    return simulate(builtin_truth("AR2"), 50, np.random.default_rng(8))


@fixture
def ingarch_series():
    return simulate(builtin_truth("INGARCH11"), 50, np.random.default_rng(9))


@fixture
def poisson_series():
    return CountSeries(values=np.random.default_rng(3).poisson(5.0, size=120))


@fixture
def quick_hmc():
    """Short chain for smoke-level sampler tests"""
    return HmcConfig(iterations=300, burn_in=200, leapfrog_steps=10, initial_step_size=0.01, adapt_interval=50, seed=11)
