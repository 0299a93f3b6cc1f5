"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from src.coordinate_transform import MarketParams, derive_params


@pytest.fixture
def market():
    """r=0.05, sigma=0.2, K=100, T=1 (alpha = 0.75)."""
    return MarketParams(r=0.05, sigma=0.2, K=100.0, T=1.0)


@pytest.fixture
def alpha_zero_market():
    """r = sigma^2 / 2 gives alpha = 0."""
    return MarketParams(r=0.02, sigma=0.2, K=100.0, T=1.0)


@pytest.fixture
def tp(market):
    return derive_params(market)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def random_markets(rng):
    """20 parameter sets with 2r/sigma^2 in [0.5, 3]."""
    markets = []
    for _ in range(20):
        sigma = rng.uniform(0.1, 0.5)
        k = rng.uniform(0.5, 3.0)
        markets.append(MarketParams(r=0.5 * k * sigma ** 2, sigma=sigma, K=rng.uniform(50, 150), T=rng.uniform(0.25, 2.0)))
    return markets
