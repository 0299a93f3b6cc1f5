"""Tests for the Black-Scholes <-> heat change of variables."""

import math

import numpy as np
import pytest

from src.coordinate_transform import (
    BSPoint,
    HeatPoint,
    MarketParams,
    StageLabel,
    bs_residual,
    derive_params,
    from_heat,
    from_heat_arrays,
    from_heat_function,
    heat_barrier,
    heat_residual,
    terminal_condition_heat,
    to_heat,
    to_heat_arrays,
    to_heat_function,
    transform_stages,
)
from src.errors import DomainError, InvalidParameterError, StepSizeError


def test_derive_params_default_market(market):
    tp = derive_params(market)
    assert tp.alpha == pytest.approx(0.75, abs=1e-15)
    assert tp.beta == pytest.approx(3.0625, abs=1e-15)
    assert tp.beta == pytest.approx((tp.alpha + 1) ** 2, abs=1e-15)
    assert tp.drift == pytest.approx(2.5)


def test_alpha_zero_market(alpha_zero_market):
    tp = derive_params(alpha_zero_market)
    assert tp.alpha == pytest.approx(0.0, abs=1e-15)
    assert tp.beta == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs, name", [
    (dict(r=0.05, sigma=0.0, K=100, T=1), "sigma"),
    (dict(r=0.05, sigma=-0.2, K=100, T=1), "sigma"),
    (dict(r=0.05, sigma=0.2, K=0, T=1), "K"),
    (dict(r=0.05, sigma=0.2, K=100, T=0), "T"),
    (dict(r=-0.01, sigma=0.2, K=100, T=1), "r"),
    (dict(r=float("nan"), sigma=0.2, K=100, T=1), "r"),
])
def test_invalid_market_names_parameter(kwargs, name):
    with pytest.raises(InvalidParameterError, match=name):
        MarketParams(**kwargs)


def test_to_heat_at_strike_and_maturity(market):
    pt = to_heat(BSPoint(S=100.0, p=1.0, V=0.0), market)
    assert pt.x == 0.0 and pt.t == 0.0 and pt.u == 0.0


def test_to_heat_example(market):
    pt = to_heat(BSPoint(S=110.0, p=0.0, V=14.8771), market)
    assert pt.x == pytest.approx(math.log(1.1), rel=1e-12)
    assert pt.t == pytest.approx(0.02, rel=1e-12)


def test_non_positive_spot_is_a_domain_error(market):
    with pytest.raises(DomainError):
        BSPoint(S=0.0, p=0.5)
    with pytest.raises(DomainError):
        to_heat_arrays(np.array([1.0, -1.0]), 0.5, 0.0, market)


def test_time_outside_horizon_is_a_domain_error(market):
    with pytest.raises(DomainError):
        to_heat_arrays(100.0, 1.5, 0.0, market)
    with pytest.raises(DomainError):
        from_heat_arrays(0.0, -0.01, 0.0, market)


def test_round_trip(market, rng):
    S = market.K * np.exp(rng.uniform(-2, 2, 10_000))
    p = rng.uniform(0, market.T, 10_000)
    V = rng.uniform(0, 200, 10_000)
    S2, p2, V2 = from_heat_arrays(*to_heat_arrays(S, p, V, market), market)
    np.testing.assert_allclose(S2, S, rtol=1e-12)
    np.testing.assert_allclose(p2, p, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(V2, V, rtol=1e-12, atol=1e-12)


def test_scalar_round_trip(market):
    back = from_heat(to_heat(BSPoint(S=123.0, p=0.3, V=7.5), market), market)
    assert back.S == pytest.approx(123.0, rel=1e-13)
    assert back.p == pytest.approx(0.3, rel=1e-13)
    assert back.V == pytest.approx(7.5, rel=1e-13)


def test_transform_stages_end_at_u(market):
    pt = BSPoint(S=120.0, p=0.4, V=25.0)
    stages = transform_stages(pt, market)
    assert [s.label for s in stages] == [StageLabel.V, StageLabel.W, StageLabel.Y, StageLabel.U]
    assert stages[-1].value == pytest.approx(to_heat(pt, market).u, rel=1e-13)


def test_heat_barrier_is_image_of_discounted_strike(market, tp):
    p = np.linspace(0, 1, 11)
    S = market.K * np.exp(-market.r * (market.T - p))
    x, t, _ = to_heat_arrays(S, p, 0.0, market)
    np.testing.assert_allclose(heat_barrier(t, tp), x, atol=1e-14)


def test_terminal_condition_heat(tp):
    assert terminal_condition_heat(-0.5, tp) == 0.0
    assert terminal_condition_heat(0.0, tp) == 0.0
    x = 0.4
    assert terminal_condition_heat(x, tp) == pytest.approx(math.exp(1.75 * x) - math.exp(0.75 * x))


def test_payoff_maps_to_terminal_condition(market, tp):
    S = np.linspace(50, 200, 31)
    x, _, u = to_heat_arrays(S, market.T, np.maximum(S - market.K, 0), market)
    np.testing.assert_allclose(u, terminal_condition_heat(x, tp), rtol=1e-13, atol=1e-13)


def test_heat_residual_of_fundamental_exponential():
    u = lambda x, t: math.exp(2 * x + 4 * t)
    assert abs(heat_residual(u, 0.3, 0.2)) < 1e-5 * u(0.3, 0.2)


def test_heat_residual_detects_non_solution():
    assert heat_residual(lambda x, t: x ** 2, 0.5, 0.5) == pytest.approx(-2.0, rel=1e-6)


def test_heat_residual_step_reaching_negative_time():
    with pytest.raises(StepSizeError):
        heat_residual(lambda x, t: x, 0.0, 1e-5, h=(1e-3, 1e-3))


def test_bs_residual_of_forward_is_zero(market):
    forward = lambda S, p: S - market.K * math.exp(-market.r * (market.T - p))
    assert abs(bs_residual(forward, 110.0, 0.5, market)) < 1e-6


def test_bs_residual_stencil_outside_domain(market):
    with pytest.raises(StepSizeError):
        bs_residual(lambda S, p: S, 110.0, 1.0, market)
    with pytest.raises(StepSizeError):
        bs_residual(lambda S, p: S, 1e-3, 0.5, market, h=(1e-2, 1e-3))


def test_function_maps_are_inverse(market):
    value_fn = lambda S, p: S * p + 1.0
    back = from_heat_function(to_heat_function(value_fn, market), market)
    assert back(105.0, 0.25) == pytest.approx(value_fn(105.0, 0.25), rel=1e-12)


def test_transform_carries_bs_solutions_to_heat_solutions(market, tp):
    forward = lambda S, p: S - market.K * math.exp(-market.r * (market.T - p))
    u_fn = to_heat_function(forward, market)
    x, t = 0.2, 0.01
    assert abs(heat_residual(u_fn, x, t)) < 1e-6 * max(1.0, abs(u_fn(x, t)))
