"""Tests for the Crank-Nicolson oracle."""

import logging

import numpy as np
import pandas as pd
import pytest

from src.analytic_pricer import PriceQuery, barrier_level, price
from src.coordinate_transform import MarketParams
from src.errors import DomainError, InvalidParameterError
from src.fd_oracle import (
    GridSpec,
    analytic_xi_solution,
    cn_residual,
    convergence_study,
    far_field_value,
    solve,
)


@pytest.fixture
def coarse(market):
    return solve(market, GridSpec(xi_max=4.0, n_space=100, n_time=100))


def test_grid_validation():
    with pytest.raises(InvalidParameterError):
        GridSpec(xi_max=0.0)
    with pytest.raises(InvalidParameterError):
        GridSpec(n_space=8, n_time=100)
    g = GridSpec(xi_max=4.0, n_space=100, n_time=50)
    assert g.dxi == pytest.approx(0.04)
    assert g.refined() == GridSpec(xi_max=4.0, n_space=200, n_time=100)


def test_initial_and_boundary_rows(coarse, tp):
    np.testing.assert_allclose(coarse.values[0], analytic_xi_solution(coarse.xi, 0.0, tp), rtol=1e-13, atol=1e-15)
    np.testing.assert_array_equal(coarse.values[:, 0], 0.0)
    np.testing.assert_allclose(coarse.values[:, -1], far_field_value(4.0, coarse.t, coarse.market, tp), rtol=1e-13)


def test_far_field_matches_closed_form(market, tp):
    t = np.linspace(0.0, market.t_max, 7)
    np.testing.assert_allclose(far_field_value(4.0, t, market), analytic_xi_solution(4.0, t, tp), rtol=1e-12)


def test_solution_stays_close_to_closed_form(coarse, tp):
    xi_grid, t_grid = np.meshgrid(coarse.xi, coarse.t)
    exact = analytic_xi_solution(xi_grid, t_grid, tp)
    assert np.max(np.abs(coarse.values - exact) / np.maximum(1.0, np.abs(exact))) < 1e-3


def test_peclet_limit():
    steep = MarketParams(r=0.5, sigma=0.1, K=100.0, T=1.0)
    with pytest.raises(InvalidParameterError, match="Peclet"):
        solve(steep, GridSpec(xi_max=4.0, n_space=100, n_time=100))


def test_cn_residual_of_computed_levels(coarse, tp):
    drift = tp.drift
    # skip the implicit-Euler start
    assert cn_residual(coarse.values[1:], coarse.xi, coarse.t[1:], drift) < 1e-6
    xi_grid, t_grid = np.meshgrid(coarse.xi, coarse.t)
    exact = analytic_xi_solution(xi_grid, t_grid, tp)
    assert cn_residual(exact, coarse.xi, coarse.t, drift) > 1e-3


def test_price_off_grid(coarse, market):
    assert coarse.price(90.0, 0.5) == 0.0
    assert coarse.price(float(np.exp(-0.05) * 100.0), 0.0) == pytest.approx(0.0, abs=1e-9)


def test_price_on_moderate_grid(market):
    sol = solve(market, GridSpec(xi_max=4.0, n_space=400, n_time=400))
    assert sol.price(110.0, 0.0) == pytest.approx(price(PriceQuery(S=110.0, p=0.0), market).value, abs=5e-3)


@pytest.mark.slow
def test_reference_price_on_default_grid(market, rng):
    sol = solve(market, GridSpec(xi_max=4.0, n_space=800, n_time=800))
    assert sol.price(110.0, 0.0) == pytest.approx(14.8771, abs=1e-3)

    p = rng.uniform(0.0, 0.9 * market.T, 10)
    S = barrier_level(p, market) * rng.uniform(1.1, 2.0, 10)
    for s, q in zip(S, p):
        exact = price(PriceQuery(S=float(s), p=float(q)), market).value
        assert abs(sol.price(float(s), float(q)) - exact) / exact < 1e-4
    assert np.all(np.isfinite(sol.values))
    assert sol.values.min() >= -1e-10


@pytest.mark.parametrize("n", [32, 100])
def test_grid_values_finite_and_nonnegative(market, n):
    sol = solve(market, GridSpec(xi_max=4.0, n_space=n, n_time=n))
    assert np.all(np.isfinite(sol.values))
    assert sol.values.min() >= -1e-10


def test_value_at_domain(coarse):
    with pytest.raises(DomainError):
        coarse.value_at(-0.1, 0.01)
    with pytest.raises(DomainError):
        coarse.value_at(1.0, 1.0)


def test_value_at_far_field_warning(coarse, caplog):
    with caplog.at_level(logging.WARNING, logger="src.fd_oracle"):
        coarse.value_at(3.9, 0.01)
    assert "far-field" in caplog.text


def test_value_at_interpolates_nodes(coarse):
    assert coarse.value_at(coarse.xi[10], coarse.t[5]) == pytest.approx(coarse.values[5, 10], rel=1e-12)


def test_frame_and_csv(coarse, tmp_path):
    frame = coarse.to_frame()
    assert list(frame.columns) == ["xi", "t", "v"]
    assert len(frame) == 101 * 101
    target = coarse.dump_csv(tmp_path / "fd_grid.csv")
    assert target.read_text().splitlines()[0] == "xi,t,v"
    assert len(pd.read_csv(target)) == len(frame)


def test_convergence_order(market):
    grids = [GridSpec(4.0, n, n) for n in (100, 200, 400)]
    frame = convergence_study(market, grids)
    assert list(frame.columns) == ["n_space", "n_time", "dxi", "dt", "max_error", "observed_order"]
    assert np.isnan(frame["observed_order"].iloc[0])
    for order in frame["observed_order"].iloc[1:]:
        assert 1.7 <= order <= 2.3


def test_time_refinement_hits_spatial_floor(market, tp):
    errors = []
    for n_time in (100, 400):
        sol = solve(market, GridSpec(4.0, 100, n_time))
        xi_grid, t_grid = np.meshgrid(sol.xi, sol.t)
        errors.append(np.max(np.abs(sol.values - analytic_xi_solution(xi_grid, t_grid, tp))))
    assert errors[1] == pytest.approx(errors[0], rel=0.1)


def test_convergence_study_preconditions(market, caplog):
    with pytest.raises(InvalidParameterError):
        convergence_study(market, [GridSpec(4.0, 32, 32), GridSpec(4.0, 64, 64)])
    with caplog.at_level(logging.WARNING, logger="src.fd_oracle"):
        convergence_study(market, [GridSpec(4.0, 32, 32), GridSpec(4.0, 48, 48), GridSpec(4.0, 96, 96)])
    assert "factor-2" in caplog.text
