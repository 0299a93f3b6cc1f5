"""Tests for the verification suite and the oracle comparison."""

import logging
import math

import pytest

from src.errors import InvalidParameterError
from src.fd_oracle import GridSpec
from src.mc_oracle import McConfig
from src.symmetry_engine import FOUR_TERM_NOTE
from src.verification import (
    SIGN_NOTE,
    TOLERANCES,
    CheckResult,
    market_for_alpha,
    oracle_comparison,
    run_suite,
)


def test_check_result_pass_rules():
    assert CheckResult("a", 1e-8, 1e-6).passed
    assert not CheckResult("a", 1e-5, 1e-6).passed
    assert not CheckResult("a", math.inf, 1e-6).passed
    assert not CheckResult("a", math.nan, 1e-6).passed


def test_market_for_alpha(market):
    m = market_for_alpha(0.0, market)
    assert m.r == pytest.approx(0.02)
    assert (m.sigma, m.K, m.T) == (market.sigma, market.K, market.T)
    assert market_for_alpha(0.75, market).r == pytest.approx(0.05)


def test_suite_passes_on_reference_market(market):
    report = run_suite(market, seed=1)
    assert [c.name for c in report.checks] == list(TOLERANCES)
    assert report.passed, report.to_frame().to_string()
    assert report.notes == [SIGN_NOTE, FOUR_TERM_NOTE]
    assert report.max_residual < 1e-5


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.75, 1.0, 1.5, 2.0])
def test_suite_passes_across_alpha(alpha, market):
    assert run_suite(market_for_alpha(alpha, market), seed=2).passed


def test_impossible_tolerance_fails(market):
    report = run_suite(market, tolerance=1e-30, seed=1, only=["isc_residual", "heat_residual"])
    assert not report.passed
    assert len(report.failures) == 2


def test_only_selects_checks(market):
    report = run_suite(market, seed=1, only=["reduction_roots"])
    assert [c.name for c in report.checks] == ["reduction_roots"]
    assert report.notes == [SIGN_NOTE]
    frame = report.to_frame()
    assert list(frame.columns) == ["alpha", "check", "measured", "tolerance", "passed"]
    assert bool(frame["passed"].iloc[0])


def test_oracle_comparison_fd(market):
    frame = oracle_comparison(110.0, 0.0, market, mode="fd", grid=GridSpec(4.0, 200, 200))
    assert list(frame["method"]) == ["analytic", "fd"]
    assert list(frame.columns) == ["method", "value", "abs_error", "rel_error", "std_error", "agreed"]
    assert frame["abs_error"].iloc[1] < 0.05


def test_oracle_comparison_mc(market):
    frame = oracle_comparison(110.0, 0.0, market, mode="mc", mc_config=McConfig(n_paths=20_000, n_steps=64, seed=5))
    row = frame.set_index("method").loc["mc"]
    assert row["std_error"] > 0
    assert row["abs_error"] < 4.0 * row["std_error"]


def test_oracle_comparison_preconditions(market):
    with pytest.raises(InvalidParameterError):
        oracle_comparison(110.0, 0.0, market, mode="tree")
    with pytest.raises(InvalidParameterError):
        oracle_comparison(110.0, 0.5, market, mode="mc")


@pytest.mark.parametrize("alpha", [1.5, 1.75, 2.0])
def test_residual_checks_hold_at_large_alpha(alpha, market):
    report = run_suite(market_for_alpha(alpha, market), seed=2, only=["heat_residual", "isc_residual"])
    assert report.passed, report.to_frame().to_string()


def test_further_solutions_check_on_reference_market(market):
    report = run_suite(market, seed=1, only=["further_solutions"])
    (check,) = report.checks
    assert check.passed
    assert check.measured < TOLERANCES["further_solutions"]


def test_oracle_comparison_warns_on_noisy_mc(market, caplog):
    with caplog.at_level(logging.WARNING, logger="src.verification"):
        oracle_comparison(110.0, 0.0, market, mode="mc", mc_config=McConfig(n_paths=1000, n_steps=16, seed=5))
    assert "increase the path count" in caplog.text
