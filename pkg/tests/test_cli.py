"""End-to-end tests of the command-line interface through main(argv)."""

import json

import pandas as pd
import pytest

import config as config_module
from src import cli
from src.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, main
from src.database import Database
from templates.reports import ReportLibrary

MARKET = ["--strike", "100", "--rate", "0.05", "--vol", "0.2", "--maturity", "1"]


@pytest.fixture(autouse=True)
def no_ambient_config(monkeypatch):
    monkeypatch.delenv(config_module.CONFIG_ENV_VAR, raising=False)
    monkeypatch.setattr(config_module, "CONFIG_FILE", None)
    monkeypatch.setattr(cli.config, "RECORD_RUNS", False)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- price ---

def test_price_reference_value(capsys):
    code, out, _ = run(capsys, "price", "--spot", "110", *MARKET, "--time", "0")
    assert code == EXIT_OK
    assert "value         14.8771" in out
    assert "interior" in out
    assert "delta         1" in out


def test_price_on_typed_barrier(capsys):
    code, out, _ = run(capsys, "price", "--spot", "95.1229", *MARKET, "--time", "0")
    assert code == EXIT_OK
    assert "value         0" in out
    assert "region        barrier" in out
    assert "knocked out" in out


def test_price_full_precision(capsys):
    _, out, _ = run(capsys, "price", "--spot", "110", *MARKET, "--full-precision")
    assert "14.8770575499" in out


def test_price_json(capsys):
    code, out, _ = run(capsys, "price", "--spot", "110", *MARKET, "--format", "json")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload["value"] == pytest.approx(14.877057549928, abs=1e-9)
    assert payload["region"] == "interior"
    assert payload["market"] == {"r": 0.05, "sigma": 0.2, "K": 100.0, "T": 1.0}


def test_price_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "price", "--spot", "110", *MARKET, "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "S,p,V,region"
    target = tmp_path / "price.csv"
    run(capsys, "price", "--spot", "110", *MARKET, "--format", "csv", "--output", str(target))
    assert target.read_text().startswith("S,p,V,region\n110.0,0.0,")


def test_missing_vol_is_a_usage_error(capsys):
    code, _, err = run(capsys, "price", "--spot", "110", "--strike", "100", "--rate", "0.05", "--maturity", "1")
    assert code == EXIT_INVALID
    assert "sigma" in err


@pytest.mark.parametrize("argv", [
    ["price", "--spot", "110", "--strike", "100", "--rate", "0.05", "--vol", "-0.2", "--maturity", "1"],
    ["price", "--spot", "110", *MARKET, "--time", "2"],
    ["price", "--spot", "abc", *MARKET],
    ["quote"],
])
def test_invalid_input_exits_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INVALID
    assert err.startswith("error:")


def test_config_file_and_flag_precedence(capsys, tmp_path, monkeypatch):
    settings = tmp_path / "pricer.env"
    settings.write_text("rate=0.05\nvol=0.2\nstrike=100\nmaturity=1\nspot=110\n")
    code, out, _ = run(capsys, "price", "--config", str(settings))
    assert code == EXIT_OK and "14.8771" in out

    monkeypatch.setenv(config_module.CONFIG_ENV_VAR, str(settings))
    _, out, _ = run(capsys, "price", "--spot", "120")
    assert "24.8771" in out


def test_missing_config_file(capsys, tmp_path):
    code, _, err = run(capsys, "price", "--config", str(tmp_path / "nope.env"))
    assert code == EXIT_INVALID
    assert "config file not found" in err


# --- verify ---

def test_verify_selected_checks_pass(capsys):
    code, out, _ = run(capsys, "verify", *MARKET, "--check", "reduction_roots", "--check", "terminal_fit")
    assert code == EXIT_OK
    assert "reduction_roots" in out and "terminal_fit" in out
    assert "result        PASS" in out


def test_verify_impossible_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", *MARKET, "--tolerance", "1e-30", "--check", "isc_residual")
    assert code == EXIT_FAILED
    assert "FAIL" in out


def test_verify_alpha_sweep_json(capsys):
    code, out, _ = run(
        capsys, "verify", "--alpha-sweep", "0:0.5:0.25", "--check", "reduction_roots", "--format", "json"
    )
    payload = json.loads(out)
    assert code == EXIT_OK and payload["passed"]
    assert [round(r["alpha"], 12) for r in payload["reports"]] == [0.0, 0.25, 0.5]


@pytest.mark.slow
def test_verify_full_sweep(capsys):
    code, _, _ = run(capsys, "verify", "--alpha-sweep", "0:2:0.25")
    assert code == EXIT_OK


# --- oracle ---

def test_oracle_mc_is_deterministic(capsys):
    argv = ["oracle", *MARKET, "--mode", "mc", "--paths", "1000", "--steps", "16", "--seed", "7"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
    assert first[0] in (EXIT_OK, EXIT_FAILED)
    assert "mc" in first[1]


def test_oracle_study(capsys):
    code, out, _ = run(capsys, "oracle", *MARKET, "--mode", "fd", "--study", "--grids", "32,64,128")
    assert code == EXIT_OK
    assert "observed_order" in out and "128" in out


@pytest.mark.slow
def test_oracle_both_default_parameters(capsys):
    code, out, _ = run(capsys, "oracle", "--mode", "both")
    assert code == EXIT_OK
    assert "agree" in out


# --- emit ---

def test_emit_surface_and_plot(capsys, tmp_path):
    code, out, _ = run(capsys, "emit", *MARKET, "--output", str(tmp_path), "--spots", "5", "--times", "3", "--plot")
    assert code == EXIT_OK
    surface = (tmp_path / "surface.csv").read_text()
    assert surface.splitlines()[0] == "S,p,V,region"
    assert len(surface.splitlines()) == 1 + 3 * 6
    assert (tmp_path / "surface.html").exists()
    assert "surface.html" in out


def test_emit_fd_and_mc(capsys, tmp_path):
    code, _, _ = run(
        capsys, "emit", *MARKET, "--what", "fd", "--what", "mc", "--output", str(tmp_path),
        "--n-space", "32", "--n-time", "32", "--paths", "2000", "--steps", "16",
    )
    assert code == EXIT_OK
    assert (tmp_path / "fd_grid.csv").read_text().startswith("xi,t,v\n")
    assert (tmp_path / "mc_batches.csv").read_text().startswith("batch,paths,batch_mean,running_mean\n")


# --- history ---

def test_recorded_runs_show_in_history(capsys, tmp_path, monkeypatch):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    ledger = Database(url)
    monkeypatch.setattr(cli, "get_database", lambda database_url=None: ledger)

    run(capsys, "price", "--spot", "110", *MARKET, "--record")
    run(capsys, "verify", *MARKET, "--check", "reduction_roots", "--record")

    code, out, _ = run(capsys, "history", "--database", url, "--format", "json")
    runs = json.loads(out)["runs"]
    assert code == EXIT_OK
    assert [r["command"] for r in runs] == ["verify", "price"]
    assert runs[1]["results"]["region"] == "interior"

    _, out, _ = run(capsys, "history", "--database", url, "--command", "price")
    assert "Recorded runs (1)" in out

    _, out, _ = run(capsys, "history", "--database", url, "--clear")
    assert "cleared 2 runs" in out


def test_subcommand_help_comes_from_report_templates(monkeypatch):
    monkeypatch.setenv("COLUMNS", "200")
    text = cli.build_parser().format_help()
    for command in ("price", "verify", "oracle", "history"):
        assert ReportLibrary.get_template(command).description in text


def test_emit_and_price_agree_on_typed_barrier(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "default_spot_grid", lambda m, n=None: [95.1229, 110.0])
    code, _, _ = run(capsys, "emit", *MARKET, "--output", str(tmp_path), "--times", "2")
    assert code == EXIT_OK
    surface = pd.read_csv(tmp_path / "surface.csv")
    emitted = surface[(surface["S"] == 95.1229) & (surface["p"] == 0.0)]["region"].iloc[0]

    _, out, _ = run(capsys, "price", "--spot", "95.1229", *MARKET, "--format", "csv")
    assert out.splitlines()[1].endswith(",barrier")
    assert emitted == "barrier"
