"""Tests for the run ledger."""

import pytest

from src.database import Database, get_database


@pytest.fixture
def db(tmp_path):
    return Database(f"sqlite:///{tmp_path / 'runs.db'}")


def test_record_and_read_back(db):
    run_id = db.record_run("price", {"S": 110.0, "K": 100.0}, {"value": 14.8771}, passed=True)
    run = db.get_run(run_id)
    assert run.command == "price"
    assert run.parameters == {"S": 110.0, "K": 100.0}
    assert run.results["value"] == 14.8771
    data = run.to_dict()
    assert data["id"] == run_id and data["passed"] is True
    assert data["created_at"] is not None


def test_runs_newest_first_with_filter_and_limit(db):
    for command in ("price", "verify", "price", "oracle"):
        db.record_run(command, {}, {}, passed=command != "verify")
    runs = db.get_runs()
    assert [r.command for r in runs] == ["oracle", "price", "verify", "price"]
    assert [r.command for r in db.get_runs(command="price")] == ["price", "price"]
    assert len(db.get_runs(limit=2)) == 2
    assert [r.passed for r in db.get_runs(command="verify")] == [False]


def test_missing_run(db):
    assert db.get_run(999) is None


def test_clear_runs(db):
    db.record_run("emit", {}, {})
    db.record_run("emit", {}, {})
    assert db.clear_runs() == 2
    assert db.get_runs() == []


def test_explicit_url_gives_fresh_handler(tmp_path):
    url = f"sqlite:///{tmp_path / 'other.db'}"
    assert get_database(url) is not get_database(url)
    assert get_database(url).database_url == url
