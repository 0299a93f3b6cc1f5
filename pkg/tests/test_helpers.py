"""Tests for formatting, parsing and export helpers."""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.errors import ConfigValidationError
from utils.helpers import (
    export_frame_to_csv,
    export_to_json,
    format_number,
    format_record,
    format_table,
    load_config_file,
    parse_int_list,
    parse_sweep,
)


@pytest.mark.parametrize("value, expected", [
    (14.877057549928598, "14.8771"),
    (0.0, "0"),
    (100, "100"),
    (np.int64(7), "7"),
    (1.5e-11, "1.5e-11"),
    (float("inf"), "inf"),
    ("barrier", "barrier"),
    (True, "True"),
])
def test_format_number(value, expected):
    assert format_number(value) == expected


def test_format_number_full_precision():
    assert format_number(0.1, full_precision=True) == "0.10000000000000001"


def test_format_record_and_table():
    assert format_record({"a": 1.23456789, "b": "x"}) == {"a": "1.23457", "b": "x"}
    text = format_table(pd.DataFrame({"n": [100, 200], "err": [0.00123456789, 0.000308]}))
    assert "0.00123457" in text and "200" in text
    assert format_table(pd.DataFrame()) == "(no rows)"


def test_parse_sweep():
    assert parse_sweep("0:2:0.25") == pytest.approx([0.25 * i for i in range(9)])
    assert parse_sweep("1:1:0.5") == [1.0]
    for bad in ("0:2", "a:b:c", "0:2:0", "2:0:0.5"):
        with pytest.raises(ConfigValidationError):
            parse_sweep(bad)


def test_parse_int_list():
    assert parse_int_list("100,200, 400") == [100, 200, 400]
    with pytest.raises(ConfigValidationError):
        parse_int_list("100,abc")
    with pytest.raises(ConfigValidationError):
        parse_int_list(",")


def test_load_config_file(tmp_path, caplog):
    path = tmp_path / "pricer.env"
    path.write_text("RATE=0.05\nvol=0.2\nsteps=64\nunknown=1\noutput=out\n")
    assert load_config_file(path) == {"rate": 0.05, "vol": 0.2, "steps": 64, "output": "out"}
    assert "unknown" in caplog.text
    assert load_config_file(None) == {}


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigValidationError):
        load_config_file(tmp_path / "missing.env")
    path = tmp_path / "bad.env"
    path.write_text("vol=high\n")
    with pytest.raises(ConfigValidationError, match="vol"):
        load_config_file(path)


def test_export_frame_to_csv(tmp_path):
    target = export_frame_to_csv(pd.DataFrame({"S": [100.0], "V": [4.9]}), tmp_path / "nested" / "out.csv")
    assert target.read_bytes() == b"S,V\n100.0,4.9\n"


def test_export_to_json():
    payload = json.loads(export_to_json({"value": 1.5, "path": Path("out") / "surface.csv"}))
    assert payload == {"value": 1.5, "path": str(Path("out") / "surface.csv")}
