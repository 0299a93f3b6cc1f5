"""
Helper Functions
Utility functions used throughout the Barrier Symmetry Pricer
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from dotenv import dotenv_values
import logging

# Local imports
from config import config
from src.errors import ConfigValidationError

# Setup logging
logger = logging.getLogger(__name__)

# Keys accepted in a flat KEY=value config file, mapped to their parser
CONFIG_FILE_KEYS = {
    'rate': float, 'vol': float, 'strike': float, 'maturity': float,
    'spot': float, 'time': float,
    'paths': int, 'steps': int, 'seed': int,
    'xi_max': float, 'n_space': int, 'n_time': int,
    'tolerance': float, 'output': str,
}


# ===== FORMATTING HELPERS =====

def format_number(number: Union[int, float], full_precision: bool = False) -> str:
    """
    Format number for display

    Args:
        number: Number to format
        full_precision: 17 significant digits instead of the default 6

    Returns:
        Formatted number string
    """
    if isinstance(number, (bool, np.bool_)) or not isinstance(number, (int, float, np.integer, np.floating)):
        return str(number)
    if isinstance(number, (int, np.integer)):
        return str(int(number))
    digits = config.FULL_PRECISION_DIGITS if full_precision else config.SIGNIFICANT_DIGITS
    value = float(number)
    if not math.isfinite(value):
        return str(value)
    if value == 0:
        return "0"
    return f"{value:.{digits}g}"


def format_record(record: Dict[str, Any], full_precision: bool = False) -> Dict[str, str]:
    """Format every value of a flat record for text output."""
    return {key: format_number(value, full_precision) for key, value in record.items()}


def format_table(frame: pd.DataFrame, full_precision: bool = False) -> str:
    """Render a DataFrame as aligned text with numbers at the configured precision."""
    if frame.empty:
        return "(no rows)"
    formatted = frame.apply(lambda column: column.map(lambda v: format_number(v, full_precision)))
    return formatted.to_string(index=False)


# ===== PARSING HELPERS =====

def parse_sweep(text: str) -> List[float]:
    """
    Parse a 'start:stop:step' sweep, stop inclusive

    Args:
        text: Sweep range, e.g. '0:2:0.25'

    Returns:
        List of values
    """
    parts = text.split(':')
    if len(parts) != 3:
        raise ConfigValidationError(f"sweep must have the form start:stop:step, got '{text}'")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigValidationError(f"sweep values must be numbers, got '{text}'")
    if step <= 0 or stop < start:
        raise ConfigValidationError(f"sweep needs step > 0 and stop >= start, got '{text}'")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def parse_int_list(text: str) -> List[int]:
    """Parse a comma-separated list of integers such as '100,200,400'."""
    try:
        values = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ConfigValidationError(f"expected comma-separated integers, got '{text}'")
    if not values:
        raise ConfigValidationError("expected at least one integer")
    return values


def load_config_file(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    """
    Read a flat KEY=value config file

    Args:
        path: File path; None gives an empty mapping

    Returns:
        Dict of recognised keys with typed values
    """
    if path is None:
        return {}
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigValidationError(f"config file not found: {file_path}")

    settings = {}
    for key, raw in dotenv_values(file_path).items():
        name = key.strip().lower()
        if name not in CONFIG_FILE_KEYS:
            logger.warning(f"Ignoring unknown config key '{key}' in {file_path}")
            continue
        if raw is None or raw == '':
            continue
        try:
            settings[name] = CONFIG_FILE_KEYS[name](raw)
        except ValueError:
            raise ConfigValidationError(f"config key '{key}' in {file_path} has invalid value '{raw}'")
    logger.info(f"Loaded {len(settings)} settings from {file_path}")
    return settings


# ===== DATA EXPORT HELPERS =====

def export_frame_to_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    Write a DataFrame as CSV: header row, LF line endings, '.' decimal separator

    Args:
        frame: Table to write
        path: Target file

    Returns:
        Path written
    """
    target = Path(path)
    ensure_directory_exists(target.parent)
    try:
        frame.to_csv(target, index=False, lineterminator="\n")
    except OSError as e:
        raise OSError(f"could not write CSV to {target}: {e}") from e
    logger.info(f"Wrote {len(frame)} rows to {target}")
    return target


def export_to_json(data: Any) -> str:
    """Serialise a report to JSON, non-JSON values rendered with str()."""
    return json.dumps(data, indent=2, default=str)


# ===== FILE HELPERS =====

def ensure_directory_exists(directory: Union[str, Path]) -> Path:
    """
    Ensure directory exists, create if not

    Args:
        directory: Directory path

    Returns:
        Path object
    """
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"could not create directory {path}: {e}") from e
    return path
