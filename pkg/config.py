"""
Configuration file for the Barrier Symmetry Pricer
Centralizes all app settings and environment variables
"""

import os
import logging
from pathlib import Path
from typing import List, Optional, Tuple
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

# ===== BASE PATHS =====
BASE_DIR = Path(__file__).parent
DATA_DIR = Path(os.getenv("DATA_DIR", str(BASE_DIR / "data")))
LOGS_DIR = Path(os.getenv("LOGS_DIR", str(BASE_DIR / "logs")))
OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(BASE_DIR / "output")))

# Create directories if they don't exist
for _directory in (DATA_DIR, LOGS_DIR, OUTPUT_DIR):
    try:
        _directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.warning(f"Could not create directory {_directory}: {e}")

# ===== APP SETTINGS =====
APP_NAME = os.getenv("APP_NAME", "Barrier Symmetry Pricer")
APP_VERSION = "1.0.0"
ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
DEBUG = os.getenv("DEBUG", "False").lower() == "true"

# Environment variable naming the default flat KEY=value config file for the CLI
CONFIG_ENV_VAR = "BARRIER_PRICER_CONFIG"
CONFIG_FILE = os.getenv(CONFIG_ENV_VAR)

# ===== MARKET DEFAULTS =====
DEFAULT_RATE = float(os.getenv("DEFAULT_RATE", "0.05"))
DEFAULT_VOL = float(os.getenv("DEFAULT_VOL", "0.2"))
DEFAULT_STRIKE = float(os.getenv("DEFAULT_STRIKE", "100"))
DEFAULT_MATURITY = float(os.getenv("DEFAULT_MATURITY", "1"))
DEFAULT_SPOT = float(os.getenv("DEFAULT_SPOT", "110"))
DEFAULT_TIME = float(os.getenv("DEFAULT_TIME", "0"))

# ===== NUMERICAL TOLERANCES =====
FD_STEP = float(os.getenv("FD_STEP", "1e-4"))
NULLSPACE_RTOL = float(os.getenv("NULLSPACE_RTOL", "1e-10"))
COLLOCATION_POINTS = int(os.getenv("COLLOCATION_POINTS", "50"))
COLLOCATION_RANGE: Tuple[float, float] = tuple(
    float(v) for v in os.getenv("COLLOCATION_RANGE", "0.1,5.0").split(",")
)
BARRIER_RTOL = float(os.getenv("BARRIER_RTOL", "1e-12"))
VERIFY_TOLERANCE = float(os.getenv("VERIFY_TOLERANCE", "1e-6"))
VERIFY_SEED = int(os.getenv("VERIFY_SEED", "12345"))

# ===== FINITE-DIFFERENCE ORACLE =====
FD_XI_MAX = float(os.getenv("FD_XI_MAX", "4.0"))
FD_N_SPACE = int(os.getenv("FD_N_SPACE", "800"))
FD_N_TIME = int(os.getenv("FD_N_TIME", "800"))
FD_AGREEMENT_RTOL = float(os.getenv("FD_AGREEMENT_RTOL", "1e-4"))
FD_STUDY_GRIDS = [int(n) for n in os.getenv("FD_STUDY_GRIDS", "100,200,400").split(",")]

# ===== MONTE CARLO ORACLE =====
MC_PATHS = int(os.getenv("MC_PATHS", "100000"))
MC_STEPS = int(os.getenv("MC_STEPS", "256"))
MC_SEED = int(os.getenv("MC_SEED", "20240101"))
MC_BATCH_SIZE = int(os.getenv("MC_BATCH_SIZE", "4096"))
MC_WORKERS = int(os.getenv("MC_WORKERS", "1"))
MC_AGREEMENT_SIGMAS = float(os.getenv("MC_AGREEMENT_SIGMAS", "3.0"))
MC_MAX_RELATIVE_ERROR = float(os.getenv("MC_MAX_RELATIVE_ERROR", "0.01"))
MC_MONITORING_STEPS = [int(n) for n in os.getenv("MC_MONITORING_STEPS", "16,64,256,1024").split(",")]

# ===== OUTPUT =====
SIGNIFICANT_DIGITS = int(os.getenv("SIGNIFICANT_DIGITS", "6"))
# barrier band for CLI input typed to SIGNIFICANT_DIGITS digits
CLI_BARRIER_RTOL = float(os.getenv("CLI_BARRIER_RTOL", "5e-6"))
FULL_PRECISION_DIGITS = 17
SURFACE_SPOTS = int(os.getenv("SURFACE_SPOTS", "41"))
SURFACE_TIMES = int(os.getenv("SURFACE_TIMES", "21"))

# ===== RUN LEDGER =====
DATABASE_PATH = os.getenv("DATABASE_PATH", str(DATA_DIR / "runs.db"))
DATABASE_URL = os.getenv("DATABASE_URL", f"sqlite:///{DATABASE_PATH}")
RECORD_RUNS = os.getenv("RECORD_RUNS", "False").lower() == "true"

# ===== LOGGING =====
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")
LOG_FILE = os.getenv("LOG_FILE", str(LOGS_DIR / "pricer.log"))


# ===== VALIDATION =====
def validate_config() -> List[str]:
    errors = []
    if DEFAULT_VOL <= 0:
        errors.append("DEFAULT_VOL must be > 0.")
    if DEFAULT_STRIKE <= 0 or DEFAULT_MATURITY <= 0:
        errors.append("DEFAULT_STRIKE and DEFAULT_MATURITY must be > 0.")
    if DEFAULT_RATE < 0:
        errors.append("DEFAULT_RATE must be >= 0.")
    if not 0 < VERIFY_TOLERANCE < 1 or not 0 < NULLSPACE_RTOL < 1:
        errors.append("VERIFY_TOLERANCE and NULLSPACE_RTOL must lie in (0, 1).")
    if len(COLLOCATION_RANGE) != 2 or not 0 < COLLOCATION_RANGE[0] < COLLOCATION_RANGE[1]:
        errors.append("COLLOCATION_RANGE must be two increasing positive numbers, e.g. '0.1,5.0'.")
    if MC_BATCH_SIZE < 1 or MC_WORKERS < 1:
        errors.append("MC_BATCH_SIZE and MC_WORKERS must be >= 1.")
    if LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append(f"LOG_LEVEL '{LOG_LEVEL}' is not a logging level name.")
    return errors


def get_config_file(explicit: Optional[str] = None) -> Optional[Path]:
    """Config file path: explicit flag first, then the environment variable."""
    candidate = explicit or os.getenv(CONFIG_ENV_VAR) or CONFIG_FILE
    return Path(candidate) if candidate else None


# ===== EXPORT CONFIG =====
class Config:
    """Configuration class for easy access to all settings."""

    # App
    APP_NAME = APP_NAME
    APP_VERSION = APP_VERSION
    ENVIRONMENT = ENVIRONMENT
    DEBUG = DEBUG
    CONFIG_ENV_VAR = CONFIG_ENV_VAR

    # Paths
    BASE_DIR = BASE_DIR
    DATA_DIR = DATA_DIR
    LOGS_DIR = LOGS_DIR
    OUTPUT_DIR = OUTPUT_DIR

    # Market
    DEFAULT_RATE = DEFAULT_RATE
    DEFAULT_VOL = DEFAULT_VOL
    DEFAULT_STRIKE = DEFAULT_STRIKE
    DEFAULT_MATURITY = DEFAULT_MATURITY
    DEFAULT_SPOT = DEFAULT_SPOT
    DEFAULT_TIME = DEFAULT_TIME

    # Tolerances
    FD_STEP = FD_STEP
    NULLSPACE_RTOL = NULLSPACE_RTOL
    COLLOCATION_POINTS = COLLOCATION_POINTS
    COLLOCATION_RANGE = COLLOCATION_RANGE
    BARRIER_RTOL = BARRIER_RTOL
    VERIFY_TOLERANCE = VERIFY_TOLERANCE
    VERIFY_SEED = VERIFY_SEED

    # Finite differences
    FD_XI_MAX = FD_XI_MAX
    FD_N_SPACE = FD_N_SPACE
    FD_N_TIME = FD_N_TIME
    FD_AGREEMENT_RTOL = FD_AGREEMENT_RTOL
    FD_STUDY_GRIDS = FD_STUDY_GRIDS

    # Monte Carlo
    MC_PATHS = MC_PATHS
    MC_STEPS = MC_STEPS
    MC_SEED = MC_SEED
    MC_BATCH_SIZE = MC_BATCH_SIZE
    MC_WORKERS = MC_WORKERS
    MC_AGREEMENT_SIGMAS = MC_AGREEMENT_SIGMAS
    MC_MAX_RELATIVE_ERROR = MC_MAX_RELATIVE_ERROR
    MC_MONITORING_STEPS = MC_MONITORING_STEPS

    # Output
    SIGNIFICANT_DIGITS = SIGNIFICANT_DIGITS
    CLI_BARRIER_RTOL = CLI_BARRIER_RTOL
    FULL_PRECISION_DIGITS = FULL_PRECISION_DIGITS
    SURFACE_SPOTS = SURFACE_SPOTS
    SURFACE_TIMES = SURFACE_TIMES

    # Run ledger
    DATABASE_PATH = DATABASE_PATH
    DATABASE_URL = DATABASE_URL
    RECORD_RUNS = RECORD_RUNS

    # Logging
    LOG_LEVEL = LOG_LEVEL
    LOG_FILE = LOG_FILE

    # Methods
    @staticmethod
    def validate():
        return validate_config()

    @staticmethod
    def get_config_file(explicit: Optional[str] = None):
        return get_config_file(explicit)


# Create singleton instance
config = Config()

# Validate on import
if ENVIRONMENT == "development":
    validation_errors = validate_config()
    if validation_errors:
        logger.warning("Configuration warnings:")
        for error in validation_errors:
            logger.warning(f"   - {error}")
