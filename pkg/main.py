"""
Barrier Symmetry Pricer - Main Entry Point
Closed-form pricing of the moving-barrier down-and-out call, with symmetry
verification and numerical oracles, from the command line
"""

import logging
import sys
from pathlib import Path

# Add project root to path for imports
sys.path.append(str(Path(__file__).parent))

# Local imports
from config import config
from src.cli import main as cli_main


def setup_logging() -> None:
    """Configure the root logger once: stream handler plus a file handler on LOG_FILE."""
    level = getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    handlers = [logging.StreamHandler(sys.stderr)]
    try:
        handlers.append(logging.FileHandler(config.LOG_FILE))
    except OSError as e:
        print(f"warning: could not open log file {config.LOG_FILE}: {e}", file=sys.stderr)

    root = logging.getLogger()
    root.setLevel(level)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)


if __name__ == "__main__":
    setup_logging()
    sys.exit(cli_main())
