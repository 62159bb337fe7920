"""
Process Settings
================
Environment-variable configuration, loaded from an optional .env file.
See .env.example for the recognised keys.
"""

import io
import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def get_config(key: str, default: str = None) -> str:
    """Get a setting from the environment, falling back to ``default``."""
    return os.getenv(key, default)


def output_root() -> Path:
    return Path(get_config("AQL_OUTPUT_DIR", "runs"))


def log_level() -> str:
    return get_config("AQL_LOG_LEVEL", "INFO").upper()


def workers() -> int:
    return max(1, int(get_config("AQL_WORKERS", "1")))


def oracle_resolution() -> int:
    return int(get_config("AQL_ORACLE_RESOLUTION", "201"))


def quadrature_nodes() -> int:
    return int(get_config("AQL_QUADRATURE_NODES", "512"))


def progress_enabled() -> bool:
    return get_config("AQL_PROGRESS", "0").strip().lower() in ("1", "true", "yes", "on")


def configure_logging() -> None:
    """Entry-point logging setup. Library modules only create loggers."""
    logging.basicConfig(
        level=getattr(logging, log_level(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def fix_console_encoding() -> None:
    """Fix Windows console encoding."""
    if sys.platform == 'win32':
        sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8', errors='replace')
        sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8', errors='replace')
