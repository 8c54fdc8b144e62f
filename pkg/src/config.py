"""Configuration module: package logger, numerical defaults and config-file loading."""

import logging
import sys
from datetime import datetime
from typing import Dict, Optional

LOGGER_NAME = 'dunkl_square'


def setup_logger(log_file: bool = False, level: int = logging.INFO) -> logging.Logger:
    """Set up and configure the dunkl_square logger."""
    # Configure logging format
    log_format = '%(asctime)s - %(levelname)s - %(message)s'
    formatter = logging.Formatter(log_format)

    logger = logging.getLogger(LOGGER_NAME)

    # Remove any existing handlers
    logger.handlers.clear()
    logger.setLevel(level)

    if log_file:
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        file_handler = logging.FileHandler(f'{LOGGER_NAME}_{timestamp}.log')
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Prevent propagation to root logger
    logger.propagate = False

    return logger


# Set up the logger
logger = setup_logger()


# Kernel evaluation defaults
SERIES_TRUNCATION = 64
PI_NODES = 48
ZETA_PANELS = 24
ZETA_POINTS = 16
CONE_POINTS = 16
SUBORDINATION_NODES = 64
GRID_QUAD_NODES = 64
GRID_PROJECTION_LENGTH = 24
TAIL_WARN = 1e-9
PANEL_WARN = 1e-4

# Bessel ratio: ascending series below this argument (or below nu^2/2)
BESSEL_SERIES_LIMIT = 30.0

# Verification thresholds
ORTHO_TOL = 1e-8
XCHECK_TOL = 1e-6
IDENTITY_TOL = 1e-3
SEMIGROUP_TOL = 1e-5
SUBORDINATION_TOL = 1e-7
REDUCTION_SLACK = 1e-4
REFINEMENT_RATIO = 1.5
AUDIT_LEVELS = 4
NEGATIVE_CONTROL_DELTA = 1.5
NEGATIVE_CONTROL_GROWTH = 2.0

# Worker settings
MAX_RETRIES = 3
RETRY_DELAY = 0.1  # seconds

# Output settings
REPORT_FILE = 'report.json'
REPORT_SCHEMA_VERSION = 1
AUDIT_CACHE_FILE = 'audit_cache.json'
AUDIT_CACHE_SCHEMA_VERSION = 2
SAVE_INTERVAL_SECONDS = 30

SQUAREFN_CSV_HEADERS = [
    'alpha',
    'x',
    'kind',
    'semigroup',
    'variant',
    'value',
    'error_estimate',
    'config_hash',
]

AUDIT_CSV_HEADERS = [
    'family',
    'space',
    'audit',
    'level',
    'x',
    'x_prime',
    'y',
    'y_prime',
    'separation',
    'contribution',
    'contribution_cube',
    'config_hash',
]

# Keys accepted in key=value config files, with their parsers
CONFIG_KEYS = {
    'd': int,
    'alpha': str,
    'eps': str,
    'level': int,
    'beta': float,
    'out': str,
    'threads': int,
    'truncation': int,
    'nodes': int,
    'panels': int,
    'panel_points': int,
    'cone_points': int,
    'tol': float,
    'seed': int,
    'kernel': str,
}


def load_config_file(path: Optional[str]) -> Dict[str, object]:
    """Read a ``key=value`` config file; ``#`` starts a comment.

    Unknown keys and unparsable values raise ``UsageError``.
    """
    from src.models import UsageError

    if not path:
        return {}

    values: Dict[str, object] = {}
    try:
        with open(path, 'r') as f:
            lines = f.readlines()
    except OSError as e:
        raise UsageError(f"Cannot read config file {path}: {e}") from e

    for lineno, raw in enumerate(lines, 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.replace('-', '_')
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError as e:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from e

    logger.debug(f"Loaded {len(values)} settings from {path}")
    return values
