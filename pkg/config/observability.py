"""
Logging configuration for training runs and sweeps
"""
import logging
from typing import Optional

from config.settings import get_settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once; the level defaults to GDD_LOG_LEVEL."""
    level_name = (level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.INFO), format=LOG_FORMAT)
    logging.getLogger(__name__).debug(f"Logging configured at {level_name}")
