"""
raywave - Logging Utilities
"""

import logging
import sys
from pathlib import Path
from typing import Optional

from src.core.utils.config import get_settings


def get_logger_with_context(module: str, level: Optional[str] = None) -> logging.Logger:
    """Get a logger under the raywave namespace."""
    logger = logging.getLogger(f"raywave.{module}")

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            )
        )
        logger.addHandler(handler)
        logger.propagate = False

    logger.setLevel(level or get_settings().log_level)
    return logger


def attach_run_log(output_dir: Path) -> logging.Handler:
    """
    Route every raywave logger into ``output_dir/run.log`` as well.

    The sidecar log is the only place run timestamps are written.

    Returns:
        The installed handler, so the caller can detach it when the run ends.
    """
    handler = logging.FileHandler(output_dir / "run.log", mode="w", encoding="utf-8")
    handler.setFormatter(
        logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    )
    for name in list(logging.Logger.manager.loggerDict):
        if name.startswith("raywave."):
            logging.getLogger(name).addHandler(handler)
    return handler


def detach_run_log(handler: logging.Handler) -> None:
    """Remove a handler installed by :func:`attach_run_log`."""
    for name in list(logging.Logger.manager.loggerDict):
        if name.startswith("raywave."):
            logging.getLogger(name).removeHandler(handler)
    handler.close()
