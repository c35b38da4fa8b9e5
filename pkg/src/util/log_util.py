"""Logging setup."""

import logging
import os
import sys
import traceback
from typing import Optional

from config.constants import APP_NAME, LOG_FORMAT

_ROOT = APP_NAME.lower()


def get_logger(name: str) -> logging.Logger:
    """Return a logger in the application namespace."""
    return logging.getLogger(f"{_ROOT}.{name}")


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Attach console (and optionally file) handlers to the application logger.

    Parameters:
        level (str): Logging level name
        log_file (str, optional): Extra file to receive the same records
    """

    logger = logging.getLogger(_ROOT)
    logger.setLevel(level.upper())
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    logger.addHandler(console)

    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    logger.propagate = False


def write_error_log(directory: str, error: BaseException) -> Optional[str]:
    """
    Write the traceback of a failed command next to its outputs.

    Parameters:
        directory (str): Output directory of the failed command
        error (BaseException): The exception being reported

    Returns:
        str: Path of the written log, or None if it could not be written
    """

    try:
        os.makedirs(directory, exist_ok=True)
        log_path = os.path.join(directory, "error.log")
        with open(log_path, "a", encoding="utf-8") as f:
            f.write(f"\n=== {APP_NAME} command failure ===\n")
            traceback.print_exception(type(error), error, error.__traceback__, file=f)
            f.write("\nMessage: " + str(error) + "\n")
        return log_path
    except OSError:
        return None
