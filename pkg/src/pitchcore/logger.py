# pitchcore/logger.py
import logging
import sys
from typing import Optional

from .utils import get_absolute_path

LOGGER_NAME = "PitchCore"


def setup_logger(level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """Sets up a standardized logger for the application."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)

    if logger.hasHandlers():
        logger.handlers.clear()

    # stdout is reserved for CSV and report output
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - [%(levelname)s] - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    if log_file:
        file_handler = logging.FileHandler(get_absolute_path(log_file), mode='a', encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger
