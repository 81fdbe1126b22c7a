import logging
import sys
from typing import Union

from config import LOG_LEVEL

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def setup_logger(name: str = "PseudoJuntaLab", level: Union[int, str] = LOG_LEVEL):
    logger = logging.getLogger(name)
    logger.setLevel(str(level).upper() if isinstance(level, str) else level)

    if not logger.handlers:
        # stderr: stdout is reserved for JSON/CSV reports
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


def set_level(level: str) -> None:
    """Override the env-configured level for this process (CLI --log-level)."""
    logger.setLevel(level.upper())
    logger.debug(f"Log level set to {level.upper()}")


logger = setup_logger()
