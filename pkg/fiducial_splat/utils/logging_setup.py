"""
Logging setup for the command-line interface.

Library modules only create module loggers; handlers are installed here,
once, by the CLI.
"""

import logging
import sys
from typing import Optional

from colorama import Fore, Style
from colorama import init as colorama_init

_LEVEL_COLORS = {
    logging.DEBUG: Fore.CYAN,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class ColorFormatter(logging.Formatter):
    """Formatter that colors the level name."""

    def format(self, record: logging.LogRecord) -> str:
        color = _LEVEL_COLORS.get(record.levelno, "")
        original = record.levelname
        record.levelname = f"{color}{original}{Style.RESET_ALL}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


def configure_logging(level: str = "WARNING", use_color: Optional[bool] = None) -> None:
    """
    Install a single stderr handler on the package logger.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR)
        use_color: Force color on/off; None colors only when stderr is a TTY
    """
    if use_color is None:
        use_color = sys.stderr.isatty()
    if use_color:
        colorama_init()

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter(LOG_FORMAT) if use_color else logging.Formatter(LOG_FORMAT))

    package_logger = logging.getLogger("fiducial_splat")
    for existing in list(package_logger.handlers):
        package_logger.removeHandler(existing)
    package_logger.addHandler(handler)
    package_logger.setLevel(level.upper())
    package_logger.propagate = False
