"""
Logging Utilities for magrobin

Console logging with optional color and file output, plus a stage logger
that times compute stages and renders numeric context as key=value fields.
"""

import logging
import sys
import time
from pathlib import Path
from typing import Any, Optional

from magrobin.config.settings import get_settings


class ColorFormatter(logging.Formatter):
    """Formatter with color support for console output."""

    COLORS = {
        "DEBUG": "\033[36m",  # Cyan
        "INFO": "\033[32m",  # Green
        "WARNING": "\033[33m",  # Yellow
        "ERROR": "\033[31m",  # Red
        "CRITICAL": "\033[35m",  # Magenta
        "RESET": "\033[0m",
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, self.COLORS["RESET"])
        reset = self.COLORS["RESET"]
        record = logging.makeLogRecord(record.__dict__)
        record.levelname = f"{color}{record.levelname}{reset}"
        return super().format(record)


def setup_logging(
    level: Optional[str] = None,
    log_file: Optional[Path] = None,
    enable_color: bool = True,
) -> None:
    """
    Configure toolkit-wide logging.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR). Defaults to settings.
        log_file: Optional path for a full DEBUG log. Defaults to settings.
        enable_color: Enable colored console output on a TTY.
    """
    settings = get_settings()
    log_level = (level or settings.log_level).upper()
    log_file = log_file or settings.log_file

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG if log_file else getattr(logging, log_level))
    root_logger.handlers.clear()

    fmt = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
    datefmt = "%Y-%m-%d %H:%M:%S"

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, log_level))
    if enable_color and sys.stderr.isatty():
        console_handler.setFormatter(ColorFormatter(fmt, datefmt))
    else:
        console_handler.setFormatter(logging.Formatter(fmt, datefmt))
    root_logger.addHandler(console_handler)

    if log_file:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(fmt, datefmt))
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance for a module.

    Args:
        name: Logger name, typically __name__ from the calling module.

    Returns:
        Configured logger instance.
    """
    return logging.getLogger(name)


def format_fields(**fields: Any) -> str:
    """Render numeric context as ``k=v`` pairs with 6 significant digits."""
    parts = []
    for key, value in fields.items():
        if isinstance(value, float):
            parts.append(f"{key}={value:.6g}")
        else:
            parts.append(f"{key}={value}")
    return " ".join(parts)


class StageLogger:
    """Times a compute stage and logs its progress with numeric context."""

    def __init__(self, stage: str):
        self.logger = get_logger(f"stage.{stage}")
        self.stage = stage
        self.start_time = time.perf_counter()

    @property
    def elapsed(self) -> float:
        """Seconds since the stage started."""
        return time.perf_counter() - self.start_time

    def start(self, message: str = "Starting stage", **fields: Any):
        """Log stage start and reset the clock."""
        self.start_time = time.perf_counter()
        self.logger.info(self._compose(f"> {message}", fields))

    def progress(
        self,
        message: str,
        done: Optional[int] = None,
        total: Optional[int] = None,
        **fields: Any,
    ):
        """Log stage progress, optionally as a done/total counter."""
        if done is not None and total:
            message = f"[{done}/{total}] {message}"
        self.logger.info(self._compose(f"~ {message}", fields))

    def detail(self, message: str, **fields: Any):
        """Log solver-level detail at DEBUG."""
        self.logger.debug(self._compose(message, fields))

    def success(self, message: str = "Stage completed", **fields: Any):
        """Log stage success with elapsed time."""
        self.logger.info(
            self._compose(f"+ {message} (took {self.elapsed:.2f}s)", fields)
        )

    def error(self, message: str, exception: Optional[Exception] = None):
        """Log stage error."""
        if exception:
            self.logger.error(f"! {message}: {exception}", exc_info=True)
        else:
            self.logger.error(f"! {message}")

    def warning(self, message: str, **fields: Any):
        """Log stage warning."""
        self.logger.warning(self._compose(f"? {message}", fields))

    @staticmethod
    def _compose(message: str, fields: dict[str, Any]) -> str:
        if not fields:
            return message
        return f"{message} | {format_fields(**fields)}"
