"""
Logging Framework Module
========================
Centralized logging configuration for the SPDE laboratory.

Features:
- Console output with colored formatting
- Optional file logging (enabled through SPDE_ENGINE_LOG_DIR)
- Performance tracking decorator for solvers and report drivers
- Progress logging for ensemble runs

Log records never end up in report files, so reproducible outputs do not
depend on the logging configuration.
"""

import functools
import logging
import os
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Optional


# ================================================================================
# LOG LEVELS AND CONFIGURATION
# ================================================================================

class LogLevel:
    """Standard log levels with descriptions."""
    DEBUG = logging.DEBUG      # 10: per-step diagnostics
    INFO = logging.INFO        # 20: run / report milestones
    WARNING = logging.WARNING  # 30: excluded members, loose tolerances
    ERROR = logging.ERROR      # 40: blow-ups, validation failures
    CRITICAL = logging.CRITICAL


DEFAULT_CONFIG = {
    'console_level': LogLevel.INFO,
    'file_level': LogLevel.DEBUG,
    'log_dir_env': 'SPDE_ENGINE_LOG_DIR',
    'level_env': 'SPDE_ENGINE_LOG_LEVEL',
    'format': '%(asctime)s | %(levelname)-8s | %(name)-28s | %(message)s',
    'date_format': '%Y-%m-%d %H:%M:%S',
}


# ================================================================================
# CUSTOM FORMATTER WITH COLORS
# ================================================================================

class ColoredFormatter(logging.Formatter):
    """Formatter with ANSI color codes for console output."""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[35m',   # Magenta
        'RESET': '\033[0m'
    }

    def format(self, record):
        levelname = record.levelname
        if levelname in self.COLORS:
            record = logging.makeLogRecord(record.__dict__)
            record.levelname = f"{self.COLORS[levelname]}{levelname}{self.COLORS['RESET']}"
        return super().format(record)


# ================================================================================
# LOGGER SETUP
# ================================================================================

def _console_level_from_env(default: int) -> int:
    raw = os.environ.get(DEFAULT_CONFIG['level_env'])
    if not raw:
        return default
    level = logging.getLevelName(raw.upper())
    return level if isinstance(level, int) else default


def setup_logger(
    name: str,
    console_level: Optional[int] = None,
    file_level: int = DEFAULT_CONFIG['file_level'],
    log_dir: Optional[str] = None,
) -> logging.Logger:
    """
    Configure and return a logger with a console handler and an optional
    file handler.

    Args:
        name: Logger name (usually __name__ of the module)
        console_level: Minimum level for console output (env override allowed)
        file_level: Minimum level for file output
        log_dir: Directory for log files; falls back to SPDE_ENGINE_LOG_DIR,
            no file handler when neither is set

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    # Clear existing handlers to avoid duplicates
    logger.handlers.clear()

    level = console_level if console_level is not None else _console_level_from_env(
        DEFAULT_CONFIG['console_level']
    )
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(ColoredFormatter(
        fmt=DEFAULT_CONFIG['format'],
        datefmt=DEFAULT_CONFIG['date_format']
    ))
    logger.addHandler(console_handler)

    directory = log_dir or os.environ.get(DEFAULT_CONFIG['log_dir_env'])
    if directory:
        log_path = Path(directory)
        log_path.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d')
        log_file = log_path / f"{name.replace('.', '_')}_{timestamp}.log"

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(file_level)
        file_handler.setFormatter(logging.Formatter(
            fmt=DEFAULT_CONFIG['format'],
            datefmt=DEFAULT_CONFIG['date_format']
        ))
        logger.addHandler(file_handler)

    return logger


# ================================================================================
# PERFORMANCE TRACKING DECORATOR
# ================================================================================

def log_performance(logger: logging.Logger):
    """
    Decorator to log function execution time.

    Usage:
        @log_performance(logger)
        def solve(...):
            ...
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            logger.debug(f"Starting {func.__name__}")

            try:
                result = func(*args, **kwargs)
            except Exception as e:
                elapsed = time.perf_counter() - start_time
                logger.error(f"Failed {func.__name__} after {elapsed:.2f}s: {e}")
                raise
            elapsed = time.perf_counter() - start_time
            logger.debug(f"Completed {func.__name__} in {elapsed:.2f}s")
            return result

        return wrapper
    return decorator


# ================================================================================
# PROGRESS LOGGING
# ================================================================================

class ProgressLogger:
    """Helper for logging progress of ensemble runs."""

    def __init__(self, logger: logging.Logger, total_steps: int, operation: str):
        self.logger = logger
        self.total_steps = max(int(total_steps), 1)
        self.operation = operation
        self.current_step = 0
        self.start_time = time.perf_counter()
        self._last_reported_pct = -1

    def step(self, message: str = ""):
        """Log completion of one unit of work, throttled to 10% increments."""
        self.current_step += 1
        progress_pct = int(100 * self.current_step / self.total_steps)
        if progress_pct // 10 == self._last_reported_pct // 10 and self.current_step != self.total_steps:
            return
        self._last_reported_pct = progress_pct
        elapsed = time.perf_counter() - self.start_time
        suffix = f" - {message}" if message else ""
        self.logger.info(
            f"{self.operation} [{self.current_step}/{self.total_steps}] "
            f"({progress_pct}%){suffix} [elapsed: {elapsed:.1f}s]"
        )

    def complete(self):
        """Log completion of the entire operation."""
        elapsed = time.perf_counter() - self.start_time
        self.logger.info(
            f"{self.operation} COMPLETED in {elapsed:.1f}s "
            f"({self.total_steps} units)"
        )


# ================================================================================
# MODULE-SPECIFIC LOGGERS
# ================================================================================

def get_logger(module_name: str) -> logging.Logger:
    """
    Get or create a logger for a specific module.

    Usage:
        from spde_engine.utils.logger import get_logger
        logger = get_logger(__name__)
        logger.info("Ensemble started")
    """
    existing = logging.getLogger(module_name)
    if existing.handlers:
        return existing
    return setup_logger(module_name)
