from __future__ import annotations

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Union

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def parse_level(level: Union[int, str]) -> int:
    if isinstance(level, int):
        return level
    name = level.upper()
    if name not in LEVELS:
        raise ValueError(f"Unknown log level {level!r} (expected one of {LEVELS})")
    return getattr(logging, name)


def setup_logger(
        name: str = "att_tomo",
        log_dir: Path | None = None,
        level: Union[int, str] = logging.INFO,
        to_file: bool = True,
) -> logging.Logger:
    # Console always; rotating file under log_dir (default ./logs) unless to_file is False
    logger = logging.getLogger(name)
    level = parse_level(level)
    logger.setLevel(level)

    # Already configured: only the level changes
    if getattr(logger, "_configured", False):
        for handler in logger.handlers:
            handler.setLevel(level)
        return logger

    fmt = logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATEFMT)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(fmt)
    logger.addHandler(console_handler)

    log_path = None
    if to_file:
        log_dir = log_dir or Path.cwd() / "logs"
        log_dir.mkdir(parents=True, exist_ok=True)
        log_path = log_dir / f"{name}.log"
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=5 * 1024 * 1024,
            backupCount=3,
            encoding="utf-8",
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(fmt)
        logger.addHandler(file_handler)

    logger.propagate = False
    logger._configured = True  # type: ignore[attr-defined]
    logger.debug("Logger '%s' ready (level %s, file %s)", name, logging.getLevelName(level), log_path)
    return logger
