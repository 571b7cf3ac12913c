"""
Channel Logging
Writes to storage/logs/<channel>-<date>.log and stderr, with a JSON context
suffix on every record.
"""

import json
import logging
import traceback
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Optional

from config.logging import logging_config


class ChannelLogger:
    """Named logging channel with structured context"""

    def __init__(self, name: str = "app"):
        self.name = name
        self.log_dir = Path(logging_config["directory"])
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        """Setup logger with file and console handlers"""
        logger = logging.getLogger(f"osc.{self.name}")
        logger.setLevel(
            getattr(logging, str(logging_config["level"]).upper(), logging.INFO)
        )
        logger.propagate = False

        # Remove existing handlers to avoid duplicates
        logger.handlers.clear()

        formatter = logging.Formatter(
            logging_config["format"], datefmt=logging_config["date_format"]
        )

        if logging_config["to_file"]:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            today = datetime.now().strftime("%Y-%m-%d")
            file_handler = RotatingFileHandler(
                self.log_dir / f"{self.name}-{today}.log",
                maxBytes=logging_config["max_size"],
                backupCount=logging_config["backup_count"],
                encoding="utf-8",
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        # stderr only: stdout carries the CLI summary
        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.WARNING)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        return logger

    def _log(self, level: str, message: str, context: Optional[dict] = None) -> None:
        try:
            log_message = message
            if context:
                log_message += f" | Context: {json.dumps(context, default=str)}"
            getattr(self.logger, level)(log_message)
        except Exception as e:
            print(f"Logging error: {e} | Original message: {message}")

    def info(self, message: str, context: Optional[dict] = None) -> None:
        self._log("info", message, context)

    def error(self, message: str, context: Optional[dict] = None) -> None:
        self._log("error", message, context)

    def warning(self, message: str, context: Optional[dict] = None) -> None:
        self._log("warning", message, context)

    def debug(self, message: str, context: Optional[dict] = None) -> None:
        self._log("debug", message, context)

    def exception(
        self, message: str, exc: BaseException, context: Optional[dict] = None
    ) -> None:
        """Log exception with full traceback"""
        try:
            error_context: dict[str, Any] = {
                "exception_type": type(exc).__name__,
                "exception_message": str(exc),
                "traceback": "".join(
                    traceback.format_exception(type(exc), exc, exc.__traceback__)
                ),
            }
            if context:
                error_context.update(context)
            self.logger.error(f"{message} | {json.dumps(error_context, default=str)}")
        except Exception as e:
            print(f"Exception logging failed: {e} | Original: {message}")


_loggers: dict[str, ChannelLogger] = {}


def get_logger(name: str = "app") -> ChannelLogger:
    """Get or create a logger instance"""
    if name not in _loggers:
        _loggers[name] = ChannelLogger(name)
    return _loggers[name]


def log_files() -> list[Path]:
    """Channel log files currently on disk, newest last."""
    log_dir = Path(logging_config["directory"])
    if not log_dir.exists():
        return []
    return sorted(log_dir.glob("*.log"), key=lambda p: p.stat().st_mtime)
