"""
Structured logging configuration.

Console logs go to standard error; standard output is reserved for
machine-readable results. Files always receive JSON records.
"""

import json
import logging
import math
import sys
import time
import traceback
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np

from metric_forest.exceptions import EXIT_INTERNAL, MetricForestError

_RECORD_ATTRS = frozenset(vars(logging.makeLogRecord({}))) | {"message", "extra_fields", "context_fields"}


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class StructuredFormatter(logging.Formatter):
    """One JSON object per record; run context (command, seed) is flattened in"""

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "function": record.funcName,
            "line": record.lineno,
        }
        log_data.update(getattr(record, "context_fields", {}))

        if record.exc_info:
            log_data["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": traceback.format_exception(*record.exc_info),
            }

        extra = getattr(record, "extra_fields", None)
        if extra:
            log_data["extra"] = {
                k: (str(v) if isinstance(v, float) and not math.isfinite(v) else v) for k, v in extra.items()
            }

        for key, value in record.__dict__.items():
            if key not in _RECORD_ATTRS:
                log_data[key] = value

        return json.dumps(log_data, default=_json_default)


class ConsoleFormatter(logging.Formatter):
    """Human-readable lines; colour only when the stream is a terminal"""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, use_color: bool = False):
        super().__init__()
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        timestamp = datetime.fromtimestamp(record.created).strftime("%H:%M:%S")
        level = f"[{record.levelname}]"
        if self.use_color:
            level = f"{self.COLORS.get(record.levelname, '')}{level}{self.RESET}"

        command = getattr(record, "context_fields", {}).get("command")
        prefix = f"{command}: " if command else ""
        line = f"[{timestamp}] {level} {prefix}{record.name} - {record.getMessage()}"

        extra = getattr(record, "extra_fields", None)
        if extra:
            line += " " + " ".join(f"{k}={v}" for k, v in extra.items())
        if record.exc_info:
            line += f"\n{self.formatException(record.exc_info)}"
        return line


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    json_logs: bool = False,
) -> None:
    """
    Configure the root logger for one CLI run.

    Existing root handlers are replaced, so repeated calls (one per ``run``)
    do not stack handlers.

    Args:
        log_level: DEBUG, INFO, WARNING, ERROR or CRITICAL
        log_file: optional path receiving JSON records
        json_logs: JSON on the console as well
    """
    numeric_level = getattr(logging, log_level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        if isinstance(handler, logging.FileHandler):
            handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        console_handler.setFormatter(StructuredFormatter())
    else:
        console_handler.setFormatter(ConsoleFormatter(use_color=sys.stderr.isatty()))
    root_logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(StructuredFormatter())
        root_logger.addHandler(file_handler)

    root_logger.debug(f"Logging configured: level={log_level}, json_logs={json_logs}, file={log_file}")


class LogContext:
    """
    Tags every record created inside the block with fixed fields.

    Contexts nest: inner fields are merged over the outer ones.
    """

    def __init__(self, logger: logging.Logger, **fields):
        self.logger = logger
        self.fields = fields
        self._previous_factory = None

    def __enter__(self):
        previous = self._previous_factory = logging.getLogRecordFactory()
        fields = self.fields

        def record_factory(*args, **kwargs):
            record = previous(*args, **kwargs)
            record.context_fields = {**getattr(record, "context_fields", {}), **fields}
            return record

        logging.setLogRecordFactory(record_factory)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        logging.setLogRecordFactory(self._previous_factory)


def log_with_context(logger: logging.Logger, level: str, message: str, **context):
    """Log ``message`` with ``context`` as its extra fields"""
    logger.log(logging.getLevelName(level.upper()), message, extra={"extra_fields": context})


class PerformanceLogger:
    """
    Times an operation and logs the outcome with its size fields.

    Fields known only inside the block (such as the number of points read)
    are attached with ``note``. Data and usage errors are logged as warnings;
    anything else is an error.
    """

    def __init__(self, logger: logging.Logger, operation: str, **fields):
        self.logger = logger
        self.operation = operation
        self.fields: Dict[str, Any] = dict(fields)
        self.start_time: Optional[float] = None
        self.duration: Optional[float] = None

    def note(self, **fields) -> None:
        self.fields.update(fields)

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.logger.debug(f"Starting {self.operation}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start_time
        extra = {**self.fields, "operation": self.operation, "duration_seconds": self.duration}
        if exc_type is None:
            self.logger.info(
                f"{self.operation} completed in {self.duration:.3f}s",
                extra={"extra_fields": {**extra, "success": True}},
            )
            return

        extra.update(success=False, exception_type=exc_type.__name__)
        expected = isinstance(exc_val, MetricForestError) and exc_val.exit_code != EXIT_INTERNAL
        self.logger.log(
            logging.WARNING if expected else logging.ERROR,
            f"{self.operation} failed after {self.duration:.3f}s",
            extra={"extra_fields": extra},
        )
