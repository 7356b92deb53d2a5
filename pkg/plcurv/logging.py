"""Logging setup: JSON records tagged with the run_id, or plain text for terminals"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Optional

from .context import RunContext, get_run_id

# Attributes every LogRecord has; anything else came in through ``extra``.
_RESERVED = set(logging.LogRecord('', 0, '', 0, '', None, None).__dict__) | {'message', 'asctime'}


class StructuredFormatter(logging.Formatter):
    """
    JSON formatter for structured logging.

    Emits one object per record with timestamp, severity, run_id, the
    metadata of the active RunContext (command, input file), the structured
    fields passed via ``log_with_context`` and the source location.
    """

    def format(self, record: logging.LogRecord) -> str:
        run = RunContext.get_current()
        log_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'severity': record.levelname,
            'message': record.getMessage(),
            'logger': record.name,
            'run_id': getattr(record, 'run_id', None) or run.run_id,
        }
        if run.metadata:
            log_data['context'] = dict(run.metadata)

        for key, value in record.__dict__.items():
            if key not in _RESERVED and key != 'run_id':
                log_data[key] = value

        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)

        log_data['source'] = {
            'file': record.pathname,
            'line': record.lineno,
            'function': record.funcName
        }

        return json.dumps(log_data, default=str)


def setup_logging(
    name: str = 'plcurv',
    level: str = 'WARNING',
    structured: bool = False
) -> logging.Logger:
    """
    Configure the package logger.

    Records go to stderr so that data written to stdout by the CLI stays
    byte-identical between runs.

    Args:
        name: Logger name, normally the package root
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        structured: JSON output instead of the plain development format

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))
    logger.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)
    if structured:
        handler.setFormatter(StructuredFormatter())
    else:
        handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        ))

    logger.addHandler(handler)
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    return logging.getLogger(name or 'plcurv')


def log_with_context(
    logger: logging.Logger,
    level: str,
    message: str,
    **kwargs
):
    """
    Log a message with the current run_id and structured fields.

    Example:
        ```python
        log_with_context(logger, 'debug', 'newton step', iteration=3, step=0.5)
        ```
    """
    log_method = getattr(logger, level.lower())
    if not logger.isEnabledFor(getattr(logging, level.upper())):
        return
    extra = {'run_id': get_run_id()}
    extra.update(kwargs)
    log_method(message, extra=extra)
