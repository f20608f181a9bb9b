"""
Logging configuration.
Modules log through the standard library; records are rendered by structlog on stderr.
"""

import logging
import sys

import orjson
import structlog

from qmcd.config import settings


def _orjson_dumps(obj, **kwargs) -> str:
    return orjson.dumps(obj, default=str).decode("utf-8")


def configure_logging(level: str = None, fmt: str = None) -> None:
    """Install a single stderr handler rendering every record as a structured event."""
    level = (level or settings.log_level).upper()
    fmt = fmt or settings.log_format

    if fmt == "json":
        renderer = structlog.processors.JSONRenderer(serializer=_orjson_dumps)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=[
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
        ],
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
