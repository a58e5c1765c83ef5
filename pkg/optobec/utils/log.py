"""统一的控制台日志：每条记录渲染为 ``[Tag] 消息``。"""

from __future__ import annotations

import logging
import sys

_ROOT = "optobec"
_FORMAT = "[%(tag)s] %(message)s"


class _TagFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.tag = record.name.rsplit(".", 1)[-1]
        return True


def get_logger(tag: str) -> logging.Logger:
    """返回 ``optobec.<tag>`` 日志器，例如 ``get_logger("Sweep")``。"""
    return logging.getLogger(f"{_ROOT}.{tag}")


def configure_logging(verbose: bool = False) -> None:
    root = logging.getLogger(_ROOT)
    if not any(getattr(h, "_optobec", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(_TagFilter())
        handler._optobec = True  # type: ignore[attr-defined]
        root.addHandler(handler)
        root.propagate = False
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
