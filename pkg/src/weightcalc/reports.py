"""Serialization helpers shared by the library and the CLI."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = ["format_float", "format_log_value", "csv_text", "atomic_write_text", "encode_float", "decode_float"]

_LN10 = math.log(10.0)


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def format_log_value(logv: float) -> str:
    """Decimal text for ``exp(logv)`` that survives beyond double range.

    >>> format_log_value(3000 * math.log(10))
    '1.00000000000000e+3000'
    """
    logv = float(logv)
    if math.isnan(logv):
        return "nan"
    if logv == -math.inf:
        return "0"
    if logv == math.inf:
        return "inf"
    if -700.0 < logv < 700.0:
        return format_float(math.exp(logv))
    e10 = logv / _LN10
    k = math.floor(e10)
    mant = 10.0 ** (e10 - k)
    if mant >= 9.999999999999995:
        mant, k = 1.0, k + 1
    return f"{mant:.14f}e{k:+d}"


def encode_float(x):
    """JSON-safe float: non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else format_float(x)


def decode_float(x):
    if x is None:
        return None
    return float(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def log_column(values) -> list[str]:
    return [format_log_value(v) for v in np.asarray(values, float)]
