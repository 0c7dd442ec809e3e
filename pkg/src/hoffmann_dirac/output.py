"""Deterministic JSON and CSV writers.

Floats are always printed with 17 significant digits so identical inputs give
byte-identical files.  Non-finite floats are written as the strings
``"inf"``, ``"-inf"`` and ``"nan"`` in JSON (bare in CSV).
"""
import json
import math
from pathlib import Path

import numpy as np


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = format_float(obj)
        return s if math.isfinite(float(obj)) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def write_csv(header, rows, path):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, (float, np.floating))
                              else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
