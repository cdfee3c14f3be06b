"""Deterministic JSON (17 significant digits) and CSV (10) number formatting."""

from __future__ import annotations

import enum
import json
import math


def number(x: float, digits: int) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    if x == 0:
        x = 0.0  # drop the sign of -0.0
    text = format(x, f".{digits}g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def dumps(obj, digits: int = 17, indent: int = 2) -> str:
    """JSON text with floats printed to ``digits`` significant digits.

    Dict key order is preserved, so callers control ordering.
    """
    return _dump(obj, digits, indent, 0) + "\n"


def _dump(obj, digits, indent, level):
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return json.dumps(obj.value)
    if isinstance(obj, (int, float)):
        return number(obj, digits)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return _dump(obj.item(), digits, indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(v, digits, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str)) or v is None for v in obj):
            return "[" + ", ".join(_dump(v, digits, indent, level + 1) for v in obj) + "]"
        items = [inner + _dump(v, digits, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_number(x: float) -> str:
    if isinstance(x, int):
        return str(x)
    if x == 0:
        x = 0.0
    return format(x, ".10g")


def csv_complex(z: complex) -> str:
    if z.imag == 0:
        return csv_number(z.real)
    return f"{csv_number(z.real)}{'+' if z.imag >= 0 else '-'}{csv_number(abs(z.imag))}j"
