"""Exact/float number handling.

Exact mode stores :class:`fractions.Fraction` values in numpy ``object``
arrays so the same vectorised code runs in both modes.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be 'exact' or 'float', got {mode!r}")
    return mode


def to_number(x, mode: str):
    if mode == EXACT:
        if isinstance(x, float):
            # floats are accepted only when they are dyadic-exact inputs
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x.strip())
        return Fraction(x)
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def asarray(values, mode: str) -> np.ndarray:
    """Convert nested sequences to an array of the mode's number type."""
    if mode == EXACT:
        arr = np.asarray(values, dtype=object)
        flat = [to_number(v, EXACT) for v in arr.ravel()]
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = flat if flat else []
        return out
    if isinstance(values, np.ndarray) and values.dtype != object:
        return values.astype(float)
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=float)
    out.ravel()[:] = [to_number(v, FLOAT) for v in arr.ravel()] if arr.size else []
    return out


def zeros(shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape, dtype=float)


def one(mode: str):
    return Fraction(1) if mode == EXACT else 1.0


def zero(mode: str):
    return Fraction(0) if mode == EXACT else 0.0


def mode_of(arr: np.ndarray) -> str:
    return EXACT if arr.dtype == object else FLOAT


def encode(x, mode: str):
    """JSON encoding: rationals as strings in exact mode, doubles otherwise."""
    if mode == EXACT:
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def encode_array(arr, mode: str):
    arr = np.asarray(arr, dtype=object if mode == EXACT else float)
    if arr.ndim == 0:
        return encode(arr.item(), mode)
    return [encode_array(a, mode) for a in arr]


def isclose(a, b, mode: str, tol: float = 1e-9) -> bool:
    if mode == EXACT:
        return a == b
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(a)), abs(float(b)))
