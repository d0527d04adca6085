"""Symmetric N-bit quantization with round-to-nearest or floor rounding.

Codes live in ``[-qmax, qmax]`` with ``qmax = 2**(N-1) - 1``; the extra
negative two's-complement code is never used.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError, ShapeError
from .matrix import as_matrix

MIN_BITS = 2
MAX_BITS = 16


class Rounding(str, enum.Enum):
    NEAREST = "nearest"  # half away from zero
    FLOOR = "floor"  # toward -inf; residuals are nonnegative
    TRUNCATE = "truncate"  # toward zero, i.e. a C integer cast


def qmax(bits: int) -> int:
    _check_bits(bits)
    return (1 << (bits - 1)) - 1


def _check_bits(bits: int) -> None:
    if not MIN_BITS <= int(bits) <= MAX_BITS:
        raise ParameterError(f"bit width must be in [{MIN_BITS}, {MAX_BITS}], got {bits}")


@dataclass(frozen=True, eq=False)
class QuantizedMatrix:
    """Integer codes (int64 carrier) plus the scale that produced them."""

    values: np.ndarray
    bits: int
    scale: float
    rounding: Rounding

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ShapeError("quantized values must be 2-D")
        if not self.scale > 0:
            raise ParameterError("scale must be > 0")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def qmax(self) -> int:
        return qmax(self.bits)


def compute_scale(max_abs: float, bits: int) -> float:
    """Scale mapping ``max_abs`` onto the largest code."""
    if max_abs < 0 or not np.isfinite(max_abs):
        raise ParameterError(f"max_abs must be finite and >= 0, got {max_abs}")
    if max_abs == 0:
        raise DegenerateInputError("max_abs is zero; scale undefined")
    top = qmax(bits)
    scale = top / max_abs
    if not np.isfinite(scale):
        raise DegenerateInputError(f"max_abs {max_abs!r} is too small for a finite scale")
    # nudge so the top code dequantizes to at most max_abs: the extreme entry
    # then lands exactly on +-qmax and floor residuals stay nonnegative
    while top / scale > max_abs:
        scale = float(np.nextafter(scale, np.inf))
    return scale


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def _floor_codes(a: np.ndarray, x: np.ndarray, scale: float) -> np.ndarray:
    # Largest integer whose dequantized value does not exceed a. floor(x) can
    # be off by one when scale*a lands within an ulp of a lattice point.
    v = np.floor(x)
    up = (v + 1.0) / scale <= a
    v[up] += 1.0
    down = v / scale > a
    v[down] -= 1.0
    return v


def quantize_with_scale(a: np.ndarray, bits: int, scale: float, rounding) -> QuantizedMatrix:
    """Quantize ``a`` with an explicit scale (codes clamped to the symmetric range)."""
    rounding = Rounding(rounding)
    a = as_matrix(a, "A")
    top = qmax(bits)
    x = scale * a
    if rounding is Rounding.NEAREST:
        v = _round_half_away(x)
    elif rounding is Rounding.FLOOR:
        v = _floor_codes(a, x, scale)
    else:
        v = np.copysign(_floor_codes(np.abs(a), np.abs(x), scale), a)
    np.clip(v, -top, top, out=v)
    return QuantizedMatrix(v.astype(np.int64), int(bits), float(scale), rounding)


def quantize(a: np.ndarray, bits: int, rounding=Rounding.FLOOR) -> QuantizedMatrix:
    """Quantize with the max-abs derived scale.

    An all-zero input has no defined scale; it yields all-zero codes with
    ``scale = 1.0``. Inputs so small that the scale overflows use the largest
    finite scale instead.
    """
    a = as_matrix(a, "A")
    max_abs = float(np.max(np.abs(a)))
    try:
        scale = compute_scale(max_abs, bits)
    except DegenerateInputError:
        _check_bits(bits)
        if max_abs == 0:
            return QuantizedMatrix(np.zeros(a.shape, dtype=np.int64), int(bits), 1.0, Rounding(rounding))
        scale = float(np.finfo(np.float64).max)
    if Rounding(rounding) is Rounding.FLOOR and float(a.min()) == -max_abs:
        # floor of the negative extreme needs -qmax/scale <= -max_abs
        top = qmax(bits)
        while top / scale < max_abs:
            scale = float(np.nextafter(scale, 0.0))
    return quantize_with_scale(a, bits, scale, rounding)


def dequantize(q: QuantizedMatrix) -> np.ndarray:
    return q.values.astype(np.float64) / q.scale


def residual(a: np.ndarray, q: QuantizedMatrix) -> np.ndarray:
    """Information lost by quantization: ``a - dequantize(q)``."""
    a = as_matrix(a, "A")
    if a.shape != q.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {q.shape}")
    return a - dequantize(q)


def dequant_result(c_int: np.ndarray, scale_a: float, scale_b: float) -> np.ndarray:
    """Rescale an integer product back to real units."""
    if not (scale_a > 0 and scale_b > 0):
        raise ParameterError("scales must be > 0")
    return np.asarray(c_int, dtype=np.float64) / (scale_a * scale_b)
