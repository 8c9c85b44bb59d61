"""Gradient-saliency weight maps built from a reference field.

The pipeline turns a ground-truth field into a per-cell weight in
[offset, 1]: directional first differences are combined into a non-linear
disparity magnitude, normalized, spread with a separable Gaussian blur,
contrast-shaped with a power law, re-normalized, and floored with an
affine offset. Weights are a pure function of the reference field and the
parameters; no optimization gradient ever flows through this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSigmaError, NegativeInputError, RangeError
from .fields import as_field

_PAD_MODES = {"reflect": "symmetric", "wrap": "wrap"}


@dataclass(frozen=True)
class GmseParams:
    """Weight-map parameters: blur strength (pixels), shaping exponent, floor."""

    sigma: float
    gamma: float
    offset: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidSigmaError(f"sigma must be positive, got {self.sigma}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise RangeError(f"gamma must be positive, got {self.gamma}")
        if not (math.isfinite(self.offset) and 0.0 <= self.offset <= 1.0):
            raise RangeError(f"offset must lie in [0, 1], got {self.offset}")


def disparity_x(field: np.ndarray, periodic: bool = False) -> np.ndarray:
    """Horizontal first difference, value(j,k) - value(j,k-1).

    Output keeps the input shape: column 0 is zero, or wraps to the last
    column when `periodic`.
    """
    field = as_field(field)
    out = np.zeros_like(field)
    out[:, 1:] = field[:, 1:] - field[:, :-1]
    if periodic:
        out[:, 0] = field[:, 0] - field[:, -1]
    return out


def disparity_y(field: np.ndarray, periodic: bool = False) -> np.ndarray:
    """Vertical first difference, value(j,k) - value(j-1,k); row 0 as in disparity_x."""
    field = as_field(field)
    out = np.zeros_like(field)
    out[1:, :] = field[1:, :] - field[:-1, :]
    if periodic:
        out[0, :] = field[0, :] - field[-1, :]
    return out


def disparity_magnitude(field: np.ndarray, periodic: bool = False) -> np.ndarray:
    """Per-cell magnitude sqrt(dx^2 + dy^2) of the directional differences.

    Unlike a signed sum of differences, the magnitude cannot cancel where
    dx and dy carry opposite signs, so weak crossing structures survive.
    """
    dx = disparity_x(field, periodic=periodic)
    dy = disparity_y(field, periodic=periodic)
    return np.hypot(dx, dy)


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1D Gaussian taps, length half_up(sigma)*6 + 1, normalized to sum 1.

    The length rule rounds sigma half-up, so fractional sigmas keep the
    6*sigma + 1 support of the integer sigmas they are closest to. Sigmas
    below 0.5 degenerate to the identity kernel [1.0].
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidSigmaError(f"sigma must be positive, got {sigma}")
    radius = 3 * _half_up(sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _convolve_axis(values: np.ndarray, taps: np.ndarray, axis: int, pad_mode: str) -> np.ndarray:
    radius = taps.size // 2
    if radius == 0:
        return values * taps[0]
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(values, pad, mode=pad_mode)
    n = values.shape[axis]
    out = np.zeros_like(values)
    index = [slice(None), slice(None)]
    for i, tap in enumerate(taps):
        index[axis] = slice(i, i + n)
        out += tap * padded[tuple(index)]
    return out


def gaussian_blur(field: np.ndarray, sigma: float, padding: str = "reflect") -> np.ndarray:
    """Separable Gaussian blur (horizontal then vertical), same shape.

    `padding` is "reflect" (border sample duplicated, the default) or
    "wrap" (periodic; used by translation-covariance tests). The kernel is
    normalized, so constant fields are preserved.
    """
    field = as_field(field)
    if padding not in _PAD_MODES:
        raise RangeError(f"padding must be one of {sorted(_PAD_MODES)}, got {padding!r}")
    taps = gaussian_kernel(sigma)
    mode = _PAD_MODES[padding]
    out = _convolve_axis(field, taps, axis=1, pad_mode=mode)
    return _convolve_axis(out, taps, axis=0, pad_mode=mode)


def dog_disparity(field: np.ndarray, sigma_small: float, sigma_large: float) -> np.ndarray:
    """Rectified difference-of-Gaussians response, |blur(small) - blur(large)|.

    Comparison-only alternative to disparity_magnitude: a linear band-pass
    followed by rectification, which loses signal where opposing-sign
    structure cancels before the absolute value is taken.
    """
    if not (math.isfinite(sigma_small) and math.isfinite(sigma_large)):
        raise InvalidSigmaError("sigmas must be finite")
    if not 0 < sigma_small < sigma_large:
        raise InvalidSigmaError(
            f"need 0 < sigma_small < sigma_large, got {sigma_small} and {sigma_large}"
        )
    return np.abs(gaussian_blur(field, sigma_small) - gaussian_blur(field, sigma_large))


def gamma_adjust(field: np.ndarray, gamma: float) -> np.ndarray:
    """Element-wise power v**gamma; input must be non-negative."""
    field = as_field(field)
    if not (math.isfinite(gamma) and gamma > 0):
        raise RangeError(f"gamma must be positive, got {gamma}")
    if field.min() < 0:
        raise NegativeInputError("gamma_adjust requires non-negative values")
    return np.power(field, gamma)


def normalize01(field: np.ndarray) -> np.ndarray:
    """Min-max normalization onto [0, 1]; a constant field maps to all zeros."""
    field = as_field(field)
    lo = field.min()
    hi = field.max()
    if hi == lo:
        return np.zeros_like(field)
    return (field - lo) / (hi - lo)


def apply_offset(field: np.ndarray, c_o: float) -> np.ndarray:
    """Affine floor w = v*(1 - c_o) + c_o, mapping [0, 1] onto [c_o, 1]."""
    field = as_field(field)
    if not (math.isfinite(c_o) and 0.0 <= c_o <= 1.0):
        raise RangeError(f"offset must lie in [0, 1], got {c_o}")
    if field.min() < -1e-12 or field.max() > 1.0 + 1e-12:
        raise RangeError(
            f"apply_offset input must lie in [0, 1], got [{field.min()}, {field.max()}]"
        )
    clipped = np.clip(field, 0.0, 1.0)
    return clipped * (1.0 - c_o) + c_o


def build_weight_map(reference: np.ndarray, params: GmseParams, padding: str = "reflect") -> np.ndarray:
    """Weight map in [params.offset, 1] for one reference field.

    Pipeline: disparity magnitude -> min-max normalize -> Gaussian blur
    (sigma) -> power shaping (gamma) -> min-max normalize -> offset floor.
    The pre-blur normalization is applied for every gamma; for gamma = 1
    the final normalization makes it a no-op, which is asserted by test
    rather than assumed. A gradient-free (constant) reference yields the
    uniform map params.offset.
    """
    disparity = disparity_magnitude(reference, periodic=(padding == "wrap"))
    blurred = gaussian_blur(normalize01(disparity), params.sigma, padding=padding)
    shaped = gamma_adjust(blurred, params.gamma)
    return apply_offset(normalize01(shaped), params.offset)
