"""Structural similarity scoring and loss-curve statistics."""

from __future__ import annotations

import math

import numpy as np

from .errors import CurveTooShortError, DegenerateCurveError, FieldTooSmallError, RangeError
from .fields import as_field, check_same_shape


def ssim_constants(dynamic_range: float = 1.0, k1: float = 0.01, k2: float = 0.03) -> tuple[float, float]:
    """Stabilizing constants c1 = (k1 L)^2 and c2 = (k2 L)^2."""
    if not (math.isfinite(dynamic_range) and dynamic_range > 0):
        raise RangeError(f"dynamic_range must be positive, got {dynamic_range}")
    if k1 <= 0 or k2 <= 0:
        raise RangeError(f"k1 and k2 must be positive, got {k1}, {k2}")
    return (k1 * dynamic_range) ** 2, (k2 * dynamic_range) ** 2


def _moments(x: np.ndarray, y: np.ndarray):
    mx = x.mean()
    my = y.mean()
    dx = x - mx
    dy = y - my
    # population moments (divide by N) keep ssim(x, x) == 1 exact
    return mx, my, (dx * dx).mean(), (dy * dy).mean(), (dx * dy).mean()


def _ssim_from_moments(mx, my, vx, vy, cov, c1, c2):
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))


def ssim_global(x, y, dynamic_range: float = 1.0, k1: float = 0.01, k2: float = 0.03) -> float:
    """Single-window structural similarity over all values at once.

    Means, population variances, and covariance are taken over the whole
    field (or any flat value collection of at least two entries), and
    combined as (2 mx my + c1)(2 cov + c2) / ((mx^2 + my^2 + c1)(vx + vy + c2)).
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise FieldTooSmallError(f"inputs must match in size, got {x.size} vs {y.size}")
    if x.size < 2:
        raise FieldTooSmallError(f"need at least 2 values, got {x.size}")
    c1, c2 = ssim_constants(dynamic_range, k1, k2)
    return float(_ssim_from_moments(*_moments(x, y), c1, c2))


def _window_sums(a: np.ndarray, k: int) -> np.ndarray:
    s = np.pad(a.cumsum(axis=0).cumsum(axis=1), ((1, 0), (1, 0)))
    return s[k:, k:] - s[:-k, k:] - s[k:, :-k] + s[:-k, :-k]


def ssim_windowed(x, y, dynamic_range: float = 1.0, k1: float = 0.01, k2: float = 0.03,
                  window: int = 11) -> float:
    """Mean of local SSIM over sliding uniform windows (the literature default).

    Secondary variant; the single-window ssim_global is the primary
    scoring form. Requires both fields to be at least window x window.
    """
    x = as_field(x)
    y = as_field(y)
    check_same_shape(x, y)
    if window < 2:
        raise RangeError(f"window must be at least 2, got {window}")
    if x.shape[0] < window or x.shape[1] < window:
        raise FieldTooSmallError(f"fields of shape {x.shape} are smaller than window {window}")
    c1, c2 = ssim_constants(dynamic_range, k1, k2)
    n = float(window * window)
    mx = _window_sums(x, window) / n
    my = _window_sums(y, window) / n
    vx = _window_sums(x * x, window) / n - mx * mx
    vy = _window_sums(y * y, window) / n - my * my
    cov = _window_sums(x * y, window) / n - mx * my
    return float(_ssim_from_moments(mx, my, vx, vy, cov, c1, c2).mean())


def _as_curve(curve) -> np.ndarray:
    values = np.asarray(curve, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise CurveTooShortError("curve is empty")
    if not np.all(np.isfinite(values)):
        raise DegenerateCurveError("curve contains non-finite values")
    return values


def normalize_curve(curve) -> np.ndarray:
    """Scale a loss curve so its maximum is exactly 1."""
    values = _as_curve(curve)
    peak = values.max()
    if peak <= 0.0:
        raise DegenerateCurveError(f"cannot normalize a curve with maximum {peak}")
    return values / peak


def max_loss_rate(curve) -> float:
    """Most negative per-epoch step of the max-normalized curve.

    Negative for any decreasing curve; for a monotone increasing curve the
    smallest positive step is returned, preserving the sign convention.
    """
    values = _as_curve(curve)
    if values.size < 2:
        raise CurveTooShortError(f"need at least 2 epochs, got {values.size}")
    return float(np.diff(normalize_curve(values)).min())
