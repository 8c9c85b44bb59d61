"""Mean squared error and its gradient-weighted variant, with analytic gradients.

Reduction order everywhere is per-image spatial mean first, then batch
mean, with a fixed summation order for bit-reproducibility. Weight maps
are treated as constants when differentiating: they derive from the
ground-truth field only, so no gradient path through them exists.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError
from .fields import as_field, check_same_shape
from .weighting import GmseParams, build_weight_map


def as_batch(fields) -> np.ndarray:
    """Validate a sequence of same-shape fields (or an (n,h,w) array)."""
    arr = np.asarray(fields, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] < 1:
        raise ShapeMismatchError(
            f"expected a non-empty batch of same-shape 2D fields, got shape {arr.shape}"
        )
    as_field(arr[0])
    return arr


def mse(real: np.ndarray, fake: np.ndarray) -> float:
    """Plain mean squared error over the grid."""
    real = as_field(real)
    fake = as_field(fake)
    check_same_shape(real, fake)
    diff = real - fake
    return float(np.mean(diff * diff))


def gmse(real: np.ndarray, fake: np.ndarray, weights: np.ndarray) -> float:
    """Weighted mean squared error, mean(W * (R - F)^2)."""
    real = as_field(real)
    fake = as_field(fake)
    weights = as_field(weights)
    check_same_shape(real, fake, weights)
    diff = real - fake
    return float(np.mean(weights * (diff * diff)))


def mse_gradient(real: np.ndarray, fake: np.ndarray) -> np.ndarray:
    """d(mse)/d(fake), i.e. -2 (R - F) / (h w) per cell."""
    real = as_field(real)
    fake = as_field(fake)
    check_same_shape(real, fake)
    return -2.0 * (real - fake) / real.size


def gmse_gradient(real: np.ndarray, fake: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """d(gmse)/d(fake), i.e. -2 W (R - F) / (h w) per cell."""
    real = as_field(real)
    fake = as_field(fake)
    weights = as_field(weights)
    check_same_shape(real, fake, weights)
    return weights * (-2.0 * (real - fake) / real.size)


def mse_batch(reals, fakes) -> float:
    """Mean over the batch of per-image mse values."""
    reals = as_batch(reals)
    fakes = as_batch(fakes)
    if reals.shape != fakes.shape:
        raise ShapeMismatchError(f"batch shapes differ: {reals.shape} vs {fakes.shape}")
    per_image = [mse(r, f) for r, f in zip(reals, fakes)]
    return float(np.mean(per_image))


def gmse_batch(reals, fakes, params: GmseParams) -> float:
    """Mean over the batch of per-image gmse values.

    The weight map is rebuilt from each real image, so normalization
    bounds are taken within each image, never across the batch.
    """
    reals = as_batch(reals)
    fakes = as_batch(fakes)
    if reals.shape != fakes.shape:
        raise ShapeMismatchError(f"batch shapes differ: {reals.shape} vs {fakes.shape}")
    per_image = [gmse(r, f, build_weight_map(r, params)) for r, f in zip(reals, fakes)]
    return float(np.mean(per_image))
