"""Scikit-learn style front ends so the pieces compose with pipelines.

`GradientWeightTransform` wraps the weight-map pipeline as a stateless
transformer; `ConditionalFieldRegressor` wraps the training harness as a
fit/predict estimator over (speed, angle) conditions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ShapeMismatchError
from .metrics import ssim_global
from .schedule import Schedule
from .synthetic import Dataset, FlowCondition
from .training import TrainConfig, _forward, condition_features, train
from .weighting import GmseParams, build_weight_map, normalize01


def _as_field_stack(X) -> tuple[np.ndarray, bool]:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        return arr[None, :, :], True
    if arr.ndim == 3 and arr.shape[0] >= 1:
        return arr, False
    raise ShapeMismatchError(f"expected one (h, w) field or an (n, h, w) stack, got {arr.shape}")


class GradientWeightTransform(BaseEstimator, TransformerMixin):
    """Turns reference fields into gradient-saliency weight maps in [offset, 1]."""

    def __init__(self, sigma=10.0, gamma=1.0, offset=0.2):
        self.sigma = sigma
        self.gamma = gamma
        self.offset = offset

    def _params(self) -> GmseParams:
        return GmseParams(float(self.sigma), float(self.gamma), float(self.offset))

    def fit(self, X, y=None):
        self._params()
        _as_field_stack(X)
        return self

    def transform(self, X):
        params = self._params()
        stack, single = _as_field_stack(X)
        maps = np.stack([build_weight_map(f, params) for f in stack])
        return maps[0] if single else maps


class ConditionalFieldRegressor(BaseEstimator, RegressorMixin):
    """Conditional field generator trained with MSE, GMSE, or DGMSE.

    X is an (n, 2) array of (speed [0.1, 5.0] m/s, angle [0, 60] deg)
    rows; y is an (n, h, w) stack of target fields in [0, 1]. `score`
    returns the mean whole-field SSIM of min-max normalized predictions,
    matching how training checkpoints are scored.
    """

    def __init__(self, loss="gmse", sigma=10.0, gamma=1.0, offset=0.2, schedule=None,
                 epochs=100, batch_size=20, learning_rate=2e-5, hidden_sizes=(64, 256),
                 seed=0, ssim_checkpoints=(1, 5, 10, 20, 50, 100), val_fraction=0.2,
                 threads=1):
        self.loss = loss
        self.sigma = sigma
        self.gamma = gamma
        self.offset = offset
        self.schedule = schedule
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.hidden_sizes = hidden_sizes
        self.seed = seed
        self.ssim_checkpoints = ssim_checkpoints
        self.val_fraction = val_fraction
        self.threads = threads

    def _config(self) -> TrainConfig:
        params = None
        if self.loss == "gmse":
            params = GmseParams(float(self.sigma), float(self.gamma), float(self.offset))
        schedule = self.schedule if isinstance(self.schedule, Schedule) else None
        return TrainConfig(
            loss=self.loss, params=params, schedule=schedule, epochs=int(self.epochs),
            batch_size=int(self.batch_size), learning_rate=float(self.learning_rate),
            seed=int(self.seed), ssim_checkpoints=tuple(self.ssim_checkpoints),
            hidden_sizes=tuple(int(s) for s in self.hidden_sizes),
            val_fraction=float(self.val_fraction), threads=int(self.threads),
        )

    @staticmethod
    def _conditions(X) -> list[FlowCondition]:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ShapeMismatchError(f"X must be (n, 2) condition rows, got {arr.shape}")
        return [FlowCondition(float(s), float(a)) for s, a in arr]

    def fit(self, X, y):
        conditions = self._conditions(X)
        fields, _ = _as_field_stack(y)
        if len(conditions) != fields.shape[0]:
            raise ShapeMismatchError(
                f"X has {len(conditions)} rows but y has {fields.shape[0]} fields")
        dataset = Dataset(items=tuple(zip(conditions, fields)), seed=int(self.seed))
        self.train_log_ = train(dataset, self._config())
        self.net_ = self.train_log_.net
        self.field_shape_ = self.net_.field_shape
        return self

    def _check_fitted(self):
        if not hasattr(self, "net_"):
            raise NotFittedError("call fit before predict/score")

    def predict(self, X):
        self._check_fitted()
        conditions = self._conditions(X)
        out, _ = _forward(self.net_, condition_features(conditions))
        return out.reshape(len(conditions), *self.field_shape_)

    def score(self, X, y, sample_weight=None):
        self._check_fitted()
        predictions = self.predict(X)
        targets, _ = _as_field_stack(y)
        scores = [
            ssim_global(normalize01(p), normalize01(t))
            for p, t in zip(predictions, targets)
        ]
        return float(np.average(scores, weights=sample_weight))
