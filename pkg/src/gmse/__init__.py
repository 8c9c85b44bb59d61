"""Gradient-weighted MSE loss family for 2D field data.

Weight maps built from local gradient magnitude, the MSE/GMSE losses with
analytic gradients, whole-field SSIM scoring, parameter schedules, a
deterministic synthetic wake-field generator, and desk-scale training
harnesses for comparing losses.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CurveTooShortError,
    DegenerateCurveError,
    FieldIOError,
    FieldTooSmallError,
    FormatError,
    GmseError,
    InvalidSigmaError,
    NegativeInputError,
    NonFiniteValueError,
    RangeError,
    ShapeMismatchError,
)
from .estimators import ConditionalFieldRegressor, GradientWeightTransform
from .fields import as_field, make_field, read_field, write_field
from .losses import gmse, gmse_batch, gmse_gradient, mse, mse_batch, mse_gradient
from .metrics import max_loss_rate, normalize_curve, ssim_constants, ssim_global, ssim_windowed
from .schedule import (
    Schedule,
    default_dgmse_schedule,
    default_gmse_params,
    load_schedule,
    parse_schedule,
)
from .synthetic import Dataset, FlowCondition, make_dataset, make_wake_field
from .training import (
    AdamState,
    ComparisonReport,
    GeneratorNet,
    TrainConfig,
    TrainLog,
    adam_step,
    compare,
    init_net,
    net_backward,
    net_forward,
    pixel_descent,
    train,
)
from .weighting import (
    GmseParams,
    apply_offset,
    build_weight_map,
    disparity_magnitude,
    disparity_x,
    disparity_y,
    dog_disparity,
    gamma_adjust,
    gaussian_blur,
    gaussian_kernel,
    normalize01,
)

__all__ = [
    "__version__",
    "GmseError", "ShapeMismatchError", "NonFiniteValueError", "FieldIOError",
    "FormatError", "InvalidSigmaError", "NegativeInputError", "RangeError",
    "DegenerateCurveError", "CurveTooShortError", "FieldTooSmallError", "ConfigError",
    "as_field", "make_field", "read_field", "write_field",
    "GmseParams", "disparity_x", "disparity_y", "disparity_magnitude", "dog_disparity",
    "gaussian_kernel", "gaussian_blur", "gamma_adjust", "normalize01", "apply_offset",
    "build_weight_map",
    "mse", "gmse", "mse_batch", "gmse_batch", "mse_gradient", "gmse_gradient",
    "ssim_constants", "ssim_global", "ssim_windowed", "normalize_curve", "max_loss_rate",
    "Schedule", "default_dgmse_schedule", "default_gmse_params", "parse_schedule",
    "load_schedule",
    "FlowCondition", "Dataset", "make_wake_field", "make_dataset",
    "GeneratorNet", "AdamState", "TrainConfig", "TrainLog", "ComparisonReport",
    "init_net", "net_forward", "net_backward", "adam_step", "pixel_descent", "train",
    "compare",
    "GradientWeightTransform", "ConditionalFieldRegressor",
]
