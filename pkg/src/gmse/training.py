"""Desk-scale optimization harnesses for comparing loss functions.

Two harnesses are provided: direct pixel descent on a single field, which
isolates the loss dynamics from any model, and a small conditional
generator (a fully connected net mapping normalized flow conditions to a
field) trained by manual backpropagation and Adam. Training is
single-threaded and all randomness comes from the seeded counter streams,
so a (dataset, config) pair reproduces its TrainLog bit for bit.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigError, RangeError
from .fields import as_field
from .losses import gmse, gmse_gradient, mse, mse_gradient
from .metrics import max_loss_rate, normalize_curve, ssim_global
from .schedule import Schedule, default_dgmse_schedule, default_gmse_params
from .synthetic import ANGLE_RANGE, SPEED_RANGE, Dataset, FlowCondition
from .weighting import GmseParams, build_weight_map, normalize01

LOSS_KINDS = ("mse", "gmse", "dgmse")

_FIRST_INIT_SCALE = 1.0
_INNER_INIT_SCALE = 0.005
_OUTPUT_INIT_SCALE = 0.05
_OUTPUT_INIT_BIAS = 0.10


# ---------------------------------------------------------------------------
# generator network


@dataclass(eq=False)
class GeneratorNet:
    """Fully connected net: 2 normalized condition features -> h*w field.

    Hidden layers use a leaky rectifier; the output is clamped to [0, 1]
    with pass-through gradient strictly inside (0, 1) and zero gradient at
    the rails.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    field_shape: tuple[int, int]
    leak: float = 0.2

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


def init_net(field_shape: tuple[int, int], hidden_sizes=(64, 256), seed: int = 0,
             leak: float = 0.2) -> GeneratorNet:
    """Seeded He-style init; the output layer starts small around mid-gray
    so no pixel begins pinned to a clamp rail."""
    h, w = field_shape
    sizes = [2, *hidden_sizes, h * w]
    weights = []
    biases = []
    for layer, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        if layer == 0:
            scale = _FIRST_INIT_SCALE * np.sqrt(2.0 / fan_in)
        elif layer == len(sizes) - 2:
            scale = _OUTPUT_INIT_SCALE / np.sqrt(fan_in)
        else:
            scale = _INNER_INIT_SCALE
        values = rng.normals(rng.derive(seed, 1000 + layer), fan_in * fan_out)
        weights.append(scale * values.reshape(fan_in, fan_out))
        bias_value = _OUTPUT_INIT_BIAS if layer == len(sizes) - 2 else 0.0
        biases.append(np.full(fan_out, bias_value))
    return GeneratorNet(weights=weights, biases=biases, field_shape=(h, w), leak=leak)


def condition_features(conditions) -> np.ndarray:
    """Normalize (speed, angle) rows onto [0, 1]^2 for net input."""
    rows = []
    for c in conditions:
        c = c if isinstance(c, FlowCondition) else FlowCondition(*c)
        rows.append((c.speed / SPEED_RANGE[1], c.angle / ANGLE_RANGE[1]))
    return np.array(rows, dtype=np.float64)


def _forward(net: GeneratorNet, x: np.ndarray):
    """Batch forward pass; returns clamped output (n, h*w) and the cache
    of pre-activations needed by _backward."""
    pre = []
    a = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        pre.append(z)
        if i < last:
            a = np.where(z > 0, z, net.leak * z)
        else:
            a = np.clip(z, 0.0, 1.0)
    return a, (x, pre)


def _backward(net: GeneratorNet, cache, grad_out: np.ndarray) -> list[np.ndarray]:
    """Exact reverse-mode gradients for every weight and bias, flattened in
    parameters() order."""
    x, pre = cache
    last = len(net.weights) - 1
    z_out = pre[last]
    dz = grad_out * ((z_out > 0.0) & (z_out < 1.0))
    grads: list[np.ndarray] = [None] * (2 * len(net.weights))
    for i in range(last, -1, -1):
        a_prev = x if i == 0 else np.where(pre[i - 1] > 0, pre[i - 1], net.leak * pre[i - 1])
        grads[2 * i] = a_prev.T @ dz
        grads[2 * i + 1] = dz.sum(axis=0)
        if i > 0:
            da = dz @ net.weights[i].T
            dz = da * np.where(pre[i - 1] > 0, 1.0, net.leak)
    return grads


def net_forward(net: GeneratorNet, condition) -> np.ndarray:
    """Generate one field (h, w) for a flow condition."""
    out, _ = _forward(net, condition_features([condition]))
    return out[0].reshape(net.field_shape)


def net_backward(net: GeneratorNet, condition, loss_grad_wrt_output: np.ndarray) -> list[np.ndarray]:
    """Parameter gradients for one condition given d(loss)/d(output field)."""
    grad = as_field(loss_grad_wrt_output)
    if grad.shape != net.field_shape:
        raise RangeError(f"gradient shape {grad.shape} != field shape {net.field_shape}")
    _, cache = _forward(net, condition_features([condition]))
    return _backward(net, cache, grad.reshape(1, -1))


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
              t: int = 1) -> None:
    """Standard bias-corrected Adam update; mutates params and state in place."""
    if t < 1:
        raise ConfigError(f"Adam step index must be >= 1, got {t}")
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


# ---------------------------------------------------------------------------
# configuration and logs


@dataclass(frozen=True)
class TrainConfig:
    """Everything train() needs besides the dataset.

    `loss` selects plain MSE, fixed-parameter GMSE (via `params`, default
    sigma 10 / gamma 1.0 / offset 0.2), or schedule-driven DGMSE (via
    `schedule`, default the built-in dynamic schedule).
    """

    loss: str = "mse"
    params: GmseParams | None = None
    schedule: Schedule | None = None
    epochs: int = 100
    batch_size: int = 20
    learning_rate: float = 2e-5
    seed: int = 0
    ssim_checkpoints: tuple[int, ...] = (1, 5, 10, 20, 50, 100)
    hidden_sizes: tuple[int, ...] = (64, 256)
    leak: float = 0.2
    val_fraction: float = 0.2
    threads: int = 1
    label: str = ""

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if not self.hidden_sizes or any(s < 1 for s in self.hidden_sizes):
            raise ConfigError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(f"val_fraction must lie in (0, 1), got {self.val_fraction}")
        if any((not isinstance(e, int)) or e < 1 for e in self.ssim_checkpoints):
            raise ConfigError(f"ssim checkpoints must be integers >= 1, got {self.ssim_checkpoints}")
        if self.loss == "gmse" and self.params is None:
            object.__setattr__(self, "params", default_gmse_params())
        if self.loss == "dgmse" and self.schedule is None:
            object.__setattr__(self, "schedule", default_dgmse_schedule())
        if not self.label:
            object.__setattr__(self, "label", self.loss)

    def params_for_epoch(self, epoch: int) -> GmseParams | None:
        """Weight-map parameters for a 0-indexed epoch; None means plain MSE."""
        if self.loss == "mse":
            return None
        if self.loss == "gmse":
            return self.params
        return self.schedule.resolve(epoch)

    def to_dict(self) -> dict:
        return {
            "loss": self.loss,
            "params": list(vars(self.params).values()) if self.params else None,
            "schedule": [[s, p.sigma, p.gamma, p.offset] for s, p in self.schedule.stages]
            if self.schedule
            else None,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "ssim_checkpoints": list(self.ssim_checkpoints),
            "hidden_sizes": list(self.hidden_sizes),
            "leak": self.leak,
            "val_fraction": self.val_fraction,
            "label": self.label,
        }


@dataclass(eq=False)
class TrainLog:
    """Per-epoch mean training loss, checkpoint validation SSIM, timing,
    the config echo, and the trained net."""

    losses: np.ndarray
    ssim: dict[int, float]
    epoch_seconds: list[float]
    config: TrainConfig
    net: GeneratorNet


@dataclass(eq=False)
class PixelDescentResult:
    losses: np.ndarray
    ssims: np.ndarray
    final: np.ndarray


@dataclass(eq=False)
class ComparisonReport:
    labels: list[str]
    table_epochs: list[int]
    ssim_table: list[list[float]]
    rates: list[float]
    curves: list[np.ndarray]
    logs: list[TrainLog]


# ---------------------------------------------------------------------------
# harnesses


def pixel_descent(reference: np.ndarray, loss_kind, steps: int, step_size: float,
                  seed: int = 0, init: np.ndarray | None = None) -> PixelDescentResult:
    """Plain gradient descent of a candidate field toward `reference`.

    `loss_kind` is "mse" or a GmseParams instance (the weight map is built
    once from the reference). The candidate starts from seeded uniform
    noise in [0, 1] unless `init` is given, and is clamped to [0, 1] after
    every step. Loss and whole-field SSIM (dynamic range 1) are logged
    after each step.
    """
    reference = as_field(reference)
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    if not step_size > 0:
        raise ConfigError(f"step_size must be positive, got {step_size}")
    weights = None
    if isinstance(loss_kind, GmseParams):
        weights = build_weight_map(reference, loss_kind)
    elif loss_kind != "mse":
        raise ConfigError(f"loss_kind must be 'mse' or GmseParams, got {loss_kind!r}")
    if init is None:
        candidate = rng.uniforms(seed, reference.size).reshape(reference.shape)
    else:
        candidate = as_field(init, copy=True)
        if candidate.shape != reference.shape:
            raise RangeError(f"init shape {candidate.shape} != reference {reference.shape}")
    losses = np.empty(steps)
    ssims = np.empty(steps)
    for step in range(steps):
        if weights is None:
            grad = mse_gradient(reference, candidate)
        else:
            grad = gmse_gradient(reference, candidate, weights)
        candidate = np.clip(candidate - step_size * grad, 0.0, 1.0)
        losses[step] = mse(reference, candidate) if weights is None else gmse(
            reference, candidate, weights)
        ssims[step] = ssim_global(candidate, reference)
    return PixelDescentResult(losses=losses, ssims=ssims, final=candidate)


def _weight_maps(fields: np.ndarray, params: GmseParams, threads: int) -> np.ndarray:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            maps = list(pool.map(lambda f: build_weight_map(f, params), fields))
    else:
        maps = [build_weight_map(f, params) for f in fields]
    return np.stack(maps)


def _validation_ssim(net: GeneratorNet, x_val: np.ndarray, r_val: np.ndarray) -> float:
    out, _ = _forward(net, x_val)
    scores = [
        ssim_global(normalize01(f.reshape(net.field_shape)), normalize01(r))
        for f, r in zip(out, r_val)
    ]
    return float(np.mean(scores))


def train(dataset: Dataset, config: TrainConfig) -> TrainLog:
    """Train the conditional generator on the dataset under one loss config.

    The dataset is split once (validation is the tail), the net is
    initialized from config.seed, and each epoch runs seeded-permutation
    minibatches through forward / loss gradient / backward / Adam. The
    per-epoch mean training loss is recorded for every epoch; validation
    SSIM (on min-max normalized fields) is recorded at the 1-indexed
    checkpoint epochs.
    """
    train_items, val_items = dataset.split(config.val_fraction)
    h, w = dataset.field_shape
    n_cells = h * w
    x_train = condition_features([c for c, _ in train_items])
    r_train = np.stack([f for _, f in train_items]).reshape(len(train_items), n_cells)
    x_val = condition_features([c for c, _ in val_items])
    r_val = np.stack([f for _, f in val_items])

    net = init_net((h, w), hidden_sizes=config.hidden_sizes,
                   seed=rng.derive(config.seed, 1), leak=config.leak)
    params_list = net.parameters()
    state = AdamState.for_params(params_list)
    t = 0

    weight_cache: dict[GmseParams, np.ndarray] = {}
    losses = np.empty(config.epochs)
    ssim_log: dict[int, float] = {}
    epoch_seconds: list[float] = []

    for epoch in range(config.epochs):
        started = time.perf_counter()
        stage = config.params_for_epoch(epoch)
        if stage is not None and stage not in weight_cache:
            weight_cache[stage] = _weight_maps(
                r_train.reshape(-1, h, w), stage, config.threads
            ).reshape(-1, n_cells)
        weights = None if stage is None else weight_cache[stage]

        perm = rng.permutation(rng.derive(config.seed, 10_000 + epoch), len(train_items))
        per_image: list[np.ndarray] = []
        for lo in range(0, len(train_items), config.batch_size):
            idx = perm[lo : lo + config.batch_size]
            x_b = x_train[idx]
            r_b = r_train[idx]
            out, cache = _forward(net, x_b)
            diff = r_b - out
            sq = diff * diff
            base = (-2.0 * diff) / (n_cells * len(idx))
            if weights is None:
                per_image.append(sq.mean(axis=1))
                grad_out = base
            else:
                w_b = weights[idx]
                per_image.append((w_b * sq).mean(axis=1))
                grad_out = w_b * base
            grads = _backward(net, cache, grad_out)
            t += 1
            adam_step(params_list, grads, state, config.learning_rate, t=t)
        losses[epoch] = float(np.mean(np.concatenate(per_image)))
        if (epoch + 1) in config.ssim_checkpoints:
            ssim_log[epoch + 1] = _validation_ssim(net, x_val, r_val)
        epoch_seconds.append(time.perf_counter() - started)

    return TrainLog(losses=losses, ssim=ssim_log, epoch_seconds=epoch_seconds,
                    config=config, net=net)


def compare(dataset: Dataset, configs) -> ComparisonReport:
    """Train every config on the same dataset and tabulate the comparison.

    Configs must share seed and epochs so the curves align. The report
    holds max-normalized loss curves, an SSIM table at the checkpoint
    epochs {1, 5, 20, 100} that fit the run length, and the normalized
    max loss rate per run.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("compare needs at least one config")
    if len({c.seed for c in configs}) > 1 or len({c.epochs for c in configs}) > 1:
        raise ConfigError("compare configs must share seed and epochs")
    logs = [train(dataset, c) for c in configs]
    table_epochs = [
        e for e in (1, 5, 20, 100)
        if e <= configs[0].epochs and all(e in log.ssim for log in logs)
    ]
    ssim_table = [[log.ssim[e] for e in table_epochs] for log in logs]
    rates = [max_loss_rate(log.losses) for log in logs]
    curves = [normalize_curve(log.losses) for log in logs]
    labels = [c.label for c in configs]
    return ComparisonReport(labels=labels, table_epochs=table_epochs,
                            ssim_table=ssim_table, rates=rates, curves=curves, logs=logs)
