"""Deterministic synthetic wake fields parameterized by flow speed and angle.

Each field is a uniform freestream whose level is proportional to speed,
an elliptical zero-velocity body at the center, and a widening wake plume
behind the body, rotated by the flow angle, that carries band-limited
pseudo-turbulent fluctuations whose amplitude scales with speed. The
result is gradient-sparse: most cells are featureless freestream, with
strong local gradients confined to the body rim and the plume.

Fields are bitwise reproducible from (shape, condition, seed); per-item
seeds in a dataset are derived by index, so parallel and serial
generation agree.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .errors import FieldIOError, FormatError, RangeError
from .fields import atomic_write_bytes, read_field, write_field
from .weighting import gaussian_blur

SPEED_RANGE = (0.1, 5.0)
ANGLE_RANGE = (0.0, 60.0)

_LEVEL_SCALE = 0.20        # freestream level at full speed
_BODY_AXES = (0.10, 0.045)  # ellipse semi-axes, fraction of width/height
_PLUME_START = 0.06
_PLUME_END = 0.75
_NOISE_SIGMA = 1.2
_NOISE_AMPLITUDE = 0.20    # per-item fluctuations, relative to the freestream level
_TEXTURE_AMPLITUDE = 0.50  # condition-modulated texture, relative to level
_TEXTURE_SIGMA = 1.5
_TEXTURE_SEEDS = (0x47AD_11C3, 0x2B8E_5D71)  # fixed carriers shared by all items


@functools.lru_cache(maxsize=8)
def _texture_carriers(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-RMS band-limited textures, fixed per shape."""
    carriers = []
    for carrier_seed in _TEXTURE_SEEDS:
        white = rng.uniforms(carrier_seed, height * width).reshape(height, width) * 2.0 - 1.0
        smooth = gaussian_blur(white, _TEXTURE_SIGMA)
        smooth = smooth / np.sqrt(np.mean(smooth * smooth))
        carriers.append(np.clip(smooth, -2.0, 2.0))
    return carriers[0], carriers[1]


@dataclass(frozen=True)
class FlowCondition:
    """Inflow speed (m/s) and impact angle (degrees)."""

    speed: float
    angle: float

    def __post_init__(self):
        if not (SPEED_RANGE[0] <= self.speed <= SPEED_RANGE[1]):
            raise RangeError(f"speed must lie in {SPEED_RANGE}, got {self.speed}")
        if not (ANGLE_RANGE[0] <= self.angle <= ANGLE_RANGE[1]):
            raise RangeError(f"angle must lie in {ANGLE_RANGE}, got {self.angle}")


@dataclass(frozen=True, eq=False)
class Dataset:
    items: tuple[tuple[FlowCondition, np.ndarray], ...]
    seed: int

    def __post_init__(self):
        if not self.items:
            raise RangeError("dataset must hold at least one item")
        shapes = {field.shape for _, field in self.items}
        if len(shapes) > 1:
            raise RangeError(f"dataset fields must share one shape, got {sorted(shapes)}")

    @property
    def field_shape(self) -> tuple[int, int]:
        return self.items[0][1].shape

    def split(self, val_fraction: float = 0.2):
        """Deterministic train/validation partition: validation is the tail."""
        if not 0.0 < val_fraction < 1.0:
            raise RangeError(f"val_fraction must lie in (0, 1), got {val_fraction}")
        n_val = max(1, int(round(len(self.items) * val_fraction)))
        if n_val >= len(self.items):
            raise RangeError(f"cannot split {len(self.items)} items with val_fraction {val_fraction}")
        return self.items[:-n_val], self.items[-n_val:]


def make_wake_field(height: int, width: int, condition: FlowCondition, seed: int) -> np.ndarray:
    """One synthetic wake field in [0, 1]; body cells are exactly zero."""
    if height < 16 or width < 16:
        raise RangeError(f"field must be at least 16x16, got {height}x{width}")
    if not isinstance(condition, FlowCondition):
        condition = FlowCondition(*condition)

    s = condition.speed / SPEED_RANGE[1]
    level = _LEVEL_SCALE * s
    theta = math.radians(condition.angle)

    u = (np.arange(width, dtype=np.float64) + 0.5) / width
    v = (np.arange(height, dtype=np.float64) + 0.5) / height
    uu, vv = np.meshgrid(u - 0.5, v - 0.5)

    body = (uu / _BODY_AXES[0]) ** 2 + (vv / _BODY_AXES[1]) ** 2 <= 1.0

    # wake frame: t along the plume axis, q across it
    t = uu * math.cos(theta) + vv * math.sin(theta)
    q = -uu * math.sin(theta) + vv * math.cos(theta)
    along = np.clip((t - _PLUME_START) / (_PLUME_END - _PLUME_START), 0.0, 1.0)
    in_plume = (t > _PLUME_START) & (t <= _PLUME_END)
    half_width = 0.05 + 0.18 * along

    # smooth meander keeps the plume centerline condition-dependent but gentle;
    # the stripe has a hard lateral edge so everything outside it is exactly
    # undisturbed freestream (the regions of interest stay small and sharp)
    meander = 0.04 * along * np.sin(2.0 * np.pi * t / 0.55 + 1.3 * theta + 0.9 * s)
    q_local = q - meander
    in_stripe = in_plume & (np.abs(q_local) <= half_width)
    shape = 1.0 - 0.35 * (q_local / np.maximum(half_width, 1e-9)) ** 2
    deficit = np.where(in_stripe, 0.7 * np.exp(-1.8 * along) * shape, 0.0)

    # pseudo-turbulent texture: fixed band-limited carriers modulated by
    # smooth nonlinear gains in (speed, angle), so the texture is spatially
    # stationary across items while its strength tracks the condition
    aa = theta / math.radians(ANGLE_RANGE[1])
    gain_a = 0.35 + 0.65 * math.sin(2.0 * math.pi * (1.2 * s + 0.8 * aa) + 0.7)
    gain_b = 0.35 + 0.65 * math.sin(2.0 * math.pi * (0.7 * s - 1.2 * aa) + 2.3)
    carrier_a, carrier_b = _texture_carriers(height, width)
    texture = np.where(
        in_stripe,
        (_TEXTURE_AMPLITUDE * level) * (0.6 * gain_a * carrier_a + 0.4 * gain_b * carrier_b),
        0.0,
    )

    noise = rng.uniforms(seed, height * width).reshape(height, width) * 2.0 - 1.0
    noise = gaussian_blur(noise, _NOISE_SIGMA)

    field = level * (1.0 - deficit) + texture + np.where(
        in_stripe, (_NOISE_AMPLITUDE * level) * noise, 0.0)
    field = np.clip(field, 0.0, 1.0)
    field[body] = 0.0
    return field


def make_dataset(n: int, height: int, width: int, seed: int, threads: int = 1) -> Dataset:
    """`n` items with conditions sampled uniformly over the speed/angle ranges."""
    if n < 1:
        raise RangeError(f"dataset size must be at least 1, got {n}")
    draws = rng.uniforms(rng.derive(seed, 0), 2 * n)
    speeds = SPEED_RANGE[0] + (SPEED_RANGE[1] - SPEED_RANGE[0]) * draws[:n]
    angles = ANGLE_RANGE[0] + (ANGLE_RANGE[1] - ANGLE_RANGE[0]) * draws[n:]
    conditions = [FlowCondition(float(sp), float(an)) for sp, an in zip(speeds, angles)]
    seeds = [item_seed(seed, i) for i in range(n)]

    def build(i: int) -> np.ndarray:
        return make_wake_field(height, width, conditions[i], seeds[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fields = list(pool.map(build, range(n)))
    else:
        fields = [build(i) for i in range(n)]
    return Dataset(items=tuple(zip(conditions, fields)), seed=seed)


def item_seed(dataset_seed: int, index: int) -> int:
    """Per-item field seed, derived so item order never matters."""
    return rng.derive(dataset_seed, index + 1)


def write_dataset_dir(dataset: Dataset, out_dir) -> list[str]:
    """Write fields as f32bin plus a manifest.csv of
    (index, speed, angle, filename, item_seed); returns written filenames."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FieldIOError(f"cannot create {out_dir}: {exc}") from exc
    names = []
    rows = io.StringIO()
    writer = csv.writer(rows, lineterminator="\n")
    writer.writerow(["index", "speed", "angle", "filename", "item_seed"])
    for i, (condition, field) in enumerate(dataset.items):
        name = f"field_{i:05d}.f32bin"
        write_field(field, out_dir / name)
        writer.writerow([i, repr(condition.speed), repr(condition.angle), name,
                         item_seed(dataset.seed, i)])
        names.append(name)
    atomic_write_bytes(out_dir / "manifest.csv", rows.getvalue().encode("ascii"))
    return names + ["manifest.csv"]


def load_dataset_dir(data_dir) -> Dataset:
    """Load a dataset directory written by write_dataset_dir."""
    data_dir = Path(data_dir)
    manifest = data_dir / "manifest.csv"
    try:
        text = manifest.read_text(encoding="utf-8")
    except OSError as exc:
        raise FieldIOError(f"cannot read {manifest}: {exc}") from exc
    items = []
    reader = csv.DictReader(io.StringIO(text))
    required = {"index", "speed", "angle", "filename", "item_seed"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise FormatError(f"{manifest}: expected columns {sorted(required)}")
    for lineno, row in enumerate(reader, start=2):
        try:
            condition = FlowCondition(float(row["speed"]), float(row["angle"]))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{manifest}: line {lineno}: {exc}") from exc
        items.append((condition, read_field(data_dir / row["filename"])))
    if not items:
        raise FormatError(f"{manifest}: no dataset rows")
    return Dataset(items=tuple(items), seed=0)
