"""Epoch-indexed weight-map parameter schedules (the dynamic-GMSE mechanism).

Stages are half-open intervals [start_epoch, next_start_epoch); the final
stage is open-ended, so every epoch >= 0 resolves to exactly one stage.
Epochs are 0-indexed: stage (0, params) governs the first training epoch.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .errors import ConfigError, RangeError
from .weighting import GmseParams


@dataclass(frozen=True)
class Schedule:
    stages: tuple[tuple[int, GmseParams], ...]

    def __post_init__(self):
        if not self.stages:
            raise ConfigError("schedule needs at least one stage")
        starts = [s for s, _ in self.stages]
        if starts[0] != 0:
            raise ConfigError(f"first stage must start at epoch 0, got {starts[0]}")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError(f"stage start epochs must be strictly increasing, got {starts}")
        if any(not isinstance(s, int) or s < 0 for s in starts):
            raise ConfigError(f"stage start epochs must be non-negative integers, got {starts}")
        for _, params in self.stages:
            if not isinstance(params, GmseParams):
                raise ConfigError(f"stage parameters must be GmseParams, got {type(params)}")

    def resolve(self, epoch: int) -> GmseParams:
        """Parameters of the stage whose start epoch is the greatest <= epoch."""
        if epoch < 0:
            raise RangeError(f"epoch must be >= 0, got {epoch}")
        starts = [s for s, _ in self.stages]
        return self.stages[bisect_right(starts, epoch) - 1][1]


def default_gmse_params() -> GmseParams:
    """Fixed-parameter baseline: sigma 10, gamma 1.00, offset 0.2."""
    return GmseParams(sigma=10.0, gamma=1.0, offset=0.2)


def default_dgmse_schedule() -> Schedule:
    """Built-in dynamic schedule: strong blur and a low floor first, then
    a weaker blur with the baseline floor for the rest of training."""
    return Schedule(
        stages=(
            (0, GmseParams(30.0, 0.20, 0.1)),
            (1, GmseParams(20.0, 0.40, 0.1)),
            (5, GmseParams(20.0, 0.40, 0.2)),
            (20, GmseParams(25.0, 0.40, 0.2)),
        )
    )


def parse_schedule(text: str) -> Schedule:
    """Parse a plain-text schedule: one `start_epoch sigma gamma offset`
    line per stage, `#` starts a comment."""
    stages: list[tuple[int, GmseParams]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ConfigError(f"line {lineno}: expected 'start_epoch sigma gamma offset', got {raw!r}")
        try:
            start = int(parts[0])
            params = GmseParams(float(parts[1]), float(parts[2]), float(parts[3]))
        except (ValueError, RangeError, ConfigError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
        except Exception as exc:  # GmseParams validation errors
            raise ConfigError(f"line {lineno}: {exc}") from exc
        stages.append((start, params))
    return Schedule(stages=tuple(stages))


def load_schedule(path) -> Schedule:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read schedule file {path}: {exc}") from exc
    return parse_schedule(text)
