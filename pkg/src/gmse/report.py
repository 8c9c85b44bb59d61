"""Serialization of training artifacts: CSV logs, SVG curve charts, run manifests.

Every writer goes through the atomic temp-file path, and nothing
nondeterministic (timestamps, wall-clock) enters the CSV or SVG files, so
identical runs produce identical bytes. Wall-clock lives only in the JSON
manifest, under the one key excluded from reproducibility comparisons.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .fields import atomic_write_bytes
from .training import ComparisonReport, TrainLog

_SVG_SIZE = (720, 480)
_SVG_MARGIN = (60, 20, 30, 40)  # left, right, top, bottom
_PALETTE = ("#c62828", "#1a1a1a", "#1565c0", "#2e7d32", "#9c27b0", "#ef6c00")


def _fmt(v: float) -> str:
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def write_train_log_csv(log: TrainLog, path) -> None:
    """Per-epoch CSV: epoch (1-indexed), loss, ssim (blank off-checkpoint)."""
    lines = ["epoch,loss,ssim"]
    for i, loss in enumerate(log.losses, start=1):
        ssim = _fmt(log.ssim[i]) if i in log.ssim else ""
        lines.append(f"{i},{_fmt(loss)},{ssim}")
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_checkpoint_csv(log: TrainLog, path) -> None:
    lines = ["epoch,ssim"]
    for epoch in sorted(log.ssim):
        lines.append(f"{epoch},{_fmt(log.ssim[epoch])}")
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_comparison_csv(report: ComparisonReport, path) -> None:
    """One row per run: SSIM at each table epoch plus the max loss rate."""
    header = ["run"] + [f"ssim@{e}" for e in report.table_epochs] + ["max_loss_rate"]
    lines = [",".join(header)]
    for label, row, rate in zip(report.labels, report.ssim_table, report.rates):
        lines.append(",".join([label] + [_fmt(v) for v in row] + [_fmt(rate)]))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_curves_csv(report: ComparisonReport, path) -> None:
    """Aligned max-normalized loss curves, one column per run."""
    header = ["epoch"] + list(report.labels)
    lines = [",".join(header)]
    for i in range(len(report.curves[0])):
        lines.append(",".join([str(i + 1)] + [_fmt(c[i]) for c in report.curves]))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_curves_svg(report: ComparisonReport, path) -> None:
    """Hand-emitted polyline chart of the normalized loss curves (y max 1.0)."""
    width, height = _SVG_SIZE
    left, right, top, bottom = _SVG_MARGIN
    plot_w = width - left - right
    plot_h = height - top - bottom
    epochs = len(report.curves[0])

    def x_of(i: int) -> float:
        return left + (plot_w * i / max(epochs - 1, 1))

    def y_of(v: float) -> float:
        return top + plot_h * (1.0 - v)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" '
        'stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y_of(tick)
        parts.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">{tick}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        i = int(round((epochs - 1) * frac))
        x = x_of(i)
        parts.append(
            f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" y2="{top + plot_h + 4}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{top + plot_h + 18}" font-size="12" text-anchor="middle">{i + 1}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 4}" font-size="12" '
        'text-anchor="middle">epoch</text>'
    )
    parts.append(
        f'<text x="14" y="{top + plot_h / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + plot_h / 2:.2f})">normalized loss</text>'
    )
    for run, (label, curve) in enumerate(zip(report.labels, report.curves)):
        color = _PALETTE[run % len(_PALETTE)]
        points = " ".join(f"{x_of(i):.2f},{y_of(v):.2f}" for i, v in enumerate(curve))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        ly = top + 16 + 16 * run
        parts.append(
            f'<line x1="{left + plot_w - 120}" y1="{ly - 4}" x2="{left + plot_w - 96}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{left + plot_w - 90}" y="{ly}" font-size="12">{label}</text>')
    parts.append("</svg>")
    atomic_write_bytes(path, "\n".join(parts).encode("ascii"))


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def write_manifest(path, payload: dict) -> None:
    """JSON run manifest with sorted keys; `wall_clock_s` is the only field
    allowed to differ between reproducing runs."""
    atomic_write_bytes(path, (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def manifest_payload(command: list[str], version: str, seeds, inputs, outputs,
                     wall_clock_s: float, extra: dict | None = None) -> dict:
    payload = {
        "command": list(command),
        "version": version,
        "seeds": seeds,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "wall_clock_s": round(float(wall_clock_s), 6),
    }
    if extra:
        payload.update(extra)
    return payload


def summarize_curve(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"first": float(arr[0]), "last": float(arr[-1]),
            "min": float(arr.min()), "max": float(arr.max())}
