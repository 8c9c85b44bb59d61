"""Command-line interface: weight maps, loss/SSIM evaluation, synthetic data,
training, and loss-function comparison.

Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 pipeline error
(shape mismatch, invalid parameters, and the like). Every successful run
writes exactly one JSON manifest next to its outputs; commands that only
print a scalar write theirs in the working directory. All randomness
flows from --seed; outputs are byte-identical across reruns except for
the manifest's wall_clock_s field.
"""

from __future__ import annotations

import functools
import os
import sys
import time
from pathlib import Path

import click

from . import __version__, report
from .errors import ConfigError, FieldIOError, GmseError
from .fields import read_field, write_field
from .losses import gmse as gmse_loss
from .losses import mse as mse_loss
from .metrics import ssim_global, ssim_windowed
from .schedule import default_gmse_params, load_schedule
from .synthetic import load_dataset_dir, make_dataset, write_dataset_dir
from .training import TrainConfig, compare, train
from .weighting import GmseParams, build_weight_map

_THREADS_ENV = "GMSE_THREADS"


def _threads_option(fn):
    return click.option(
        "--threads", type=int, default=None,
        help=f"Worker threads for per-field work (default 1, or ${_THREADS_ENV}).",
    )(fn)


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(_THREADS_ENV, "1"))
    if threads < 1:
        raise click.UsageError(f"--threads must be >= 1, got {threads}")
    return threads


def _run_guard(fn):
    """Map library errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FieldIOError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except GmseError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)

    return wrapper


def _scalar(value: float) -> str:
    return f"{value:.12g}"


@click.group()
@click.version_option(version=__version__, prog_name="gmse")
def main():
    """Gradient-weighted MSE toolkit for 2D flow fields."""


@main.command("weightmap")
@click.option("--in", "in_path", required=True, type=click.Path(), help="Reference field file.")
@click.option("--sigma", type=float, default=10.0, show_default=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--offset", type=float, default=0.2, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(), help="Weight map (f32bin).")
@click.option("--pgm", "pgm_path", type=click.Path(), default=None,
              help="Optional grayscale visualization.")
@_run_guard
def cmd_weightmap(in_path, sigma, gamma, offset, out_path, pgm_path):
    """Build the gradient weight map for one reference field."""
    started = time.perf_counter()
    reference = read_field(in_path)
    weight_map = build_weight_map(reference, GmseParams(sigma, gamma, offset))
    write_field(weight_map, out_path, fmt="f32bin")
    outputs = [out_path]
    if pgm_path:
        write_field(weight_map, pgm_path, fmt="pgm")
        outputs.append(pgm_path)
    manifest = Path(str(out_path) + ".manifest.json")
    report.write_manifest(manifest, report.manifest_payload(
        sys.argv[1:], __version__, None, [in_path], outputs,
        time.perf_counter() - started,
        extra={"sigma": sigma, "gamma": gamma, "offset": offset},
    ))


@main.command("loss")
@click.option("--real", "real_path", required=True, type=click.Path())
@click.option("--fake", "fake_path", required=True, type=click.Path())
@click.option("--mse", "kind", flag_value="mse", default=True, help="Plain MSE (default).")
@click.option("--gmse", "kind", flag_value="gmse", help="Gradient-weighted MSE.")
@click.option("--sigma", type=float, default=10.0, show_default=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--offset", type=float, default=0.2, show_default=True)
@_run_guard
def cmd_loss(real_path, fake_path, kind, sigma, gamma, offset):
    """Print the loss between two fields (12 significant digits)."""
    started = time.perf_counter()
    real = read_field(real_path)
    fake = read_field(fake_path)
    if kind == "gmse":
        params = GmseParams(sigma, gamma, offset)
        value = gmse_loss(real, fake, build_weight_map(real, params))
    else:
        value = mse_loss(real, fake)
    click.echo(_scalar(value))
    report.write_manifest(Path("loss-manifest.json"), report.manifest_payload(
        sys.argv[1:], __version__, None, [real_path, fake_path], [],
        time.perf_counter() - started,
        extra={"kind": kind, "value": value,
               "sigma": sigma if kind == "gmse" else None,
               "gamma": gamma if kind == "gmse" else None,
               "offset": offset if kind == "gmse" else None},
    ))


@main.command("ssim")
@click.option("--a", "a_path", required=True, type=click.Path())
@click.option("--b", "b_path", required=True, type=click.Path())
@click.option("--L", "dynamic_range", type=float, default=1.0, show_default=True,
              help="Dynamic range of the pixel values.")
@click.option("--k1", type=float, default=0.01, show_default=True)
@click.option("--k2", type=float, default=0.03, show_default=True)
@click.option("--windowed", is_flag=True, help="Sliding-window mean SSIM (window 11).")
@_run_guard
def cmd_ssim(a_path, b_path, dynamic_range, k1, k2, windowed):
    """Print the structural similarity of two fields."""
    started = time.perf_counter()
    a = read_field(a_path)
    b = read_field(b_path)
    if windowed:
        value = ssim_windowed(a, b, dynamic_range, k1, k2)
    else:
        value = ssim_global(a, b, dynamic_range, k1, k2)
    click.echo(_scalar(value))
    report.write_manifest(Path("ssim-manifest.json"), report.manifest_payload(
        sys.argv[1:], __version__, None, [a_path, b_path], [],
        time.perf_counter() - started,
        extra={"L": dynamic_range, "k1": k1, "k2": k2, "windowed": windowed, "value": value},
    ))


def _parse_size(size: str) -> tuple[int, int]:
    try:
        h_text, w_text = size.lower().split("x")
        h, w = int(h_text), int(w_text)
    except ValueError:
        raise click.UsageError(f"--size must look like 64x64, got {size!r}")
    if h < 16 or w < 16:
        raise click.UsageError(f"--size must be at least 16x16, got {size}")
    return h, w


@main.command("synth")
@click.option("--n", type=int, required=True, help="Number of dataset items.")
@click.option("--size", default="64x64", show_default=True, help="Field size HxW.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_threads_option
@_run_guard
def cmd_synth(n, size, seed, out_dir, threads):
    """Generate a synthetic wake-field dataset directory."""
    if n < 1:
        raise click.UsageError(f"--n must be >= 1, got {n}")
    h, w = _parse_size(size)
    threads = _resolve_threads(threads)
    started = time.perf_counter()
    dataset = make_dataset(n, h, w, seed, threads=threads)
    names = write_dataset_dir(dataset, out_dir)
    out_dir = Path(out_dir)
    report.write_manifest(out_dir / "manifest.json", report.manifest_payload(
        sys.argv[1:], __version__, seed, [], [str(out_dir / n_) for n_ in names],
        time.perf_counter() - started,
        extra={"n": n, "height": h, "width": w},
    ))


def _config_from_options(loss, schedule_path, epochs, seed, batch_size, threads,
                         label=None) -> TrainConfig:
    schedule = None
    params = None
    if loss == "dgmse" and schedule_path:
        schedule = load_schedule(schedule_path)
    if loss == "gmse":
        params = default_gmse_params()
    return TrainConfig(loss=loss, params=params, schedule=schedule, epochs=epochs,
                       seed=seed, batch_size=batch_size, threads=threads,
                       label=label or loss)


@main.command("train")
@click.option("--data", "data_dir", required=True, type=click.Path(),
              help="Dataset directory from `gmse synth`.")
@click.option("--loss", type=click.Choice(["mse", "gmse", "dgmse"]), default="mse",
              show_default=True)
@click.option("--schedule", "schedule_path", type=click.Path(), default=None,
              help="Stage file for --loss dgmse (built-in schedule when omitted).")
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--batch-size", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_threads_option
@_run_guard
def cmd_train(data_dir, loss, schedule_path, epochs, batch_size, seed, out_dir, threads):
    """Train the conditional generator on a dataset under one loss."""
    threads = _resolve_threads(threads)
    started = time.perf_counter()
    dataset = load_dataset_dir(data_dir)
    try:
        config = _config_from_options(loss, schedule_path, epochs, seed, batch_size, threads)
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    log = train(dataset, config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.write_train_log_csv(log, out_dir / "train_log.csv")
    report.write_checkpoint_csv(log, out_dir / "checkpoints.csv")
    inputs = [Path(data_dir) / "manifest.csv"]
    report.write_manifest(out_dir / "manifest.json", report.manifest_payload(
        sys.argv[1:], __version__, seed, inputs,
        [str(out_dir / "train_log.csv"), str(out_dir / "checkpoints.csv")],
        time.perf_counter() - started,
        extra={"config": config.to_dict(), "final_loss": float(log.losses[-1]),
               "ssim": {str(k): v for k, v in sorted(log.ssim.items())}},
    ))


def _parse_runs(spec: str, schedule_dir: Path | None = None) -> list[dict]:
    """Parse a comparison spec: comma-separated run tokens.

    Tokens: `mse`, `gmse`, `gmse:SIGMA:GAMMA:OFFSET`, `dgmse`,
    `dgmse:SCHEDULE_FILE`.
    """
    runs = []
    tokens = [t.strip() for t in spec.split(",") if t.strip()]
    for token in tokens:
        head, _, rest = token.partition(":")
        if head == "mse":
            if rest:
                raise click.UsageError(f"mse takes no parameters, got {token!r}")
            runs.append({"loss": "mse", "label": token})
        elif head == "gmse":
            if rest:
                parts = rest.split(":")
                if len(parts) != 3:
                    raise click.UsageError(
                        f"expected gmse:SIGMA:GAMMA:OFFSET, got {token!r}")
                try:
                    params = GmseParams(float(parts[0]), float(parts[1]), float(parts[2]))
                except (ValueError, GmseError) as exc:
                    raise click.UsageError(f"bad gmse parameters in {token!r}: {exc}")
            else:
                params = default_gmse_params()
            runs.append({"loss": "gmse", "params": params, "label": token})
        elif head == "dgmse":
            schedule = None
            if rest:
                try:
                    schedule = load_schedule(rest)
                except ConfigError as exc:
                    raise click.UsageError(str(exc))
            runs.append({"loss": "dgmse", "schedule": schedule, "label": token})
        else:
            raise click.UsageError(f"unknown run token {token!r}")
    if len(runs) < 2:
        raise click.UsageError(f"--runs needs at least 2 configs, got {len(runs)}")
    return runs


@main.command("compare")
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--runs", "runs_spec", required=True,
              help="Comma-separated run tokens, e.g. mse,gmse,dgmse or gmse:10:1.0:0.8.")
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--batch-size", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_threads_option
@_run_guard
def cmd_compare(data_dir, runs_spec, epochs, batch_size, seed, out_dir, threads):
    """Train several loss configs on one dataset and tabulate the comparison."""
    threads = _resolve_threads(threads)
    run_specs = _parse_runs(runs_spec)
    started = time.perf_counter()
    dataset = load_dataset_dir(data_dir)
    try:
        configs = [
            TrainConfig(loss=r["loss"], params=r.get("params"), schedule=r.get("schedule"),
                        epochs=epochs, batch_size=batch_size, seed=seed, threads=threads,
                        label=r["label"])
            for r in run_specs
        ]
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    result = compare(dataset, configs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.write_comparison_csv(result, out_dir / "comparison.csv")
    report.write_curves_csv(result, out_dir / "loss_curves.csv")
    report.write_curves_svg(result, out_dir / "loss_curves.svg")
    outputs = [out_dir / "comparison.csv", out_dir / "loss_curves.csv",
               out_dir / "loss_curves.svg"]
    report.write_manifest(out_dir / "manifest.json", report.manifest_payload(
        sys.argv[1:], __version__, seed, [Path(data_dir) / "manifest.csv"],
        [str(p) for p in outputs], time.perf_counter() - started,
        extra={"runs": [r["label"] for r in run_specs], "epochs": epochs},
    ))


if __name__ == "__main__":
    main()
