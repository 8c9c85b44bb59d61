"""2D scalar fields: validation and bit-exact file I/O.

A field is a 2D float64 numpy array (row 0 at top, row-major) whose values
are all finite. Three on-disk formats are supported:

csv
    One text row per grid row, comma-separated decimal reals, each row
    newline-terminated. Written with shortest round-trip formatting, so a
    read-back is value-exact.
f32bin
    16-byte little-endian header -- magic ``GMF1``, height (u32), width
    (u32), reserved zero (u32) -- followed by height*width little-endian
    float32 values, row-major. Internal precision is float64; writing
    narrows to float32, so a write/read round trip is bit-exact only for
    values representable in float32.
pgm
    Binary P5, maxval 255. Writing rescales [min, max] linearly onto
    [0, 255] (a constant field maps to all zeros); reading returns the
    raw byte values as floats, so the original scale is not recoverable.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import FieldIOError, FormatError, NonFiniteValueError, ShapeMismatchError

_MAGIC = b"GMF1"
_HEADER = struct.Struct("<4sIII")

FORMATS = ("csv", "f32bin", "pgm")

_SUFFIX_FORMATS = {".csv": "csv", ".f32bin": "f32bin", ".bin": "f32bin", ".pgm": "pgm"}


def as_field(values, copy: bool = False) -> np.ndarray:
    """Validate `values` as a field and return it as a float64 array.

    Raises ShapeMismatchError unless the input is 2D and non-empty, and
    NonFiniteValueError if any value is NaN or infinite.
    """
    arr = np.array(values, dtype=np.float64, copy=copy) if copy else np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatchError(f"expected a non-empty 2D field, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("field contains NaN or infinite values")
    return arr


def make_field(height: int, width: int, values) -> np.ndarray:
    """Build a validated field from a flat row-major value sequence."""
    if height < 1 or width < 1:
        raise ShapeMismatchError(f"field dimensions must be positive, got {height}x{width}")
    flat = np.asarray(values, dtype=np.float64).reshape(-1)
    if flat.size != height * width:
        raise ShapeMismatchError(
            f"expected {height * width} values for a {height}x{width} field, got {flat.size}"
        )
    return as_field(flat.reshape(height, width), copy=True)


def check_same_shape(*fields: np.ndarray) -> None:
    shapes = {f.shape for f in fields}
    if len(shapes) > 1:
        raise ShapeMismatchError(f"fields must share one shape, got {sorted(shapes)}")


def format_for_path(path, fmt: str | None = None) -> str:
    """Resolve the file format, from `fmt` or the path suffix."""
    if fmt is not None:
        if fmt not in FORMATS:
            raise FieldIOError(f"unknown field format {fmt!r}; expected one of {FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix in _SUFFIX_FORMATS:
        return _SUFFIX_FORMATS[suffix]
    raise FieldIOError(f"cannot infer field format from suffix {suffix!r}; pass fmt explicitly")


def atomic_write_bytes(path, data: bytes) -> None:
    """Write `data` to `path` through a temp file + rename, never leaving partial output."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise FieldIOError(f"cannot write {path}: {exc}") from exc


def _format_value(v: float) -> str:
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def _encode_csv(field: np.ndarray) -> bytes:
    lines = [",".join(_format_value(v) for v in row) for row in field]
    return ("\n".join(lines) + "\n").encode("ascii")


def _decode_csv(data: bytes, path) -> np.ndarray:
    text = data.decode("utf-8", errors="replace")
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line == "":
            continue
        cells = line.split(",")
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
        if not all(np.isfinite(row)):
            raise FormatError(f"{path}: line {lineno}: non-finite value")
        if rows and len(row) != len(rows[0]):
            raise FormatError(
                f"{path}: line {lineno}: expected {len(rows[0])} values, got {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise FormatError(f"{path}: line 1: empty csv field file")
    return np.array(rows, dtype=np.float64)


def _encode_f32bin(field: np.ndarray) -> bytes:
    h, w = field.shape
    header = _HEADER.pack(_MAGIC, h, w, 0)
    return header + field.astype("<f4").tobytes()


def _decode_f32bin(data: bytes, path) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: byte {len(data)}: truncated header, need {_HEADER.size} bytes")
    magic, h, w, reserved = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise FormatError(f"{path}: byte 0: bad magic {magic!r}, expected {_MAGIC!r}")
    if reserved != 0:
        raise FormatError(f"{path}: byte 12: reserved word must be zero, got {reserved}")
    if h < 1 or w < 1:
        raise FormatError(f"{path}: byte 4: non-positive dimensions {h}x{w}")
    expected = _HEADER.size + 4 * h * w
    if len(data) != expected:
        raise FormatError(f"{path}: byte {len(data)}: expected {expected} bytes for {h}x{w}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return values.reshape(h, w)


def _encode_pgm(field: np.ndarray) -> bytes:
    h, w = field.shape
    lo = field.min()
    hi = field.max()
    if hi > lo:
        scaled = np.rint((field - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(field)
    raster = scaled.astype(np.uint8).tobytes()
    return f"P5\n{w} {h}\n255\n".encode("ascii") + raster


def _decode_pgm(data: bytes, path) -> np.ndarray:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if pos > start:
            tokens.append(data[start:pos])
    if len(tokens) < 4:
        raise FormatError(f"{path}: byte {pos}: incomplete pgm header")
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: byte 0: expected binary pgm magic P5, got {tokens[0]!r}")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed pgm header: {exc}") from exc
    if maxval != 255:
        raise FormatError(f"{path}: unsupported pgm maxval {maxval}, expected 255")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + h * w]
    if len(raster) != h * w:
        raise FormatError(f"{path}: byte {len(data)}: expected {h * w} raster bytes, got {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).astype(np.float64).reshape(h, w)


_ENCODERS = {"csv": _encode_csv, "f32bin": _encode_f32bin, "pgm": _encode_pgm}
_DECODERS = {"csv": _decode_csv, "f32bin": _decode_f32bin, "pgm": _decode_pgm}


def write_field(field: np.ndarray, path, fmt: str | None = None) -> None:
    """Write a field to `path` in the given (or suffix-inferred) format."""
    field = as_field(field)
    fmt = format_for_path(path, fmt)
    atomic_write_bytes(path, _ENCODERS[fmt](field))


def read_field(path, fmt: str | None = None) -> np.ndarray:
    """Read a field from `path` in the given (or suffix-inferred) format."""
    fmt = format_for_path(path, fmt)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FieldIOError(f"cannot read {path}: {exc}") from exc
    return _DECODERS[fmt](data, path)
