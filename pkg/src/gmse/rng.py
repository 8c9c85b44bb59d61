"""Counter-based pseudo-random streams.

All randomness in the package flows through the splitmix64 finalizer below.
Streams are pure functions of a 64-bit seed and a counter, so per-item
sub-streams can be derived independently (parallel and serial generation
agree bitwise) and results do not depend on any library RNG state.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _finalize(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= _M1
    x ^= x >> np.uint64(27)
    x *= _M2
    x ^= x >> np.uint64(31)
    return x


def _raw(seed: int, count: int) -> np.ndarray:
    """First `count` uint64 words of the stream keyed by `seed`."""
    counters = np.arange(1, count + 1, dtype=np.uint64)
    return _finalize(np.uint64(seed & _MASK) + _GAMMA * counters)


def derive(seed: int, index: int) -> int:
    """Key for an independent sub-stream, e.g. one dataset item or epoch."""
    word = _finalize(np.array([(seed & _MASK)], dtype=np.uint64)
                     ^ _finalize(np.array([(index & _MASK)], dtype=np.uint64) + _GAMMA))
    return int(word[0])


def uniforms(seed: int, count: int) -> np.ndarray:
    """`count` float64 samples uniform on (0, 1]."""
    return (_raw(seed, count) + np.uint64(1)) * 2.0 ** -64


def normals(seed: int, count: int) -> np.ndarray:
    """`count` standard-normal float64 samples via Box-Muller."""
    pairs = (count + 1) // 2
    u = uniforms(seed, 2 * pairs)
    r = np.sqrt(-2.0 * np.log(u[:pairs]))
    theta = 2.0 * np.pi * u[pairs:]
    z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
    return z[:count]


def permutation(seed: int, n: int) -> np.ndarray:
    """Deterministic permutation of range(n)."""
    return np.argsort(uniforms(seed, n), kind="stable")
