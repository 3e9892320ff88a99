"""Counter-based random streams.

Every innovation ``eps_u`` is a pure function of ``(seed, stream, position)``,
so a value can be regenerated in isolation. Coupled copies and
order-independent replications rely on this.
"""
from __future__ import annotations

import numpy as np
from scipy import special

# Philox emits four 64-bit words per counter step.
_WORDS_PER_STEP = 4
# Shifts integer time indices so that negative ones map to valid positions.
INDEX_OFFSET = 1 << 40


def stream_key(seed: int, *spawn: int) -> np.ndarray:
    """128-bit Philox key derived from ``seed`` and a spawn path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in spawn))
    return ss.generate_state(2, np.uint64)


def raw_block(key: np.ndarray, position: int, count: int) -> np.ndarray:
    """``count`` raw 64-bit words starting at absolute ``position``."""
    if position < 0:
        raise ValueError("stream position must be nonnegative")
    step, skip = divmod(int(position), _WORDS_PER_STEP)
    bg = np.random.Philox(key=key)
    if step:
        bg.advance(step)
    out = bg.random_raw(count + skip)
    return np.asarray(out[skip:], dtype=np.uint64)


def uniforms(key: np.ndarray, position: int, count: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1), one per stream position."""
    raw = raw_block(key, position, count)
    # top 53 bits, shifted by half an ulp so that 0 and 1 are never hit
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def std_normal_from_uniform(u: np.ndarray) -> np.ndarray:
    return special.ndtri(u)


def indexed_uniforms(seed: int, spawn: tuple, first_index: int, count: int) -> np.ndarray:
    """Uniforms for integer time indices ``first_index ... first_index + count - 1``."""
    key = stream_key(seed, *spawn)
    return uniforms(key, INDEX_OFFSET + int(first_index), count)
