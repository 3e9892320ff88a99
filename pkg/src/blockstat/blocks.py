"""Non-overlapping blocks, block-wise raw moments and local statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlockTooLong, DomainViolation, EmptySeries, NonFiniteSeries


def as_series(values) -> np.ndarray:
    """Validate observations and return them as a float array.

    A 2-d input is read as a batch of series, one per row.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise EmptySeries("series has no observations")
    if x.ndim > 2:
        raise ValueError("series must be 1-d, or 2-d for a batch")
    if not np.all(np.isfinite(x)):
        bad = np.flatnonzero(~np.isfinite(x.reshape(-1)))[0] % x.shape[-1]
        raise NonFiniteSeries(f"non-finite observation at index {bad}")
    return x


@dataclass(frozen=True)
class BlockScheme:
    """Consecutive blocks ``{(j-1)l+1, ..., jl}``, ``j = 1..b``, of a length-``n`` series."""

    block_length: int
    block_count: int
    n: int
    drop_tail: bool = True

    @property
    def dropped(self) -> int:
        return self.n - self.block_length * self.block_count

    def block_indices(self, j: int) -> range:
        """0-based observation indices of block ``j`` (0-based)."""
        if not 0 <= j < self.block_count:
            raise IndexError(f"block {j} out of range for {self.block_count} blocks")
        return range(j * self.block_length, (j + 1) * self.block_length)

    def reshape(self, x: np.ndarray) -> np.ndarray:
        """View ``x[..., :b*l]`` as ``(..., b, l)``."""
        used = self.block_length * self.block_count
        return x[..., :used].reshape(*x.shape[:-1], self.block_count, self.block_length)


def partition(series, block_length: int) -> BlockScheme:
    """Split a series of length ``n`` into ``floor(n / l)`` full blocks.

    Trailing observations that do not fill a block are dropped; their number
    is available as ``BlockScheme.dropped``.
    """
    x = as_series(series)
    n = x.shape[-1]
    block_length = int(block_length)
    if block_length < 1:
        raise ValueError("block_length must be >= 1")
    if block_length > n:
        raise BlockTooLong(f"block length {block_length} exceeds series length {n}")
    return BlockScheme(block_length, n // block_length, n)


def compensated_sum(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Pairwise summation with error-free TwoSum compensation.

    The rounding error of every pairwise addition is recovered exactly and
    accumulated separately, so the result is accurate to roughly twice the
    working precision.
    """
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    comp = np.zeros(x.shape[:-1])
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            x = np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
        a = x[..., 0::2]
        b = x[..., 1::2]
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
        comp += err.sum(axis=-1)
        x = s
    return x[..., 0] + comp


@dataclass(frozen=True)
class LocalMoments:
    """Block-wise raw moments; ``values[..., j, k-1]`` is the k-th moment of block j."""

    values: np.ndarray
    block_length: int

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    @property
    def block_count(self) -> int:
        return self.values.shape[-2]


def local_moments(series, scheme: BlockScheme, m: int) -> LocalMoments:
    """First ``m`` raw sample moments of every block."""
    if m < 1:
        raise ValueError("moment order m must be >= 1")
    x = scheme.reshape(as_series(series))
    powers = np.empty(x.shape + (m,))
    powers[..., 0] = x
    for k in range(1, m):
        powers[..., k] = powers[..., k - 1] * x
    sums = compensated_sum(powers, axis=-2)
    return LocalMoments(sums / scheme.block_length, scheme.block_length)


def local_statistics(moments: LocalMoments, g, truncated: bool = False) -> np.ndarray:
    """``sqrt(l) * g(row)`` per block, or ``sqrt(l) * (g * eta)(row)`` if truncated.

    Raises
    ------
    DomainViolation
        If ``truncated`` is false and some block's moment vector lies outside
        the domain of ``g`` (for instance a zero empirical variance under
        the log-variance preset).
    """
    if g.m != moments.m:
        raise ValueError(f"g expects {g.m} moments, got {moments.m}")
    rows = moments.values
    scale = np.sqrt(moments.block_length)
    if truncated:
        return scale * g.truncated(rows)
    ok = g.in_domain(rows)
    if not np.all(ok):
        flat = np.flatnonzero(~ok.reshape(-1))[0]
        j = int(flat % moments.block_count)
        raise DomainViolation(
            f"g '{g.name}' is undefined at the moments of block {j}: "
            f"{rows.reshape(-1, moments.m)[flat].tolist()}",
            block_index=j,
        )
    return scale * g(rows)
