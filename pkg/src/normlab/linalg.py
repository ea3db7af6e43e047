"""Dense float64 vector/matrix helpers, seeded randomness, and weight init.

Vectors are 1-d ``numpy.ndarray`` of float64, matrices are row-major 2-d
arrays. Everything here is pure; the only stateful object is
:class:`RngStream`, which owns its counter explicitly.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError

__all__ = ["RngStream", "dot", "norm2", "mean_std", "he_fanout_init", "as_vector"]


class RngStream:
    """Counter-based deterministic random stream.

    Backed by the Philox bit generator, so identical ``(seed, lane)`` pairs
    produce identical draw sequences across platforms and runs. Distinct
    lanes of the same seed are independent streams; paired experiment runs
    that must consume the same draws should share one stream or re-create
    it from the same seed.
    """

    def __init__(self, seed: int, lane: int = 0):
        if seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        self.seed = int(seed)
        self.lane = int(lane)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.lane,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def derive(self, lane: int) -> "RngStream":
        """Independent stream keyed off the same seed."""
        return RngStream(self.seed, lane)

    def normal(self, shape, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        return self._gen.normal(mean, std, size=shape)

    def uniform(self, low: float, high: float, shape=None) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def integers(self, low: int, high: int, shape=None):
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def as_vector(a) -> np.ndarray:
    """Coerce to a contiguous float64 vector."""
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def dot(a, b) -> float:
    a = as_vector(a)
    b = as_vector(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.dot(a, b))


def norm2(a) -> float:
    """Euclidean norm sqrt(sum a_i^2)."""
    a = as_vector(a)
    return float(np.sqrt(np.dot(a, a)))


def mean_std(a) -> tuple[float, float]:
    """Mean and population standard deviation (divisor n, not n-1)."""
    a = as_vector(a)
    if a.shape[0] < 1:
        raise DimensionError("mean_std needs at least one entry")
    m = float(np.mean(a))
    c = a - m
    v = float(np.sqrt(np.dot(c, c) / a.shape[0]))
    return m, v


def he_fanout_init(rows: int, cols: int, rng: RngStream) -> np.ndarray:
    """Gaussian init with std sqrt(2 / rows).

    Rows index output units (one row per unit), so ``rows`` is the fan-out.
    """
    if rows < 1 or cols < 1:
        raise DimensionError("rows and cols must be >= 1")
    return rng.normal((rows, cols), std=np.sqrt(2.0 / rows))
