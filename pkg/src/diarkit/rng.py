"""Deterministic seeded randomness.

The generator is counter-based: output word ``i`` of a stream with seed
``s`` is ``mix64(s + (i+1) * GOLDEN)`` where ``mix64`` is the SplitMix64
finalizer.  The stream is a pure function of (seed, counter), so identical
seeds give bit-identical streams on every platform, and blocks of any size
can be produced with vectorized uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


def mix_seed(seed: int, tag: int) -> int:
    """Derive a child seed from (seed, tag); used to split independent streams."""
    s = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    t = np.array([tag & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    out = _mix64(s + (_mix64(t + _GOLDEN) | _U64(1)))
    return int(out[0])


class Rng:
    """Counter-based SplitMix64 stream.

    Single-owner: one Rng must not be shared between concurrent tasks.
    All draws advance an internal counter; the sequence of values depends
    only on the seed and the cumulative number of words drawn.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._key = np.uint64(self.seed)
        self._counter = 0

    def spawn(self, tag: int) -> "Rng":
        """Independent child stream; deterministic in (seed, tag)."""
        return Rng(mix_seed(self.seed, tag))

    def u64(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        return _mix64(self._key + idx * _GOLDEN)

    def random(self, n: int | None = None):
        """Uniform float64 in [0, 1)."""
        m = 1 if n is None else n
        out = (self.u64(m) >> _U64(11)).astype(np.float64) * (2.0 ** -53)
        return float(out[0]) if n is None else out

    def normal(self, n: int | None = None):
        """Standard normals via Box-Muller (cosine branch)."""
        m = 1 if n is None else n
        u1 = self.random(m)
        u2 = self.random(m)
        u1 = np.maximum(u1, 2.0 ** -53)  # avoid log(0)
        out = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        return float(out[0]) if n is None else out

    def integers(self, low: int, high: int, n: int | None = None):
        """Uniform ints in [low, high). Modulo reduction; bias is negligible
        for the span sizes used here (``high - low`` far below 2**64)."""
        if high <= low:
            raise ValueError("empty range")
        span = np.uint64(high - low)
        m = 1 if n is None else n
        out = (self.u64(m) % span).astype(np.int64) + low
        return int(out[0]) if n is None else out

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of range(n) (argsort of random keys)."""
        return np.argsort(self.random(n), kind="stable")

    def choice_weighted(self, weights: np.ndarray) -> int:
        """Index drawn proportionally to non-negative weights.

        All-zero weights fall back to the lowest index (deterministic
        tie-break; callers rely on this for degenerate k-means++ seeding).
        """
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if total <= 0.0:
            return 0
        cum = np.cumsum(w) / total
        u = self.random()
        return int(np.searchsorted(cum, u, side="right").clip(0, len(w) - 1))
