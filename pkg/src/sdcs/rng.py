"""Deterministic counter-based random number generation.

A stream keyed by a 64-bit integer produces draw number i as
``mix64(key + (i + 1) * GAMMA)`` where ``mix64`` is the SplitMix64
finalizer.  Every output is a pure function of (key, position), so bulk
generation vectorizes over positions and two runs with the same seed give
bitwise-identical sequences regardless of chunking or platform.

Substreams are derived by hashing a label into a fresh key, which gives
independent streams for e.g. per-trial parallelism without coordination.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(_GAMMA)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_TWO_NEG53 = 2.0 ** -53


def _mix64(z: int) -> int:
    """Scalar SplitMix64 finalizer on Python ints (reference path)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _U_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U_MIX2
    return z ^ (z >> np.uint64(31))


def _fnv1a(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & _MASK
    return h


def _encode_label(label) -> bytes:
    if isinstance(label, bytes):
        return b"b:" + label
    if isinstance(label, str):
        return b"s:" + label.encode("utf-8")
    if isinstance(label, (int, np.integer)):
        return b"i:" + str(int(label)).encode("ascii")
    if isinstance(label, (tuple, list)):
        return b"t:" + b",".join(_encode_label(x) for x in label) + b";"
    raise TypeError(f"unsupported substream label type: {type(label).__name__}")


class RngStream:
    """Seeded, counter-based random stream.

    Identical (seed, call sequence) pairs reproduce identical outputs.
    The stream is stateful only through a draw counter; it must not be
    shared between concurrent tasks.  Use :meth:`substream` to derive an
    independent stream per task or trial.
    """

    __slots__ = ("_key", "_counter")

    def __init__(self, seed: int):
        if not isinstance(seed, (int, np.integer)):
            raise TypeError("seed must be an integer")
        self._key = int(seed) & _MASK
        self._counter = 0

    @property
    def key(self) -> int:
        """The 64-bit stream key; ``RngStream(key)`` replays this stream."""
        return self._key

    @property
    def counter(self) -> int:
        """Number of raw 64-bit draws consumed so far."""
        return self._counter

    def substream(self, label) -> "RngStream":
        """Derive an independent stream from (this key, label).

        Labels may be ints, strings, bytes, or nested tuples of those.
        The derivation does not consume draws from this stream.
        """
        h = _fnv1a(_encode_label(label))
        return RngStream(_mix64(self._key ^ _mix64(h ^ _GAMMA)))

    def uint64s(self, n: int) -> np.ndarray:
        """Next n raw 64-bit outputs as a uint64 array."""
        if n < 0:
            raise ValueError("n must be >= 0")
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        return _mix64_array(np.uint64(self._key) + idx * _U_GAMMA)

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1), 53-bit resolution."""
        return (self.uint64s(n) >> np.uint64(11)).astype(np.float64) * _TWO_NEG53

    def normals(self, n: int) -> np.ndarray:
        """n standard normal variates via the Box-Muller transform.

        Consumes exactly 2n raw draws: draw 2i feeds the radius (mapped
        to (0, 1] so the log is finite), draw 2i+1 the angle.
        """
        raw = self.uint64s(2 * n)
        u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_NEG53
        u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * _TWO_NEG53
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)

    def rademacher(self, n: int) -> np.ndarray:
        """n independent +/-1 variates (float64), from the top output bit."""
        bits = (self.uint64s(n) >> np.uint64(63)).astype(np.float64)
        return 1.0 - 2.0 * bits

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound), exact via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = int(self.uint64s(1)[0])
            if x < limit:
                return x % bound

    def choose_indices(self, n: int, k: int) -> np.ndarray:
        """Uniformly random k-subset of range(n), sorted ascending.

        Partial Fisher-Yates shuffle; consumes a variable number of raw
        draws but is deterministic for a fixed stream state.
        """
        if not 1 <= k <= n:
            raise ValueError("need 1 <= k <= n")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.array(sorted(pool[:k]), dtype=np.intp)


def derive_seed(base_seed: int, label) -> int:
    """Key of the substream (base_seed, label); usable as a fresh seed."""
    return RngStream(base_seed).substream(label).key
