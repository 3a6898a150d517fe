"""Counter-based random streams.

Every random number used by the simulator is a pure function of
``(seed, stream name, trial index, draw number)``.  There is no generator
state to advance, so trials can be produced in any order, in any number of
chunks, on any number of workers, and the result is bit-identical.

The mixing function is the SplitMix64 finalizer applied to
``key + counter * golden``, i.e. the SplitMix64 sequence evaluated at an
arbitrary position.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MAX_DRAWS = 16  # draws per (stream, trial); counter = index * MAX_DRAWS + draw

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, name: str) -> int:
    """64-bit key for the named stream under ``seed``."""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    tag = int.from_bytes(digest, "little")
    return _mix_int(_mix_int(seed & MASK64) ^ tag)


class Stream:
    """A named family of per-trial random streams.

    ``Stream(seed, "left").uniform(n, draw)`` is the ``draw``-th uniform
    number of trial ``n`` on the left station's local stream.  ``n`` may be
    an integer or an integer array.
    """

    __slots__ = ("seed", "name", "key")

    def __init__(self, seed: int, name: str):
        self.seed = int(seed) & MASK64
        self.name = name
        self.key = stream_key(self.seed, name)

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, name={self.name!r})"

    def bits(self, index, draw: int = 0) -> np.ndarray:
        if not 0 <= draw < MAX_DRAWS:
            raise ValueError(f"draw must be in [0, {MAX_DRAWS}), got {draw}")
        idx = np.asarray(index, dtype=np.uint64)
        ctr = idx * np.uint64(MAX_DRAWS) + np.uint64(draw)
        with np.errstate(over="ignore"):
            z = np.uint64(self.key) + ctr * np.uint64(GOLDEN)
            return _mix(z)

    def uniform(self, index, draw: int = 0):
        """Uniform on [0, 1) with 53 random bits."""
        out = (self.bits(index, draw) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        if np.ndim(index) == 0:
            return float(out)
        return out


class TrialStream:
    """The local random stream of a single trial, as handed to a station."""

    __slots__ = ("stream", "index")

    def __init__(self, seed: int, name: str, index: int):
        self.stream = Stream(seed, name)
        self.index = int(index)

    def uniform(self, draw: int = 0) -> float:
        return self.stream.uniform(self.index, draw)
