"""Counter-based random number generation for shardable Monte Carlo.

Every random draw in the simulator is addressed by a 4-tuple
``(master seed, stream, index, slot)`` and produced by a stateless hash,
so any round of a simulation can be regenerated in isolation and results
are independent of how work is split across workers.  The hash is the
SplitMix64 finalizer applied twice, which has full 64-bit avalanche and
is more than adequate for Monte Carlo use (it is not cryptographic; the
hardware randomness it stands in for is out of scope here).

Streams separate statistically independent purposes (party A's state
choices, party B's phases, detector draws, ...).  ``index`` is usually a
round or trial number and ``slot`` a small per-round draw counter.
"""
from __future__ import annotations

from enum import IntEnum

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MULT1 = np.uint64(0xBF58476D1CE4E5B9)
_MULT2 = np.uint64(0x94D049BB133111EB)
_SLOT_STEP = np.uint64(0xD1342543DE82EF95)

# uint64 arithmetic below intentionally wraps
def _errstate():
    return np.errstate(over="ignore")


class Stream(IntEnum):
    """Purpose labels so independent draws never share a counter."""

    SPEC_A = 1
    SPEC_B = 2
    PHASE_A = 3
    PHASE_B = 4
    CLICK = 5
    JITTER = 6
    FOCK_PHOTONS_A = 7
    FOCK_PHOTONS_B = 8
    FOCK_LOSS_A = 9
    FOCK_LOSS_B = 10
    FOCK_PATTERN = 11
    CONTROL = 12
    DRIFT = 13
    HOM = 14


def _mix(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer (64-bit avalanche)."""
    x = (x ^ (x >> np.uint64(30))) * _MULT1
    x = (x ^ (x >> np.uint64(27))) * _MULT2
    return x ^ (x >> np.uint64(31))


def _base_key(seed: int, stream: int) -> np.uint64:
    with _errstate():
        k = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * _GAMMA + _GAMMA)
        return _mix(k + np.uint64(stream) * _SLOT_STEP)


class CounterRng:
    """Stateless per-(seed, stream) source of addressable random values.

    All methods are pure functions of (seed, stream, index, slot); the
    object only caches the mixed base key.
    """

    def __init__(self, seed: int, stream: int):
        self.seed = int(seed)
        self.stream = int(stream)
        self._base = _base_key(seed, stream)

    def raw(self, index, slot=0):
        """uint64 words for the given draw indices.

        ``index`` may be a scalar or integer array; ``slot`` distinguishes
        multiple draws belonging to the same index.
        """
        idx = np.asarray(index, dtype=np.uint64)
        with _errstate():
            x = _mix(self._base + idx * _GAMMA)
            return _mix(x + np.uint64(slot) * _SLOT_STEP)

    def uniform(self, index, slot=0):
        """float64 uniform on [0, 1)."""
        return (self.raw(index, slot) >> np.uint64(11)) * (2.0 ** -53)

    def uniforms(self, start: int, n: int, slot=0):
        """Uniforms for indices start..start+n-1."""
        return self.uniform(np.arange(start, start + n, dtype=np.uint64), slot)

    def normal(self, index, slot=0):
        """Standard normals via Box-Muller; consumes slots (slot, slot+1)."""
        u1 = self.uniform(index, slot)
        u2 = self.uniform(index, slot + 1)
        # guard log(0); 2^-53 keeps the value in range
        u1 = np.maximum(u1, 2.0 ** -53)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def substream(seed: int, *labels: int) -> int:
    """Derive a child seed from a seed and integer labels.

    Used to give enumerable sub-experiments (e.g. each delay point of a
    scan) their own independent stream family.
    """
    x = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    with _errstate():
        for lab in labels:
            x = _mix(x * _GAMMA + np.uint64(lab & 0xFFFFFFFFFFFFFFFF) + _GAMMA)
    return int(x)
