"""Counter-based 64-bit streams shared by every sampler.

All randomness in the package flows through SplitMix64 so that jitted inner
loops and plain Python agree bit-for-bit on derived seeds. A stream is a
single ``uint64`` word held in a length-1 array so jitted code can advance it
in place.
"""
import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_GOLDEN_U = np.uint64(GOLDEN)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (taken mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child stream key for ``index`` under ``seed``; pure in both arguments."""
    h = mix64((seed & MASK64) + GOLDEN)
    return mix64((h + (index & MASK64) * GOLDEN + GOLDEN) & MASK64)


def new_state(seed: int) -> np.ndarray:
    return np.array([seed & MASK64], dtype=np.uint64)


@njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1_U
    z = (z ^ (z >> _S27)) * _M2_U
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def _derive(seed, index):
    h = _mix64(seed + _GOLDEN_U)
    return _mix64(h + index * _GOLDEN_U + _GOLDEN_U)


@njit(cache=True, nogil=True)
def _next(state):
    state[0] = state[0] + _GOLDEN_U
    return _mix64(state[0])


@njit(cache=True, nogil=True)
def _uniform(state):
    return np.float64(_next(state) >> _S11) * _INV53


@njit(cache=True, nogil=True)
def _below(state, bound):
    """Unbiased draw from ``range(bound)`` by rejection of the short tail."""
    b = np.uint64(bound)
    # (2**64 - b) mod b, computed without overflow
    threshold = (_ZERO - b) % b
    while True:
        r = _next(state)
        if r >= threshold:
            return np.int64(r % b)


@njit(cache=True, nogil=True)
def _pair_uniform(seed, i, j):
    """Uniform [0, 1) that depends only on (seed, i, j) with i < j."""
    h = _mix64(seed ^ _M2_U)
    h = _mix64(h + np.uint64(i) * _GOLDEN_U + _ONE)
    h = _mix64(h + np.uint64(j) * _GOLDEN_U + _ONE)
    return np.float64(h >> _S11) * _INV53
