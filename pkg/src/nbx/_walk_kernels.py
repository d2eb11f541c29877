"""Compiled random-walk kernels.

Each sample draws from its own SplitMix64 stream keyed by
``mix(seed) ^ index``, so a batch computed in any order (or any chunking) is
bit-identical.  Hashing the seed first keeps neighboring seeds from sharing
the same set of per-sample keys.
"""

import numba as nb
import numpy as np

SRW, NBRW, BBRW = 0, 1, 2
DEAD_END = -1
TRUNCATED = -2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def _below(state, k):
    """Advance ``state`` and draw an integer uniform in ``[0, k)``."""
    state = state + _GOLDEN
    u = np.float64(_mix(state) >> _S11) * _INV53
    return state, int(u * k)


@nb.njit(cache=True)
def walk_once(indptr, indices, kind, start, target, max_steps, key):
    state = _mix(np.uint64(key))
    cur = start
    prev = -1
    if cur == target:
        return 0
    for step in range(1, max_steps + 1):
        lo = indptr[cur]
        deg = indptr[cur + 1] - lo
        if kind == SRW or prev < 0:
            state, r = _below(state, deg)
            nxt = indices[lo + r]
        elif deg == 1:
            if kind == NBRW:
                return DEAD_END
            nxt = prev
        else:
            # uniform over the deg - 1 neighbors other than prev
            state, r = _below(state, deg - 1)
            nxt = indices[lo + r]
            if nxt == prev:
                nxt = indices[lo + deg - 1]
        prev = cur
        cur = nxt
        if cur == target:
            return step
    return TRUNCATED


@nb.njit(cache=True)
def walk_batch(indptr, indices, kind, start, target, max_steps, seed, first, count):
    out = np.empty(count, dtype=np.int64)
    s = _mix(np.uint64(seed) + _GOLDEN)
    for t in range(count):
        out[t] = walk_once(indptr, indices, kind, start, target, max_steps, s ^ np.uint64(first + t))
    return out
