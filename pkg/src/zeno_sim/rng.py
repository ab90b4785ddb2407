"""
Counter-based normal draws keyed by (seed, trajectory, component, draw index).

Philox4x32-10 (Salmon et al., SC'11) maps a 128-bit counter and a 64-bit key
to four 32-bit words, so any draw can be produced independently of every
other one. Monte Carlo results are therefore independent of chunking and
thread count.
"""

import numba
import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_TWO_PI = 2.0 * np.pi


@numba.njit(cache=True, inline="always")
def _philox_block(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r > 0:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (p1 >> _SHIFT) ^ c1 ^ k0, p1 & _MASK32, (p0 >> _SHIFT) ^ c3 ^ k1, p0 & _MASK32
    return c0, c1, c2, c3


@numba.njit(cache=True)
def _philox_many(counters, k0, k1):
    out = np.empty_like(counters)
    for i in range(counters.shape[0]):
        w = _philox_block(counters[i, 0], counters[i, 1], counters[i, 2], counters[i, 3], k0, k1)
        out[i, 0], out[i, 1], out[i, 2], out[i, 3] = w
    return out


@numba.njit(cache=True, inline="always")
def _unit(a, b):
    # 53-bit uniform in [0, 1) from two 32-bit words
    return ((a >> np.uint64(5)) * 67108864.0 + (b >> np.uint64(6))) / 9007199254740992.0


@numba.njit(cache=True)
def _normals_kernel(k0, k1, traj, comp, n_draws, out):
    n_pairs = (n_draws + 1) // 2
    for p in range(n_pairs):
        plo = np.uint64(p) & _MASK32
        phi = np.uint64(p) >> _SHIFT
        for i in range(traj.shape[0]):
            for j in range(comp.shape[0]):
                w0, w1, w2, w3 = _philox_block(plo, phi, traj[i], comp[j], k0, k1)
                radius = np.sqrt(-2.0 * np.log1p(-_unit(w0, w1)))
                angle = _TWO_PI * _unit(w2, w3)
                out[2 * p, i, j] = radius * np.cos(angle)
                if 2 * p + 1 < n_draws:
                    out[2 * p + 1, i, j] = radius * np.sin(angle)


def philox4x32(counter, key):
    """Philox4x32-10 block function on 4-word counters.

    Parameters
    ----------
    counter : array_like of shape (..., 4), words < 2**32
    key : pair of ints < 2**32

    Returns
    -------
    uint64 array of the same shape holding the four output words
    """
    c = np.asarray(counter, dtype=np.uint64)
    if c.shape[-1] != 4:
        raise ValueError("counter must have 4 words in its last axis")
    flat = np.ascontiguousarray(c.reshape(-1, 4))
    out = _philox_many(flat, np.uint64(int(key[0]) & 0xFFFFFFFF), np.uint64(int(key[1]) & 0xFFFFFFFF))
    return out.reshape(c.shape)


def seed_key(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32)


def standard_normals(seed, trajectories, components, n_draws):
    """Standard normal draws of shape ``(n_draws, len(trajectories), len(components))``.

    Draw ``d`` of stream ``(trajectory, component)`` depends only on
    ``(seed, trajectory, component, d)``: draws ``2p`` and ``2p+1`` are the
    Box-Muller pair from the Philox block with counter
    ``(p mod 2**32, p // 2**32, trajectory, component)``.
    """
    k0, k1 = seed_key(seed)
    traj = np.ascontiguousarray(trajectories, dtype=np.uint64)
    comp = np.ascontiguousarray(components, dtype=np.uint64)
    out = np.empty((int(n_draws), traj.size, comp.size))
    _normals_kernel(k0, k1, traj, comp, int(n_draws), out)
    return out
