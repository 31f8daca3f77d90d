"""Counter-based random streams (Philox4x32-10).

Every variate in the package is addressed, not sequenced: a draw is a pure
function of (stream key, counter).  The stream key is derived from
(master_seed, experiment, trial, lane) by a splitmix64 chain; the counter
encodes the coefficient index.  This gives three properties the simulation
harness relies on:

* bit-identical results for any worker count or execution order,
* O(1) random access to any single coefficient's noise (sparse sampling of
  large perturbations draws only the entries that matter),
* re-seeding one index never shifts another index's value.

The generator is the standard 10-round Philox4x32 block cipher (weakened
cipher used as PRNG); each 4x32-bit output block yields two double-precision
uniforms, hence two Box-Muller normals, or four 32-bit words for discrete
draws.
"""

from __future__ import annotations

import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Philox multipliers and Weyl key increments.
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)

_ROUNDS = 10

_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53
_SQRT3 = 1.7320508075688772

# Lane ids keep logically distinct draw families in disjoint streams.
LANE_XI = 0          # polynomial noise xi_m
LANE_PERT = 1        # bivariate perturbation coefficients entering the reduction
LANE_PERT_UNUSED = 2 # bivariate perturbation coefficients that do not enter it
LANE_LIENARD = 3     # Lienard alpha_k


def splitmix64(z: int) -> int:
    """One splitmix64 scrambling step (used to derive stream keys)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, experiment: int = 0, trial: int = 0,
               lane: int = 0) -> int:
    """64-bit Philox key for one (master_seed, experiment, trial, lane) stream."""
    k = splitmix64(master_seed & _MASK64)
    k = splitmix64(k ^ (experiment & _MASK64))
    k = splitmix64(k ^ (trial & _MASK64))
    k = splitmix64(k ^ (lane & _MASK64))
    return k


def philox4x32(key: int, counters: np.ndarray):
    """Philox4x32-10 blocks for an array of 64-bit counters.

    The counter fills words (c0, c1) = (low, high); words (c2, c3) start at
    zero.  Returns four uint64 arrays holding 32-bit words.
    """
    c = np.asarray(counters, dtype=np.uint64)
    c0 = c & _MASK32
    c1 = (c >> np.uint64(32)) & _MASK32
    c2 = np.zeros_like(c0)
    c3 = np.zeros_like(c0)
    k0 = np.uint64(key & 0xFFFFFFFF)
    k1 = np.uint64((key >> 32) & 0xFFFFFFFF)
    for _ in range(_ROUNDS):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> np.uint64(32)
        lo0 = p0 & _MASK32
        hi1 = p1 >> np.uint64(32)
        lo1 = p1 & _MASK32
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def _uniform_pair(key: int, quads: np.ndarray):
    """Two independent uniforms per counter: u1 in (0,1], u2 in [0,1)."""
    w0, w1, w2, w3 = philox4x32(key, quads)
    h1 = (w0 >> np.uint64(6)) * np.uint64(1 << 27) + (w1 >> np.uint64(5))
    h2 = (w2 >> np.uint64(6)) * np.uint64(1 << 27) + (w3 >> np.uint64(5))
    u1 = (h1.astype(np.float64) + 1.0) * _INV_2_53
    u2 = h2.astype(np.float64) * _INV_2_53
    return u1, u2


def _normal_pair(key: int, quads: np.ndarray):
    """Box-Muller pair of standard normals per counter."""
    u1, u2 = _uniform_pair(key, quads)
    r = np.sqrt(-2.0 * np.log(u1))
    th = (2.0 * np.pi) * u2
    return r * np.cos(th), r * np.sin(th)


def gaussian_block(key: int, count: int, start: int = 0) -> np.ndarray:
    """Standard normals at indices [start, start+count)."""
    if count <= 0:
        return np.empty(0)
    lo, hi = start >> 1, (start + count - 1) >> 1
    z0, z1 = _normal_pair(key, np.arange(lo, hi + 1, dtype=np.uint64))
    out = np.empty(2 * (hi - lo + 1))
    out[0::2] = z0
    out[1::2] = z1
    return out[start - 2 * lo:start - 2 * lo + count]


def rademacher_block(key: int, count: int, start: int = 0) -> np.ndarray:
    """+-1 draws at indices [start, start+count)."""
    if count <= 0:
        return np.empty(0)
    lo, hi = start >> 2, (start + count - 1) >> 2
    words = philox4x32(key, np.arange(lo, hi + 1, dtype=np.uint64))
    out = np.empty(4 * (hi - lo + 1))
    for slot in range(4):
        out[slot::4] = 2.0 * (words[slot] & np.uint64(1)).astype(np.float64) - 1.0
    return out[start - 4 * lo:start - 4 * lo + count]


def uniform_sym_block(key: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform draws on [-sqrt(3), sqrt(3)] at indices [start, start+count)."""
    if count <= 0:
        return np.empty(0)
    lo, hi = start >> 1, (start + count - 1) >> 1
    u1, u2 = _uniform_pair(key, np.arange(lo, hi + 1, dtype=np.uint64))
    out = np.empty(2 * (hi - lo + 1))
    out[0::2] = (2.0 * u1 - 1.0) * _SQRT3
    out[1::2] = (2.0 * u2 - 1.0) * _SQRT3
    return out[start - 2 * lo:start - 2 * lo + count]


_BLOCK_FN = {
    "gaussian": gaussian_block,
    "rademacher": rademacher_block,
    "uniform": uniform_sym_block,
}


def variates_block(dist_name: str, key: int, count: int, start: int = 0) -> np.ndarray:
    """Contiguous block of variates; optimal quad sharing."""
    return _BLOCK_FN[dist_name](key, count, start)


def variates_at(dist_name: str, key: int, indices: np.ndarray) -> np.ndarray:
    """Variates at arbitrary indices (pure counter addressing)."""
    idx = np.asarray(indices, dtype=np.uint64)
    if dist_name == "gaussian":
        z0, z1 = _normal_pair(key, idx >> np.uint64(1))
        return np.where((idx & np.uint64(1)) == 0, z0, z1)
    if dist_name == "uniform":
        u1, u2 = _uniform_pair(key, idx >> np.uint64(1))
        u = np.where((idx & np.uint64(1)) == 0, u1, u2)
        return (2.0 * u - 1.0) * _SQRT3
    if dist_name == "rademacher":
        words = philox4x32(key, idx >> np.uint64(2))
        slot = (idx & np.uint64(3)).astype(np.int64)
        stacked = np.stack([w & np.uint64(1) for w in words])
        bits = stacked[slot, np.arange(len(idx))]
        return 2.0 * bits.astype(np.float64) - 1.0
    raise ValueError(f"unknown distribution {dist_name!r}")
