"""numba @njit implementations of the hot kernels.

Arithmetic mirrors ``np_backend`` expression-for-expression so both
backends produce bit-identical outputs (no fastmath, no parallel
reductions).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xBF58476D1CE4E5B9)
_M3 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_X = np.uint64(0x9E3779B97F4A7C15)
_Y = np.uint64(0xC2B2AE3D27D4EB4F)
_INV53 = 1.0 / float(1 << 53)


@njit(cache=True)
def _mix64(h):
    h = (h ^ (h >> _S30)) * _M2
    h = (h ^ (h >> _S27)) * _M3
    return h ^ (h >> _S31)


@njit(cache=True)
def _hash_coords(x, y, seed):
    return _mix64(seed + x * _X + y * _Y + _M1)


@njit(cache=True)
def _rand01(h):
    return np.float64(h >> _S11) * _INV53


@njit(cache=True)
def noise_field(seed: int, size: int, cell: int, octaves: int) -> np.ndarray:
    out = np.zeros((size, size), dtype=np.float64)
    total_amp = 0.0
    amp = 1.0
    for octave in range(octaves):
        c = cell >> octave
        if c < 1:
            c = 1
        oseed = _mix64(np.uint64(seed) + np.uint64(octave) * _M3)
        one = np.uint64(1)
        for r in range(size):
            i0 = np.uint64(r // c)
            fy = np.float64(r % c) / np.float64(c)
            sy = fy * fy * (3.0 - 2.0 * fy)
            for col in range(size):
                j0 = np.uint64(col // c)
                fx = np.float64(col % c) / np.float64(c)
                v00 = _rand01(_hash_coords(j0, i0, oseed))
                v10 = _rand01(_hash_coords(j0 + one, i0, oseed))
                v01 = _rand01(_hash_coords(j0, i0 + one, oseed))
                v11 = _rand01(_hash_coords(j0 + one, i0 + one, oseed))
                sx = fx * fx * (3.0 - 2.0 * fx)
                top = v00 + (v10 - v00) * sx
                bot = v01 + (v11 - v01) * sx
                out[r, col] += (top + (bot - top) * sy) * amp
        total_amp += amp
        amp *= 0.5
    for r in range(size):
        for col in range(size):
            out[r, col] /= total_amp
    return out


@njit(cache=True)
def entity_scan(
    positions: np.ndarray,
    ids: np.ndarray,
    observer_idx: np.ndarray,
    radius: int,
    cap: int,
) -> tuple[np.ndarray, np.ndarray]:
    n_obs = observer_idx.shape[0]
    n_ent = positions.shape[0]
    out = np.full((n_obs, cap), -1, dtype=np.int64)
    counts = np.zeros(n_obs, dtype=np.int64)
    # Insertion buffers keyed by (dist, id); total order since ids are unique.
    buf_dist = np.empty(cap, dtype=np.int64)
    buf_id = np.empty(cap, dtype=np.int64)
    buf_idx = np.empty(cap, dtype=np.int64)
    for o in range(n_obs):
        self_i = observer_idx[o]
        orow = positions[self_i, 0]
        ocol = positions[self_i, 1]
        n = 0
        for j in range(n_ent):
            if j == self_i:
                continue
            dr = positions[j, 0] - orow
            if dr < 0:
                dr = -dr
            dc = positions[j, 1] - ocol
            if dc < 0:
                dc = -dc
            d = dr if dr > dc else dc
            if d > radius:
                continue
            eid = ids[j]
            if n == cap and (d > buf_dist[n - 1] or (d == buf_dist[n - 1] and eid > buf_id[n - 1])):
                continue
            pos = n if n < cap else cap - 1
            while pos > 0 and (buf_dist[pos - 1] > d or (buf_dist[pos - 1] == d and buf_id[pos - 1] > eid)):
                buf_dist[pos] = buf_dist[pos - 1]
                buf_id[pos] = buf_id[pos - 1]
                buf_idx[pos] = buf_idx[pos - 1]
                pos -= 1
            buf_dist[pos] = d
            buf_id[pos] = eid
            buf_idx[pos] = j
            if n < cap:
                n += 1
        for k in range(n):
            out[o, k] = buf_idx[k]
        counts[o] = n
    return out, counts


@njit(cache=True)
def crop_batch(padded: np.ndarray, centers: np.ndarray, radius: int) -> np.ndarray:
    n = centers.shape[0]
    channels = padded.shape[0]
    span = 2 * radius + 1
    out = np.empty((n, channels, span, span), dtype=padded.dtype)
    for a in range(n):
        r0 = centers[a, 0]
        c0 = centers[a, 1]
        for ch in range(channels):
            for r in range(span):
                for c in range(span):
                    out[a, ch, r, c] = padded[ch, r0 + r, c0 + c]
    return out
