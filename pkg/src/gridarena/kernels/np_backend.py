"""Pure-numpy implementations of the hot kernels.

Every function here must stay bit-identical to its numba twin in
``nb_backend``: same arithmetic, same operation order, same dtypes.
The cross-backend equality tests enforce this.
"""

from __future__ import annotations

import numpy as np

# splitmix64-style mixing constants (uint64 wraparound arithmetic).
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


def mix64(h):
    """splitmix64 finalizer; h is uint64 (scalar or array). Overflow wraps."""
    with np.errstate(over="ignore"):
        h = (h ^ (h >> _S30)) * _M2
        h = (h ^ (h >> _S27)) * _M3
        return h ^ (h >> _S31)


def hash_coords(x, y, seed):
    """Hash integer lattice coordinates with a seed into uint64."""
    with np.errstate(over="ignore"):
        return mix64(seed + x * _X + y * _Y + _M1)


def _rand01(h):
    # Top 53 bits -> [0, 1); exact in float64.
    return (h >> _S11).astype(np.float64) * _INV53


def noise_field(seed: int, size: int, cell: int, octaves: int) -> np.ndarray:
    """Fractal value noise on a size x size grid, in [0, 1).

    Lattice values come from hash_coords; bilinear interpolation with a
    smoothstep fade. Octave o halves the cell size and the amplitude.
    """
    out = np.zeros((size, size), dtype=np.float64)
    total_amp = 0.0
    amp = 1.0
    rows = np.arange(size, dtype=np.int64)[:, None]
    cols = np.arange(size, dtype=np.int64)[None, :]
    for octave in range(octaves):
        c = cell >> octave
        if c < 1:
            c = 1
        with np.errstate(over="ignore"):
            oseed = mix64(np.uint64(seed) + np.uint64(octave) * _M3)
        i0 = (rows // c).astype(np.uint64)
        j0 = (cols // c).astype(np.uint64)
        fy = (rows % c).astype(np.float64) / float(c)
        fx = (cols % c).astype(np.float64) / float(c)
        one = np.uint64(1)
        v00 = _rand01(hash_coords(j0, i0, oseed))
        v10 = _rand01(hash_coords(j0 + one, i0, oseed))
        v01 = _rand01(hash_coords(j0, i0 + one, oseed))
        v11 = _rand01(hash_coords(j0 + one, i0 + one, oseed))
        sx = fx * fx * (3.0 - 2.0 * fx)
        sy = fy * fy * (3.0 - 2.0 * fy)
        top = v00 + (v10 - v00) * sx
        bot = v01 + (v11 - v01) * sx
        out += (top + (bot - top) * sy) * amp
        total_amp += amp
        amp *= 0.5
    return out / total_amp


def entity_scan(
    positions: np.ndarray,
    ids: np.ndarray,
    observer_idx: np.ndarray,
    radius: int,
    cap: int,
) -> tuple[np.ndarray, np.ndarray]:
    """For each observer, the nearest entities by (Chebyshev distance, id).

    positions: (E, 2) int64; ids: (E,) int64 globally unique;
    observer_idx: (A,) indices into the entity arrays (excluded from their
    own scan). Returns (A, cap) int64 entity indices (-1 padding) and (A,)
    counts.
    """
    n_obs = observer_idx.shape[0]
    out = np.full((n_obs, cap), -1, dtype=np.int64)
    counts = np.zeros(n_obs, dtype=np.int64)
    for o in range(n_obs):
        self_i = observer_idx[o]
        dr = np.abs(positions[:, 0] - positions[self_i, 0])
        dc = np.abs(positions[:, 1] - positions[self_i, 1])
        dist = np.maximum(dr, dc)
        cand = np.nonzero(dist <= radius)[0]
        cand = cand[cand != self_i]
        if cand.size == 0:
            continue
        order = np.lexsort((ids[cand], dist[cand]))
        take = min(cap, cand.size)
        out[o, :take] = cand[order[:take]]
        counts[o] = take
    return out, counts


def crop_batch(padded: np.ndarray, centers: np.ndarray, radius: int) -> np.ndarray:
    """Gather (2R+1)^2 windows for each center from an R-padded channel map.

    padded: (C, size+2R, size+2R); centers: (A, 2) map coordinates.
    """
    n = centers.shape[0]
    channels = padded.shape[0]
    span = 2 * radius + 1
    out = np.empty((n, channels, span, span), dtype=padded.dtype)
    for a in range(n):
        r, c = centers[a, 0], centers[a, 1]
        out[a] = padded[:, r : r + span, c : c + span]
    return out
