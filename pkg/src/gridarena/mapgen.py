"""Procedural map generation: seeded value noise thresholded into terrain."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import kernels
from .config import ConfigError


class TerrainKind(IntEnum):
    WATER = 0
    GRASS = 1
    FOREST = 2
    STONE = 3
    ORE = 4
    SPAWN = 5


# Interior rank fractions (lowest noise first). Remainder is grass.
_WATER_FRAC = 0.12
_FOREST_FRAC = 0.14
_ORE_FRAC = 0.05
_STONE_FRAC = 0.06

FOREST_RESOURCE_CAP = 5
ORE_RESOURCE_CAP = 3

PASSABLE = np.array(
    [kind not in (TerrainKind.WATER, TerrainKind.STONE) for kind in TerrainKind],
    dtype=bool,
)


@dataclass
class MapGrid:
    size: int
    seed: int
    terrain: np.ndarray  # (size, size) uint8 of TerrainKind codes
    resources: np.ndarray  # (size, size) int32 units remaining
    spawn_tiles: list[tuple[int, int]] = field(default_factory=list)

    def passable(self, row: int, col: int) -> bool:
        if not (0 <= row < self.size and 0 <= col < self.size):
            return False
        return bool(PASSABLE[self.terrain[row, col]])

    def counts(self) -> dict[TerrainKind, int]:
        values, freq = np.unique(self.terrain, return_counts=True)
        return {TerrainKind(int(v)): int(f) for v, f in zip(values, freq)}


def resource_cap(kind: int) -> int:
    if kind == TerrainKind.FOREST:
        return FOREST_RESOURCE_CAP
    if kind == TerrainKind.ORE:
        return ORE_RESOURCE_CAP
    return 0


def generate_map(seed: int, size: int) -> MapGrid:
    """Generate a terrain grid; pure function of (seed, size).

    Layout: water border, spawn ring just inside it, interior assigned by
    noise rank so each terrain class clusters spatially.
    """
    if size < 16:
        raise ConfigError(f"map size must be >= 16, got {size}")

    cell = max(4, size // 8)
    noise = kernels.noise_field(seed, size, cell, 4)

    terrain = np.full((size, size), int(TerrainKind.GRASS), dtype=np.uint8)

    interior = np.ones((size, size), dtype=bool)
    interior[0, :] = interior[-1, :] = False
    interior[:, 0] = interior[:, -1] = False
    ring = interior.copy()
    ring[2:-2, 2:-2] = False
    inner = interior & ~ring

    flat_idx = np.flatnonzero(inner.ravel())
    order = flat_idx[np.argsort(noise.ravel()[flat_idx], kind="stable")]
    n = order.size
    bounds = np.cumsum(
        [int(n * _WATER_FRAC), int(n * _FOREST_FRAC), int(n * _ORE_FRAC), int(n * _STONE_FRAC)]
    )
    flat = terrain.ravel()
    flat[order[: bounds[0]]] = int(TerrainKind.WATER)
    flat[order[bounds[0] : bounds[1]]] = int(TerrainKind.FOREST)
    flat[order[bounds[1] : bounds[2]]] = int(TerrainKind.ORE)
    flat[order[bounds[2] : bounds[3]]] = int(TerrainKind.STONE)

    terrain[0, :] = terrain[-1, :] = int(TerrainKind.WATER)
    terrain[:, 0] = terrain[:, -1] = int(TerrainKind.WATER)
    terrain[ring] = int(TerrainKind.SPAWN)

    resources = np.zeros((size, size), dtype=np.int32)
    resources[terrain == TerrainKind.FOREST] = FOREST_RESOURCE_CAP
    resources[terrain == TerrainKind.ORE] = ORE_RESOURCE_CAP

    rows, cols = np.nonzero(terrain == TerrainKind.SPAWN)
    spawn_tiles = [(int(r), int(c)) for r, c in zip(rows, cols)]

    return MapGrid(size=size, seed=seed, terrain=terrain, resources=resources, spawn_tiles=spawn_tiles)
