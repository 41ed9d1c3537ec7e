"""Structured per-agent observations with validity masks.

Every fixed-capacity block carries a mask; masked rows are all-zero and all
continuous features are scaled into [0, 1]. The task embedding rides along
unscaled (it is unit-norm by contract).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .mapgen import TerrainKind

if TYPE_CHECKING:
    from .world import WorldState

ENTITY_FEATURES = 8
INVENTORY_FEATURES = 5
MARKET_FEATURES = 5
SELF_FEATURES = 13

_TERRAIN_SCALE = 1.0 / (len(TerrainKind) - 1)
_RESOURCE_SCALE = 1.0 / 5.0
_GOLD_SCALE = 1.0 / 256.0
_PRICE_SCALE = 1.0 / 256.0
_QUANTITY_SCALE = 1.0 / 64.0


@dataclass
class Observation:
    agent_id: int
    tick: int
    tiles: np.ndarray  # (2, 2R+1, 2R+1) float32: terrain code, resource units
    tile_mask: np.ndarray  # (2R+1, 2R+1) bool; False outside the map
    entities: np.ndarray  # (entity_cap, ENTITY_FEATURES) float32
    entity_mask: np.ndarray  # (entity_cap,) bool
    entity_ids: np.ndarray  # (entity_cap,) int64; -1 on masked rows
    inventory: np.ndarray  # (inventory_capacity, INVENTORY_FEATURES) float32
    inventory_mask: np.ndarray
    market: np.ndarray  # (market_top_k, MARKET_FEATURES) float32
    market_mask: np.ndarray
    market_ids: np.ndarray  # (market_top_k,) int64; -1 on masked rows
    self_stats: np.ndarray  # (SELF_FEATURES,) float32
    task_embedding: np.ndarray  # (dim,) float64, unit norm

    def flat_blocks(self) -> list[tuple[str, np.ndarray]]:
        """Field-ordered blocks; this order is the wire layout contract."""
        return [
            ("tiles", self.tiles),
            ("tile_mask", self.tile_mask),
            ("entities", self.entities),
            ("entity_mask", self.entity_mask),
            ("entity_ids", self.entity_ids),
            ("inventory", self.inventory),
            ("inventory_mask", self.inventory_mask),
            ("market", self.market),
            ("market_mask", self.market_mask),
            ("market_ids", self.market_ids),
            ("self_stats", self.self_stats),
            ("task_embedding", self.task_embedding),
        ]


def terminal_observation(world: "WorldState", agent_id: int) -> Observation:
    """All-zero observation with empty masks, handed to dead agents."""
    cfg = world.config
    span = 2 * cfg.vision_radius + 1
    dim = world.task_embeddings[agent_id].shape[0]
    return Observation(
        agent_id=agent_id,
        tick=world.tick,
        tiles=np.zeros((2, span, span), dtype=np.float32),
        tile_mask=np.zeros((span, span), dtype=bool),
        entities=np.zeros((cfg.entity_cap, ENTITY_FEATURES), dtype=np.float32),
        entity_mask=np.zeros(cfg.entity_cap, dtype=bool),
        entity_ids=np.full(cfg.entity_cap, -1, dtype=np.int64),
        inventory=np.zeros((cfg.inventory_capacity, INVENTORY_FEATURES), dtype=np.float32),
        inventory_mask=np.zeros(cfg.inventory_capacity, dtype=bool),
        market=np.zeros((cfg.market_top_k, MARKET_FEATURES), dtype=np.float32),
        market_mask=np.zeros(cfg.market_top_k, dtype=bool),
        market_ids=np.full(cfg.market_top_k, -1, dtype=np.int64),
        self_stats=np.zeros(SELF_FEATURES, dtype=np.float32),
        task_embedding=np.zeros(dim, dtype=np.float64),
    )


def _style_code(style: int) -> float:
    return (style + 1) / 3.0


def build_observations(world: "WorldState", agent_ids: list[int]) -> dict[int, Observation]:
    """Observations for the given agents; dead ones get terminal observations."""
    cfg = world.config
    radius = cfg.vision_radius
    span = 2 * radius + 1
    size = world.grid.size

    out: dict[int, Observation] = {}
    observers = [a for a in agent_ids if world.agents[a].alive]
    dead = [a for a in agent_ids if not world.agents[a].alive]
    for agent_id in dead:
        out[agent_id] = terminal_observation(world, agent_id)
        world.agents[agent_id].last_entity_ids = []
        world.agents[agent_id].last_market_ids = []
    if not observers:
        return out

    # --- entity union arrays (living agents + living NPCs) ---
    live_agents = [a for a in world.agents if a.alive]
    live_npcs = [n for n in world.npcs if n.alive]
    n_entities = len(live_agents) + len(live_npcs)
    positions = np.empty((n_entities, 2), dtype=np.int64)
    ids = np.empty(n_entities, dtype=np.int64)
    feats = np.zeros((n_entities, ENTITY_FEATURES), dtype=np.float32)
    index_of: dict[int, int] = {}
    for i, agent in enumerate(live_agents):
        positions[i] = (agent.row, agent.col)
        ids[i] = agent.id
        index_of[agent.id] = i
        feats[i, 2] = agent.health / 100.0
        feats[i, 3] = max(agent.skills.levels()) / 10.0
        feats[i, 4] = _style_code(int(agent.active_style()))
        feats[i, 5] = 1.0 if agent.spawn_immunity_remaining > 0 else 0.0
    base = len(live_agents)
    for j, npc in enumerate(live_npcs):
        i = base + j
        positions[i] = (npc.row, npc.col)
        ids[i] = npc.id
        feats[i, 2] = npc.health / 100.0
        feats[i, 3] = npc.level / 10.0
        feats[i, 4] = _style_code(int(npc.style))
        feats[i, 6] = 1.0
        feats[i, 7] = int(npc.disposition) / 2.0

    observer_idx = np.array([index_of[a] for a in observers], dtype=np.int64)
    scan_idx, scan_counts = kernels.entity_scan(positions, ids, observer_idx, radius, cfg.entity_cap)

    # --- tile crops (3rd channel marks in-map cells for the mask) ---
    padded = np.zeros((3, size + 2 * radius, size + 2 * radius), dtype=np.float32)
    padded[0, radius : radius + size, radius : radius + size] = (
        world.grid.terrain.astype(np.float32) * _TERRAIN_SCALE
    )
    padded[1, radius : radius + size, radius : radius + size] = np.minimum(
        world.resources.astype(np.float32) * _RESOURCE_SCALE, 1.0
    )
    padded[2, radius : radius + size, radius : radius + size] = 1.0
    centers = positions[observer_idx]
    crops = kernels.crop_batch(padded, centers, radius)

    # --- market snapshot: top-K cheapest, ties by listing id (global view) ---
    listings = sorted(world.market.values(), key=lambda l: (l.price, l.listing_id))[: cfg.market_top_k]
    market = np.zeros((cfg.market_top_k, MARKET_FEATURES), dtype=np.float32)
    market_mask = np.zeros(cfg.market_top_k, dtype=bool)
    market_ids = np.full(cfg.market_top_k, -1, dtype=np.int64)
    for row, listing in enumerate(listings):
        item = listing.item
        market[row, 0] = int(item.kind) / 4.0
        market[row, 1] = _style_code(int(item.style)) if item.style is not None else 0.0
        market[row, 2] = item.tier / 10.0
        market[row, 3] = min(1.0, listing.price * _PRICE_SCALE)
        market[row, 4] = min(1.0, item.quantity * _QUANTITY_SCALE)
        market_mask[row] = True
        market_ids[row] = listing.listing_id
    market_id_list = [int(l.listing_id) for l in listings]

    max_level = max(1, cfg.spawn_immunity_ticks)
    for o, agent_id in enumerate(observers):
        agent = world.agents[agent_id]
        count = int(scan_counts[o])
        rows = scan_idx[o, :count]
        entities = np.zeros((cfg.entity_cap, ENTITY_FEATURES), dtype=np.float32)
        entity_mask = np.zeros(cfg.entity_cap, dtype=bool)
        entity_ids = np.full(cfg.entity_cap, -1, dtype=np.int64)
        if count:
            entities[:count] = feats[rows]
            entities[:count, 0] = (positions[rows, 0] - agent.row + radius) / (2.0 * radius)
            entities[:count, 1] = (positions[rows, 1] - agent.col + radius) / (2.0 * radius)
            entity_mask[:count] = True
            entity_ids[:count] = ids[rows]

        inventory = np.zeros((cfg.inventory_capacity, INVENTORY_FEATURES), dtype=np.float32)
        inventory_mask = np.zeros(cfg.inventory_capacity, dtype=bool)
        for slot, item in enumerate(agent.inventory[: cfg.inventory_capacity]):
            inventory[slot, 0] = int(item.kind) / 4.0
            inventory[slot, 1] = _style_code(int(item.style)) if item.style is not None else 0.0
            inventory[slot, 2] = item.tier / 10.0
            inventory[slot, 3] = min(1.0, item.quantity * _QUANTITY_SCALE)
            inventory[slot, 4] = 1.0 if item.equipped else 0.0
            inventory_mask[slot] = True

        levels = agent.skills.levels()
        self_stats = np.array(
            [
                agent.health / 100.0,
                agent.food / 100.0,
                agent.water / 100.0,
                min(1.0, agent.gold * _GOLD_SCALE),
                levels[0] / 10.0,
                levels[1] / 10.0,
                levels[2] / 10.0,
                levels[3] / 10.0,
                agent.row / (size - 1),
                agent.col / (size - 1),
                min(1.0, agent.spawn_immunity_remaining / max_level),
                min(1.0, agent.lifespan / cfg.max_ticks),
                min(1.0, world.tick / cfg.max_ticks),
            ],
            dtype=np.float32,
        )

        out[agent_id] = Observation(
            agent_id=agent_id,
            tick=world.tick,
            tiles=crops[o, :2],
            tile_mask=crops[o, 2] > 0.5,
            entities=entities,
            entity_mask=entity_mask,
            entity_ids=entity_ids,
            inventory=inventory,
            inventory_mask=inventory_mask,
            market=market.copy(),
            market_mask=market_mask.copy(),
            market_ids=market_ids.copy(),
            self_stats=self_stats,
            task_embedding=world.task_embeddings[agent_id],
        )
        agent.last_entity_ids = [int(e) for e in ids[rows]]
        agent.last_market_ids = list(market_id_list)
    return out
