"""Scripted baseline policies acting on structured observations.

Policies are deterministic given (observations, reset seed), stateless
between episodes after reset, and span the evaluation categories: survival
(forage), combat (warrior), item/market (marketeer), plus random/noop/cycle
reference policies.
"""

from __future__ import annotations

import numpy as np

from .config import ConfigError
from .core import Action, CombatStyle, Direction
from .mapgen import TerrainKind
from .observe import Observation

_TERRAIN_DENOM = len(TerrainKind) - 1

# Default per-style attack ranges; mirror the EnvConfig defaults.
STYLE_RANGES = (1, 3, 4)


def _crop_codes(obs: Observation) -> np.ndarray:
    """Terrain codes recovered from the scaled tile channel."""
    return np.rint(obs.tiles[0] * _TERRAIN_DENOM).astype(np.int64)


def _step_toward(d_row: int, d_col: int) -> Action:
    if abs(d_row) >= abs(d_col) and d_row != 0:
        return Action.move(Direction.S if d_row > 0 else Direction.N)
    if d_col != 0:
        return Action.move(Direction.E if d_col > 0 else Direction.W)
    return Action.noop()


def _nearest_tile(obs: Observation, wanted: TerrainKind, need_resource: bool) -> tuple[int, int] | None:
    """Offset (d_row, d_col) of the nearest visible tile of the wanted kind."""
    codes = _crop_codes(obs)
    radius = (codes.shape[0] - 1) // 2
    candidates = (codes == int(wanted)) & obs.tile_mask
    if need_resource:
        candidates &= obs.tiles[1] > 0.0
    rows, cols = np.nonzero(candidates)
    if rows.size == 0:
        return None
    d_rows = rows - radius
    d_cols = cols - radius
    dist = np.maximum(np.abs(d_rows), np.abs(d_cols))
    best = np.lexsort((d_cols, d_rows, dist))[0]
    return int(d_rows[best]), int(d_cols[best])


class Policy:
    name = "base"

    def __init__(self, allow_giving: bool = True) -> None:
        self.rng = np.random.default_rng(0)
        self.allow_giving = allow_giving

    def reset(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    def act(self, observations: dict[int, Observation]) -> dict[int, Action]:
        """One action per observed agent; ids are visited in sorted order so
        RNG consumption is reproducible."""
        return {aid: self.act_one(observations[aid]) for aid in sorted(observations)}

    def act_one(self, obs: Observation) -> Action:
        raise NotImplementedError


class NoopPolicy(Policy):
    name = "noop"

    def act_one(self, obs: Observation) -> Action:
        return Action.noop()


class CyclePolicy(Policy):
    """Move((tick + agent_id) mod 4): trivially replicable on both sides of
    the bindings boundary, used for cross-boundary parity checks."""

    name = "cycle"

    def act_one(self, obs: Observation) -> Action:
        return Action.move((obs.tick + obs.agent_id) % 4)


class RandomPolicy(Policy):
    name = "random"

    def act_one(self, obs: Observation) -> Action:
        roll = float(self.rng.random())
        if roll < 0.70:
            return Action.move(int(self.rng.integers(0, 4)))
        if roll < 0.80:
            return Action.noop()
        if roll < 0.90:
            if obs.entity_mask.any():
                return Action.attack(int(self.rng.integers(0, 3)), 0)
            return Action.move(int(self.rng.integers(0, 4)))
        if roll < 0.95 and obs.inventory_mask.any():
            return Action.use(0)
        if self.allow_giving and obs.entity_mask.any():
            # Occasional 1-gold gift; resolution turns invalid targets into Noop.
            return Action.give_gold(1, 0)
        return Action.noop()


class ForagePolicy(Policy):
    """Seek food below 30, then water below 30, otherwise wander."""

    name = "forage"
    food_threshold = 0.30
    water_threshold = 0.30

    def act_one(self, obs: Observation) -> Action:
        forage = self._forage_action(obs)
        if forage is not None:
            return forage
        return Action.move(int(self.rng.integers(0, 4)))

    def _forage_action(self, obs: Observation) -> Action | None:
        food = float(obs.self_stats[1])
        water = float(obs.self_stats[2])
        if food < self.food_threshold:
            target = _nearest_tile(obs, TerrainKind.FOREST, need_resource=True)
            if target is not None:
                if target == (0, 0):
                    return Action.noop()  # standing on it; eating is automatic
                return _step_toward(*target)
        if water < self.water_threshold:
            target = _nearest_tile(obs, TerrainKind.WATER, need_resource=False)
            if target is not None:
                if max(abs(target[0]), abs(target[1])) <= 1:
                    return Action.noop()  # adjacent; drinking is automatic
                return _step_toward(*target)
        return None


class WarriorPolicy(ForagePolicy):
    """Forage for upkeep, attack the weakest non-immune entity in range."""

    name = "warrior"

    def act_one(self, obs: Observation) -> Action:
        attack = self._attack_action(obs)
        if attack is not None:
            return attack
        return super().act_one(obs)

    def _attack_action(self, obs: Observation) -> Action | None:
        if not obs.entity_mask.any():
            return None
        radius = (obs.tiles.shape[1] - 1) // 2
        rows = np.nonzero(obs.entity_mask)[0]
        best_slot = -1
        best_key = (2.0, 0.0)
        best_dist = 0
        for slot in rows:
            features = obs.entities[slot]
            if features[5] > 0.5:
                continue  # spawn immunity
            d_row = int(round(features[0] * 2 * radius - radius))
            d_col = int(round(features[1] * 2 * radius - radius))
            dist = max(abs(d_row), abs(d_col))
            if dist > max(STYLE_RANGES):
                continue
            key = (float(features[2]), float(slot))
            if key < best_key:
                best_key = key
                best_slot = int(slot)
                best_dist = dist
        if best_slot < 0:
            return None
        for style in (CombatStyle.MELEE, CombatStyle.RANGED, CombatStyle.MAGIC):
            if best_dist <= STYLE_RANGES[int(style)]:
                return Action.attack(style, best_slot)
        return None


class MarketeerPolicy(Policy):
    """Harvest ore, list surplus gear, buy cheap consumables."""

    name = "marketeer"
    surplus_threshold = 6

    def act_one(self, obs: Observation) -> Action:
        inventory_rows = int(obs.inventory_mask.sum())

        # Sell the last unequipped stack once inventory runs long.
        if inventory_rows > self.surplus_threshold:
            for slot in range(inventory_rows - 1, -1, -1):
                row = obs.inventory[slot]
                if row[4] < 0.5:  # not equipped
                    tier = int(round(row[2] * 10))
                    return Action.sell(slot, 1 + tier)

        # Buy the cheapest visible consumable we can afford.
        gold = float(obs.self_stats[3])
        if obs.market_mask.any():
            for slot in np.nonzero(obs.market_mask)[0]:
                row = obs.market[slot]
                kind = int(round(row[0] * 4))
                price = row[3] * 256.0
                if kind in (3, 4) and gold * 256.0 >= price and inventory_rows < obs.inventory.shape[0]:
                    return Action.buy(int(slot))

        target = _nearest_tile(obs, TerrainKind.ORE, need_resource=True)
        if target is not None and target != (0, 0):
            return _step_toward(*target)
        if target == (0, 0):
            return Action.noop()  # harvesting is automatic
        return Action.move(int(self.rng.integers(0, 4)))


POLICY_REGISTRY = {
    cls.name: cls
    for cls in (NoopPolicy, CyclePolicy, RandomPolicy, ForagePolicy, WarriorPolicy, MarketeerPolicy)
}


def make_policy(name: str, allow_giving: bool = True) -> Policy:
    try:
        return POLICY_REGISTRY[name](allow_giving=allow_giving)
    except KeyError:
        raise ConfigError(f"unknown policy {name!r}; choose from {sorted(POLICY_REGISTRY)}") from None
