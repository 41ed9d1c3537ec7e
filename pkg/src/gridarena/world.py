"""Deterministic tick-based simulation of the survival arena.

Phase order within a tick is fixed: action validation -> movement -> combat
-> item/market -> metabolism -> NPC AI -> death resolution -> event emission
-> task-progress update. Illegal per-agent actions never raise; each becomes
a Noop and bumps the diagnostics tally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, EnvConfig
from .core import (
    DIRECTION_DELTAS,
    EQUIPPABLE_KINDS,
    ITEM_KIND_NAMES,
    Action,
    ActionKind,
    AgentState,
    CombatStyle,
    Direction,
    Disposition,
    EventKind,
    GameEvent,
    Item,
    ItemKind,
    MarketListing,
    NpcState,
)
from .embedding import DEFAULT_DIM, embed_task
from .mapgen import MapGrid, TerrainKind, resource_cap
from .observe import Observation, build_observations
from .rewards import TickDelta
from .tasks import TaskAssignment

NPC_SIGHT_RADIUS = 5

# Ore harvest draw: cumulative probabilities over item kinds.
_ORE_TABLE = (
    (0.40, ItemKind.RATION),
    (0.60, ItemKind.POULTICE),
    (0.75, ItemKind.AMMO),
    (0.90, ItemKind.WEAPON),
    (1.00, ItemKind.ARMOR),
)


@dataclass
class StepResult:
    observations: dict[int, Observation]
    events: list[GameEvent]
    deaths: list[int]
    done: bool
    deltas: dict[int, TickDelta]
    illegal_actions: int


def _chebyshev(a_row: int, a_col: int, b_row: int, b_col: int) -> int:
    return max(abs(a_row - b_row), abs(a_col - b_col))


def advantage(style: CombatStyle, defender_style: CombatStyle, config: EnvConfig) -> float:
    if style.beats() == defender_style:
        return config.advantage_multiplier
    if style.loses_to() == defender_style:
        return config.disadvantage_multiplier
    return 1.0


def combat_damage(
    attacker_level: int,
    tier: int,
    style: CombatStyle,
    defender_style: CombatStyle,
    defender_defense: int,
    defender_immune: bool,
    config: EnvConfig,
) -> int:
    """round(base * advantage - defense), clamped at 0; immunity blocks all."""
    if defender_immune:
        return 0
    base = (
        config.base_damage_const
        + config.base_damage_per_level * attacker_level
        + config.base_damage_per_tier * tier
    )
    raw = round(base * advantage(style, defender_style, config) - defender_defense)
    return max(0, int(raw))


def resolve_combat(
    attacker: AgentState | NpcState,
    defender: AgentState | NpcState,
    style: CombatStyle,
    config: EnvConfig,
    tier: int | None = None,
) -> int:
    """Damage of one attack; pure query (no ammo consumption, no mutation)."""
    if isinstance(attacker, AgentState):
        level = attacker.skills.level(int(style))
        if tier is None:
            weapon = attacker.equipped(ItemKind.WEAPON)
            tier = weapon.tier if weapon is not None and weapon.style == style else 0
    else:
        level = attacker.level
        tier = 0 if tier is None else tier
    if isinstance(defender, AgentState):
        defender_style = defender.active_style()
        defense = defender.defense(config.defense_per_armor_tier)
        immune = defender.spawn_immunity_remaining > 0
    else:
        defender_style = defender.style
        defense = 0
        immune = False
    return combat_damage(level, tier, style, defender_style, defense, immune, config)


def style_range(style: CombatStyle, config: EnvConfig) -> int:
    if style == CombatStyle.MELEE:
        return config.melee_range
    if style == CombatStyle.RANGED:
        return config.ranged_range
    return config.magic_range


class WorldState:
    """One episode's full mutable state; single-threaded by contract."""

    def __init__(
        self,
        config: EnvConfig,
        grid: MapGrid,
        assignments: list[TaskAssignment],
        seed: int,
        spawn_slots: list[int] | None = None,
        group_ids: list[int] | None = None,
        embedding_dim: int = DEFAULT_DIM,
    ):
        if len(assignments) != config.num_agents:
            raise ConfigError(
                f"expected {config.num_agents} task assignments, got {len(assignments)}"
            )
        if sorted(a.agent_id for a in assignments) != list(range(config.num_agents)):
            raise ConfigError("assignments must cover agent ids 0..num_agents-1 exactly once")
        if len(grid.spawn_tiles) < config.num_agents:
            raise ConfigError(
                f"insufficient spawn tiles: {len(grid.spawn_tiles)} < {config.num_agents}"
            )
        if config.map_size != grid.size:
            raise ConfigError(f"config map_size {config.map_size} != grid size {grid.size}")
        if spawn_slots is not None:
            if len(spawn_slots) != config.num_agents or len(set(spawn_slots)) != len(spawn_slots):
                raise ConfigError("spawn_slots must be distinct, one per agent")

        self.config = config
        self.grid = grid
        self.resources = grid.resources.copy()
        self.seed = seed
        self.rng = np.random.default_rng(np.random.SeedSequence(entropy=seed & (2**64 - 1)))
        self.tick = 0
        self.done = False
        self.assignments = assignments
        self.event_log: list[GameEvent] = []
        self.tick_events: list[GameEvent] = []
        self.market: dict[int, MarketListing] = {}
        self.next_listing_id = 0
        self.next_item_uid = 0
        self.illegal_actions = 0
        self.illegal_by_kind: dict[str, int] = {}

        n = config.num_agents
        self.occupancy = np.full((grid.size, grid.size), -1, dtype=np.int64)

        # Task embeddings, cached per distinct source text.
        cache: dict[str, np.ndarray] = {}
        self.task_embeddings = {}
        for assignment in assignments:
            text = assignment.task.source_text
            if text not in cache:
                cache[text] = embed_task(text, embedding_dim)
            self.task_embeddings[assignment.agent_id] = cache[text]

        slots = spawn_slots or [i * len(grid.spawn_tiles) // n for i in range(n)]
        self.agents: list[AgentState] = []
        for i in range(n):
            row, col = grid.spawn_tiles[slots[i]]
            if config.immunity_mode == "randomized":
                immunity = int(self.rng.integers(0, config.spawn_immunity_ticks + 1))
            else:
                immunity = config.spawn_immunity_ticks
            agent = AgentState(
                id=i,
                row=row,
                col=col,
                group_id=group_ids[i] if group_ids else 0,
                gold=config.starting_gold,
                spawn_immunity_remaining=immunity,
            )
            self.agents.append(agent)
            self.occupancy[row, col] = i

        self.npcs: list[NpcState] = []
        for j in range(config.num_npcs):
            npc_id = n + j
            h = (npc_id * 2654435761) & 0xFFFFFFFF
            split = h % 10
            disposition = (
                Disposition.PASSIVE if split < 5 else Disposition.NEUTRAL if split < 8 else Disposition.HOSTILE
            )
            style = CombatStyle((h >> 4) % 3)
            level = 1 + (h >> 8) % 5
            row, col = self._free_tile()
            npc = NpcState(
                id=npc_id,
                row=row,
                col=col,
                disposition=disposition,
                style=style,
                level=level,
                health=40 + 10 * level,
            )
            self.npcs.append(npc)
            self.occupancy[row, col] = npc_id

        self._npc_by_id = {npc.id: npc for npc in self.npcs}
        self._new_event_types = [0] * n
        self._damage_inflicted = [0] * n
        self._hp_restored = [False] * n

    # ------------------------------------------------------------------ setup

    def _free_tile(self) -> tuple[int, int]:
        size = self.grid.size
        for _ in range(size * size * 4):
            row = int(self.rng.integers(1, size - 1))
            col = int(self.rng.integers(1, size - 1))
            if self.grid.passable(row, col) and self.occupancy[row, col] == -1:
                return row, col
        raise ConfigError("could not find a free tile for NPC placement")

    def living_agents(self) -> list[AgentState]:
        return [a for a in self.agents if a.alive]

    def total_gold(self) -> int:
        return sum(a.gold for a in self.agents)

    def entity_by_id(self, entity_id: int) -> AgentState | NpcState | None:
        if 0 <= entity_id < len(self.agents):
            return self.agents[entity_id]
        return self._npc_by_id.get(entity_id)

    # ------------------------------------------------------------------ events

    def _emit(self, agent_id: int, kind: EventKind, value: int | str | None = None) -> None:
        self.tick_events.append(GameEvent(self.tick, agent_id, kind, value))
        agent = self.agents[agent_id]
        agent.event_counts[kind] = agent.event_counts.get(kind, 0) + 1
        if kind is EventKind.HARVEST_ITEM:
            key = (kind, value)
            agent.event_counts[key] = agent.event_counts.get(key, 0) + 1
        if kind is EventKind.EARN_GOLD:
            agent.gold_earned += int(value)
        if kind not in agent.seen_event_kinds:
            agent.seen_event_kinds.add(kind)
            self._new_event_types[agent_id] += 1

    def _tally(self, reason: str) -> None:
        self.illegal_actions += 1
        self.illegal_by_kind[reason] = self.illegal_by_kind.get(reason, 0) + 1

    def _add_xp(self, agent: AgentState, skill: int, amount: int) -> None:
        from .core import SKILLS

        if agent.skills.add_xp(skill, amount):
            self._emit(agent.id, EventKind.LEVEL_UP, SKILLS[skill])

    # ------------------------------------------------------------------ step

    def step(self, actions: dict[int, Action]) -> StepResult:
        if self.done:
            raise RuntimeError("episode is done; call reset for a new one")

        n = len(self.agents)
        alive_at_start = [a.id for a in self.agents if a.alive]
        pre_hp = [a.health for a in self.agents]
        pre_gold = [a.gold for a in self.agents]
        pre_defense = [a.defense(self.config.defense_per_armor_tier) for a in self.agents]
        pre_max_xp = [max(a.skills.xp) for a in self.agents]
        self.tick_events = []
        self._new_event_types = [0] * n
        self._damage_inflicted = [0] * n
        self._hp_restored = [False] * n
        for agent_id in alive_at_start:
            self.agents[agent_id].lifespan += 1

        validated = self._validate_actions(actions)
        self._phase_move(validated)
        self._phase_combat(validated)
        self._phase_items_market(validated)
        self._phase_metabolism()
        self._phase_npc_ai()
        deaths = self._phase_deaths()
        self.event_log.extend(self.tick_events)

        deltas: dict[int, TickDelta] = {}
        for assignment in self.assignments:
            agent = self.agents[assignment.agent_id]
            progress_delta, completed_now = assignment.update(agent)
            if assignment.agent_id in deltas:
                continue
            if agent.id not in alive_at_start:
                continue
            deltas[agent.id] = TickDelta(
                hp_change=agent.health - pre_hp[agent.id],
                hp_restored=self._hp_restored[agent.id],
                gold_change=agent.gold - pre_gold[agent.id],
                defense_change=agent.defense(self.config.defense_per_armor_tier)
                - pre_defense[agent.id],
                max_xp_change=max(agent.skills.xp) - pre_max_xp[agent.id],
                damage_inflicted=self._damage_inflicted[agent.id],
                new_event_types=self._new_event_types[agent.id],
                progress_change=progress_delta,
                completed_now=completed_now,
                died=agent.id in deaths,
            )

        for agent in self.agents:
            if agent.alive and agent.spawn_immunity_remaining > 0:
                agent.spawn_immunity_remaining -= 1

        self.tick += 1
        living = sum(1 for a in self.agents if a.alive)
        self.done = self.tick >= self.config.max_ticks or living <= self.config.early_stop_agent_num

        observations = build_observations(self, alive_at_start)
        return StepResult(
            observations=observations,
            events=list(self.tick_events),
            deaths=deaths,
            done=self.done,
            deltas=deltas,
            illegal_actions=self.illegal_actions,
        )

    # ------------------------------------------------------------- validation

    def _validate_actions(self, actions: dict[int, Action]) -> dict[int, Action]:
        cfg = self.config
        validated: dict[int, Action] = {}
        for agent_id in sorted(actions):
            if not (0 <= agent_id < len(self.agents)) or not self.agents[agent_id].alive:
                continue  # extras for dead/unknown agents are ignored, not illegal
            action = actions[agent_id]
            kind = action.kind
            ok = True
            if kind == ActionKind.MOVE:
                ok = 0 <= action.a <= 3
            elif kind == ActionKind.ATTACK:
                ok = 0 <= action.a <= 2 and 0 <= action.b < cfg.entity_cap
            elif kind == ActionKind.USE:
                ok = 0 <= action.a < cfg.inventory_capacity
            elif kind == ActionKind.SELL:
                ok = 0 <= action.a < cfg.inventory_capacity and action.b >= 1
            elif kind == ActionKind.BUY:
                ok = 0 <= action.a < cfg.market_top_k
            elif kind in (ActionKind.GIVE_ITEM, ActionKind.GIVE_GOLD):
                if cfg.disable_giving:
                    ok = False
                elif kind == ActionKind.GIVE_ITEM:
                    ok = 0 <= action.a < cfg.inventory_capacity and 0 <= action.b < cfg.entity_cap
                else:
                    ok = action.a >= 1 and 0 <= action.b < cfg.entity_cap
            if ok:
                validated[agent_id] = action
            else:
                self._tally(f"invalid_{kind.name.lower()}")
                validated[agent_id] = Action.noop()
        return validated

    # --------------------------------------------------------------- movement

    def _phase_move(self, actions: dict[int, Action]) -> None:
        # Claims resolve against tick-start occupancy; lowest id wins a tile.
        claims: dict[tuple[int, int], int] = {}
        for agent_id in sorted(actions):
            action = actions[agent_id]
            if action.kind != ActionKind.MOVE:
                continue
            agent = self.agents[agent_id]
            d_row, d_col = DIRECTION_DELTAS[Direction(action.a)]
            row, col = agent.row + d_row, agent.col + d_col
            if not self.grid.passable(row, col):
                continue
            if self.occupancy[row, col] != -1:
                continue
            if (row, col) in claims:
                continue
            claims[(row, col)] = agent_id
        for (row, col), agent_id in claims.items():
            agent = self.agents[agent_id]
            self.occupancy[agent.row, agent.col] = -1
            agent.row, agent.col = row, col
            self.occupancy[row, col] = agent_id

    # ----------------------------------------------------------------- combat

    def _resolve_target(self, agent: AgentState, slot: int) -> AgentState | NpcState | None:
        if slot >= len(agent.last_entity_ids):
            return None
        entity = self.entity_by_id(agent.last_entity_ids[slot])
        if entity is None or not entity.alive or entity.health <= 0:
            return None
        return entity

    def _phase_combat(self, actions: dict[int, Action]) -> None:
        cfg = self.config
        for agent_id in sorted(actions):
            action = actions[agent_id]
            if action.kind != ActionKind.ATTACK:
                continue
            agent = self.agents[agent_id]
            if agent.health <= 0:
                continue  # killed earlier this phase
            style = CombatStyle(action.a)
            target = self._resolve_target(agent, action.b)
            if target is None:
                self._tally("attack_bad_target")
                continue
            if _chebyshev(agent.row, agent.col, target.row, target.col) > style_range(style, cfg):
                self._tally("attack_out_of_range")
                continue

            weapon = agent.equipped(ItemKind.WEAPON)
            tier = weapon.tier if weapon is not None and weapon.style == style else 0
            if style in (CombatStyle.RANGED, CombatStyle.MAGIC):
                ammo = next(
                    (i for i in agent.inventory if i.kind == ItemKind.AMMO and i.style == style),
                    None,
                )
                if ammo is not None:
                    tier = max(tier, ammo.tier)
                    ammo.quantity -= 1
                    if ammo.quantity == 0:
                        agent.inventory.remove(ammo)

            damage = resolve_combat(agent, target, style, cfg, tier=tier)
            was_alive = target.health > 0
            target.health = max(0, target.health - damage)
            if isinstance(target, NpcState) and target.disposition != Disposition.PASSIVE:
                target.last_attacker = agent_id
            if damage > 0:
                self._emit(agent_id, EventKind.SCORE_HIT, damage)
                self._damage_inflicted[agent_id] += damage
                self._add_xp(agent, int(style), damage)
            if was_alive and target.health == 0:
                agent.kill_count += 1
                if isinstance(target, AgentState):
                    self._emit(agent_id, EventKind.PLAYER_KILL, target.id)

    # ------------------------------------------------------------ item/market

    def market_list(self, agent_id: int, slot: int, price: int) -> int | None:
        """List an unequipped inventory stack; returns listing id or None (Noop)."""
        agent = self.agents[agent_id]
        if slot >= len(agent.inventory) or price < 1:
            self._tally("sell_bad_slot")
            return None
        item = agent.inventory[slot]
        if item.equipped:
            self._tally("sell_equipped")
            return None
        agent.inventory.pop(slot)
        listing_id = self.next_listing_id
        self.next_listing_id += 1
        self.market[listing_id] = MarketListing(listing_id, agent_id, item, price)
        self._emit(agent_id, EventKind.LIST_ITEM, ITEM_KIND_NAMES[item.kind])
        return listing_id

    def market_buy(self, agent_id: int, market_slot: int) -> Item | None:
        """Buy via the agent's last observed market row; returns the item or None."""
        agent = self.agents[agent_id]
        if market_slot >= len(agent.last_market_ids):
            self._tally("buy_bad_slot")
            return None
        listing = self.market.get(agent.last_market_ids[market_slot])
        if listing is None:
            self._tally("buy_gone")
            return None
        if listing.seller_id == agent_id:
            self._tally("buy_self")
            return None
        if agent.gold < listing.price:
            self._tally("buy_poor")
            return None
        if not agent.can_accept(listing.item, self.config.inventory_capacity):
            self._tally("buy_full")
            return None
        seller = self.agents[listing.seller_id]
        agent.gold -= listing.price
        seller.gold += listing.price
        del self.market[listing.listing_id]
        agent.add_item(listing.item, self.config.inventory_capacity)
        self._emit(agent_id, EventKind.BUY_ITEM, ITEM_KIND_NAMES[listing.item.kind])
        self._emit(listing.seller_id, EventKind.EARN_GOLD, listing.price)
        return listing.item

    def _use_item(self, agent: AgentState, slot: int) -> None:
        cfg = self.config
        if slot >= len(agent.inventory):
            self._tally("use_bad_slot")
            return
        item = agent.inventory[slot]
        if item.kind == ItemKind.RATION:
            agent.food = min(100, agent.food + cfg.ration_food)
            item.quantity -= 1
            if item.quantity == 0:
                agent.inventory.pop(slot)
            self._emit(agent.id, EventKind.CONSUME_ITEM, "Ration")
        elif item.kind == ItemKind.POULTICE:
            agent.health = min(100, agent.health + cfg.poultice_heal)
            item.quantity -= 1
            if item.quantity == 0:
                agent.inventory.pop(slot)
            self._emit(agent.id, EventKind.CONSUME_ITEM, "Poultice")
        elif item.kind in EQUIPPABLE_KINDS:
            if item.equipped:
                item.equipped = False  # toggle off; no event
                return
            current = agent.equipped(item.kind)
            if current is not None:
                current.equipped = False
            item.equipped = True
            self._emit(agent.id, EventKind.EQUIP_ITEM, ITEM_KIND_NAMES[item.kind])
        else:
            self._tally("use_ammo")

    def _give_item(self, agent: AgentState, slot: int, target_slot: int) -> None:
        target = self._resolve_target(agent, target_slot)
        if (
            not isinstance(target, AgentState)
            or slot >= len(agent.inventory)
            or _chebyshev(agent.row, agent.col, target.row, target.col) > 1
        ):
            self._tally("give_item_invalid")
            return
        item = agent.inventory[slot]
        if item.equipped or not target.can_accept(item, self.config.inventory_capacity):
            self._tally("give_item_invalid")
            return
        agent.inventory.pop(slot)
        target.add_item(item, self.config.inventory_capacity)

    def _give_gold(self, agent: AgentState, amount: int, target_slot: int) -> None:
        target = self._resolve_target(agent, target_slot)
        if (
            not isinstance(target, AgentState)
            or agent.gold < amount
            or _chebyshev(agent.row, agent.col, target.row, target.col) > 1
        ):
            self._tally("give_gold_invalid")
            return
        agent.gold -= amount
        target.gold += amount
        self._emit(target.id, EventKind.EARN_GOLD, amount)

    def _phase_items_market(self, actions: dict[int, Action]) -> None:
        for agent_id in sorted(actions):
            action = actions[agent_id]
            agent = self.agents[agent_id]
            if agent.health <= 0:
                continue
            if action.kind == ActionKind.USE:
                self._use_item(agent, action.a)
            elif action.kind == ActionKind.SELL:
                self.market_list(agent_id, action.a, action.b)
            elif action.kind == ActionKind.BUY:
                self.market_buy(agent_id, action.a)
            elif action.kind == ActionKind.GIVE_ITEM:
                self._give_item(agent, action.a, action.b)
            elif action.kind == ActionKind.GIVE_GOLD:
                self._give_gold(agent, action.a, action.b)

    # ------------------------------------------------------------- metabolism

    def _new_item(self, kind: ItemKind, tier: int, style: CombatStyle | None = None) -> Item:
        uid = self.next_item_uid
        self.next_item_uid += 1
        return Item(uid=uid, kind=kind, tier=tier, style=style)

    def _metabolize(self, agent: AgentState) -> None:
        cfg = self.config
        grid = self.grid
        agent.food = max(0, agent.food - cfg.food_decay)
        agent.water = max(0, agent.water - cfg.water_decay)

        terrain = grid.terrain[agent.row, agent.col]
        if terrain == TerrainKind.FOREST and self.resources[agent.row, agent.col] > 0:
            if agent.food < 100:
                agent.food = 100
                self.resources[agent.row, agent.col] -= 1
                self._emit(agent.id, EventKind.EAT_FOOD)
                self._emit(agent.id, EventKind.HARVEST_ITEM, "Ration")
                self._add_xp(agent, 3, 1)
        elif terrain == TerrainKind.ORE and self.resources[agent.row, agent.col] > 0:
            roll = float(self.rng.random())
            kind = next(k for cum, k in _ORE_TABLE if roll < cum)
            style = None
            if kind in (ItemKind.WEAPON, ItemKind.AMMO):
                style = CombatStyle(int(self.rng.integers(0, 3)))
            tier = min(10, 1 + agent.skills.level("forage") // 2)
            item = self._new_item(kind, tier, style)
            if agent.can_accept(item, cfg.inventory_capacity):
                agent.add_item(item, cfg.inventory_capacity)
                self.resources[agent.row, agent.col] -= 1
                self._emit(agent.id, EventKind.HARVEST_ITEM, ITEM_KIND_NAMES[kind])
                self._add_xp(agent, 3, 1)

        if agent.water < 100:
            for d_row in (-1, 0, 1):
                for d_col in (-1, 0, 1):
                    row, col = agent.row + d_row, agent.col + d_col
                    if (
                        0 <= row < grid.size
                        and 0 <= col < grid.size
                        and grid.terrain[row, col] == TerrainKind.WATER
                    ):
                        agent.water = 100
                        self._emit(agent.id, EventKind.DRINK_WATER)
                        break
                if agent.water == 100:
                    break

        if agent.food == 0 or agent.water == 0:
            damage = cfg.starvation_damage
            if cfg.resilience_enabled:
                damage //= 2
            agent.health = max(0, agent.health - damage)
        elif (
            agent.food >= cfg.regen_threshold
            and agent.water >= cfg.regen_threshold
            and agent.health < 100
        ):
            agent.health = min(100, agent.health + cfg.regen_amount)
            self._hp_restored[agent.id] = True

    def _phase_metabolism(self) -> None:
        for agent in self.agents:
            if agent.alive and agent.health > 0:
                self._metabolize(agent)
        if self.config.resource_respawn_interval > 0 and self.tick > 0:
            if self.tick % self.config.resource_respawn_interval == 0:
                terrain = self.grid.terrain
                for kind in (TerrainKind.FOREST, TerrainKind.ORE):
                    mask = terrain == kind
                    self.resources[mask] = np.minimum(
                        self.resources[mask] + 1, resource_cap(kind)
                    )

    # ----------------------------------------------------------------- NPC AI

    def _npc_move_toward(self, npc: NpcState, row: int, col: int) -> None:
        d_row = row - npc.row
        d_col = col - npc.col
        steps: list[tuple[int, int]] = []
        if abs(d_row) >= abs(d_col) and d_row != 0:
            steps.append((1 if d_row > 0 else -1, 0))
        if d_col != 0:
            steps.append((0, 1 if d_col > 0 else -1))
        if abs(d_row) < abs(d_col) and d_row != 0:
            steps.append((1 if d_row > 0 else -1, 0))
        for s_row, s_col in steps:
            new_row, new_col = npc.row + s_row, npc.col + s_col
            if self.grid.passable(new_row, new_col) and self.occupancy[new_row, new_col] == -1:
                self.occupancy[npc.row, npc.col] = -1
                npc.row, npc.col = new_row, new_col
                self.occupancy[new_row, new_col] = npc.id
                return

    def _npc_attack(self, npc: NpcState, agent: AgentState) -> None:
        damage = resolve_combat(npc, agent, npc.style, self.config)
        agent.health = max(0, agent.health - damage)

    def _nearest_living_agent(self, npc: NpcState, radius: int) -> AgentState | None:
        best: AgentState | None = None
        best_key = (radius + 1, -1)
        for agent in self.agents:
            if not agent.alive or agent.health <= 0:
                continue
            dist = _chebyshev(npc.row, npc.col, agent.row, agent.col)
            if dist <= radius and (dist, agent.id) < best_key:
                best = agent
                best_key = (dist, agent.id)
        return best

    def _phase_npc_ai(self) -> None:
        cfg = self.config
        for npc in self.npcs:
            if not npc.alive or npc.health <= 0:
                continue
            if npc.disposition == Disposition.HOSTILE:
                target = self._nearest_living_agent(npc, NPC_SIGHT_RADIUS)
                if target is not None:
                    if _chebyshev(npc.row, npc.col, target.row, target.col) <= style_range(
                        npc.style, cfg
                    ):
                        self._npc_attack(npc, target)
                    else:
                        self._npc_move_toward(npc, target.row, target.col)
            elif npc.disposition == Disposition.NEUTRAL:
                if npc.last_attacker >= 0:
                    attacker = self.agents[npc.last_attacker]
                    if attacker.alive and attacker.health > 0:
                        dist = _chebyshev(npc.row, npc.col, attacker.row, attacker.col)
                        if dist <= style_range(npc.style, cfg):
                            self._npc_attack(npc, attacker)
                        elif dist <= NPC_SIGHT_RADIUS:
                            self._npc_move_toward(npc, attacker.row, attacker.col)
                    else:
                        npc.last_attacker = -1
            else:
                direction = Direction(int(self.rng.integers(0, 4)))
                d_row, d_col = DIRECTION_DELTAS[direction]
                new_row, new_col = npc.row + d_row, npc.col + d_col
                if self.grid.passable(new_row, new_col) and self.occupancy[new_row, new_col] == -1:
                    self.occupancy[npc.row, npc.col] = -1
                    npc.row, npc.col = new_row, new_col
                    self.occupancy[new_row, new_col] = npc.id

    # ------------------------------------------------------------------ death

    def _phase_deaths(self) -> list[int]:
        deaths: list[int] = []
        for agent in self.agents:
            if agent.alive and agent.health <= 0:
                agent.health = 0
                agent.alive = False
                self.occupancy[agent.row, agent.col] = -1
                deaths.append(agent.id)
                doomed = [l for l in self.market.values() if l.seller_id == agent.id]
                for listing in doomed:
                    del self.market[listing.listing_id]
        for npc in self.npcs:
            if npc.alive and npc.health <= 0:
                npc.alive = False
                self.occupancy[npc.row, npc.col] = -1
        return deaths


def reset(
    config: EnvConfig,
    grid: MapGrid,
    assignments: list[TaskAssignment],
    seed: int | None = None,
    spawn_slots: list[int] | None = None,
    group_ids: list[int] | None = None,
) -> tuple[WorldState, dict[int, Observation]]:
    """Fresh episode; all agents alive at full stats on spawn tiles, tick 0."""
    world = WorldState(
        config,
        grid,
        assignments,
        seed=config.seed if seed is None else seed,
        spawn_slots=spawn_slots,
        group_ids=group_ids,
    )
    observations = build_observations(world, [a.id for a in world.agents])
    return world, observations
