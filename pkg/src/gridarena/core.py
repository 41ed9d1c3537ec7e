"""Core domain types: combat styles, skills, items, agents, NPCs, actions, events."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum


class CombatStyle(IntEnum):
    MELEE = 0
    RANGED = 1
    MAGIC = 2

    def beats(self) -> "CombatStyle":
        # 3-cycle: melee > ranged > magic > melee.
        return CombatStyle((self.value + 1) % 3)

    def loses_to(self) -> "CombatStyle":
        return CombatStyle((self.value + 2) % 3)


class Direction(IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3


DIRECTION_DELTAS = {
    Direction.N: (-1, 0),
    Direction.E: (0, 1),
    Direction.S: (1, 0),
    Direction.W: (0, -1),
}


class ItemKind(IntEnum):
    ARMOR = 0
    WEAPON = 1
    AMMO = 2
    RATION = 3
    POULTICE = 4


STACKABLE_KINDS = (ItemKind.AMMO, ItemKind.RATION, ItemKind.POULTICE)
EQUIPPABLE_KINDS = (ItemKind.ARMOR, ItemKind.WEAPON)

ITEM_KIND_NAMES = {
    ItemKind.ARMOR: "Armor",
    ItemKind.WEAPON: "Weapon",
    ItemKind.AMMO: "Ammo",
    ItemKind.RATION: "Ration",
    ItemKind.POULTICE: "Poultice",
}
ITEM_KINDS_BY_NAME = {name: kind for kind, name in ITEM_KIND_NAMES.items()}


@dataclass
class Item:
    uid: int
    kind: ItemKind
    tier: int
    style: CombatStyle | None = None
    quantity: int = 1
    equipped: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.tier <= 10:
            raise ValueError(f"item tier must be in 1..10, got {self.tier}")
        if self.quantity < 1:
            raise ValueError("item quantity must be >= 1")
        if self.kind in EQUIPPABLE_KINDS and self.quantity != 1:
            raise ValueError("armor/weapon quantity is always 1")
        if self.style is not None and self.kind not in (ItemKind.WEAPON, ItemKind.AMMO):
            raise ValueError("only weapons and ammo carry a combat style")

    def stacks_with(self, other: "Item") -> bool:
        return (
            self.kind in STACKABLE_KINDS
            and self.kind == other.kind
            and self.tier == other.tier
            and self.style == other.style
        )


SKILLS = ("melee", "ranged", "magic", "forage")
MAX_LEVEL = 10


def level_from_xp(xp: int) -> int:
    """Level n is reached at 10*n^2 cumulative xp, clamped to 1..10."""
    return min(MAX_LEVEL, max(1, math.isqrt(xp // 10)))


@dataclass
class SkillSet:
    xp: list[int] = field(default_factory=lambda: [0, 0, 0, 0])

    def level(self, skill: int | str) -> int:
        idx = SKILLS.index(skill) if isinstance(skill, str) else skill
        return level_from_xp(self.xp[idx])

    def levels(self) -> list[int]:
        return [level_from_xp(x) for x in self.xp]

    def add_xp(self, skill: int, amount: int) -> bool:
        """Add xp; returns True when this crossed a level boundary."""
        before = level_from_xp(self.xp[skill])
        self.xp[skill] += amount
        return level_from_xp(self.xp[skill]) > before


class EventKind(str, Enum):
    EAT_FOOD = "EatFood"
    DRINK_WATER = "DrinkWater"
    SCORE_HIT = "ScoreHit"
    PLAYER_KILL = "PlayerKill"
    CONSUME_ITEM = "ConsumeItem"
    HARVEST_ITEM = "HarvestItem"
    EQUIP_ITEM = "EquipItem"
    LIST_ITEM = "ListItem"
    BUY_ITEM = "BuyItem"
    EARN_GOLD = "EarnGold"
    LEVEL_UP = "LevelUp"


EVENT_KINDS_BY_NAME = {kind.value: kind for kind in EventKind}


@dataclass(frozen=True)
class GameEvent:
    tick: int
    agent_id: int
    kind: EventKind
    value: int | str | None = None

    def to_wire(self) -> list:
        return [self.tick, self.agent_id, self.kind.value, self.value]


@dataclass
class AgentState:
    id: int
    row: int
    col: int
    group_id: int = 0
    health: int = 100
    food: int = 100
    water: int = 100
    gold: int = 0
    skills: SkillSet = field(default_factory=SkillSet)
    inventory: list[Item] = field(default_factory=list)
    alive: bool = True
    spawn_immunity_remaining: int = 0
    lifespan: int = 0
    # Episode bookkeeping used by task predicates and reward shaping.
    kill_count: int = 0
    gold_earned: int = 0
    event_counts: dict[EventKind, int] = field(default_factory=dict)
    seen_event_kinds: set[EventKind] = field(default_factory=set)
    # Pointer-action mappings from the most recent observation.
    last_entity_ids: list[int] = field(default_factory=list)
    last_market_ids: list[int] = field(default_factory=list)

    @property
    def pos(self) -> tuple[int, int]:
        return (self.row, self.col)

    def equipped(self, kind: ItemKind) -> Item | None:
        for item in self.inventory:
            if item.equipped and item.kind == kind:
                return item
        return None

    def defense(self, per_tier: int) -> int:
        armor = self.equipped(ItemKind.ARMOR)
        return per_tier * armor.tier if armor else 0

    def active_style(self) -> CombatStyle:
        weapon = self.equipped(ItemKind.WEAPON)
        if weapon is not None and weapon.style is not None:
            return weapon.style
        combat_levels = self.skills.levels()[:3]
        return CombatStyle(max(range(3), key=lambda s: (combat_levels[s], -s)))

    def free_slots(self, capacity: int) -> int:
        return capacity - len(self.inventory)

    def can_accept(self, item: Item, capacity: int) -> bool:
        if any(mine.stacks_with(item) for mine in self.inventory):
            return True
        return len(self.inventory) < capacity

    def add_item(self, item: Item, capacity: int) -> bool:
        for mine in self.inventory:
            if mine.stacks_with(item):
                mine.quantity += item.quantity
                return True
        if len(self.inventory) < capacity:
            self.inventory.append(item)
            return True
        return False


class Disposition(IntEnum):
    PASSIVE = 0
    NEUTRAL = 1
    HOSTILE = 2


@dataclass
class NpcState:
    id: int  # globally unique: num_agents + npc index
    row: int
    col: int
    disposition: Disposition
    style: CombatStyle
    level: int
    health: int
    alive: bool = True
    last_attacker: int = -1


@dataclass
class MarketListing:
    listing_id: int
    seller_id: int
    item: Item
    price: int


class ActionKind(IntEnum):
    NOOP = 0
    MOVE = 1
    ATTACK = 2
    USE = 3
    SELL = 4
    BUY = 5
    GIVE_ITEM = 6
    GIVE_GOLD = 7


@dataclass(frozen=True)
class Action:
    """Tagged action; (a, b) meaning depends on kind.

    MOVE: a=direction. ATTACK: a=style, b=entity slot. USE: a=inventory slot.
    SELL: a=inventory slot, b=price. BUY: a=market slot.
    GIVE_ITEM: a=inventory slot, b=entity slot. GIVE_GOLD: a=amount, b=entity slot.
    """

    kind: ActionKind = ActionKind.NOOP
    a: int = 0
    b: int = 0

    @classmethod
    def noop(cls) -> "Action":
        return cls(ActionKind.NOOP)

    @classmethod
    def move(cls, direction: Direction | int) -> "Action":
        return cls(ActionKind.MOVE, int(direction))

    @classmethod
    def attack(cls, style: CombatStyle | int, target_slot: int) -> "Action":
        return cls(ActionKind.ATTACK, int(style), target_slot)

    @classmethod
    def use(cls, slot: int) -> "Action":
        return cls(ActionKind.USE, slot)

    @classmethod
    def sell(cls, slot: int, price: int) -> "Action":
        return cls(ActionKind.SELL, slot, price)

    @classmethod
    def buy(cls, market_slot: int) -> "Action":
        return cls(ActionKind.BUY, market_slot)

    @classmethod
    def give_item(cls, slot: int, target_slot: int) -> "Action":
        return cls(ActionKind.GIVE_ITEM, slot, target_slot)

    @classmethod
    def give_gold(cls, amount: int, target_slot: int) -> "Action":
        return cls(ActionKind.GIVE_GOLD, amount, target_slot)

    def to_code(self) -> tuple[int, int, int]:
        return (int(self.kind), self.a, self.b)

    @classmethod
    def from_code(cls, kind: int, a: int = 0, b: int = 0) -> "Action":
        try:
            parsed = ActionKind(kind)
        except ValueError:
            raise ValueError(f"unknown action code {kind}") from None
        return cls(parsed, int(a), int(b))
