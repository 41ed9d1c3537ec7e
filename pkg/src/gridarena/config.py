"""Environment configuration and shared error types."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


class ConfigError(ValueError):
    """Invalid configuration or malformed config input."""


class TaskFileError(ValueError):
    """Malformed task curriculum file; message carries line numbers."""


@dataclass
class EnvConfig:
    num_agents: int = 128
    map_size: int = 128
    max_ticks: int = 1024
    num_npcs: int = 128
    early_stop_agent_num: int = 0
    resilience_enabled: bool = False
    spawn_immunity_ticks: int = 20
    # "fixed": every agent starts with spawn_immunity_ticks.
    # "randomized": per-agent window drawn uniformly from [0, spawn_immunity_ticks].
    immunity_mode: str = "fixed"
    disable_giving: bool = False
    seed: int = 0

    # Metabolism rates. Zeroing the decays disables metabolism entirely.
    food_decay: int = 1
    water_decay: int = 1
    starvation_damage: int = 5
    regen_amount: int = 1
    regen_threshold: int = 50

    # Combat constants: damage = round(base * advantage) - defense, clamped at 0,
    # base = base_damage_const + base_damage_per_level*level + base_damage_per_tier*tier.
    base_damage_const: int = 5
    base_damage_per_level: int = 2
    base_damage_per_tier: int = 3
    advantage_multiplier: float = 1.5
    disadvantage_multiplier: float = 0.67
    defense_per_armor_tier: int = 2
    melee_range: int = 1
    ranged_range: int = 3
    magic_range: int = 4

    # Consumables and economy.
    poultice_heal: int = 30
    ration_food: int = 30
    starting_gold: int = 32
    inventory_capacity: int = 12
    resource_respawn_interval: int = 32

    # Observation shape.
    vision_radius: int = 7
    entity_cap: int = 16
    market_top_k: int = 16

    def __post_init__(self) -> None:
        if self.num_agents < 1:
            raise ConfigError("num_agents must be >= 1")
        if not 0 <= self.early_stop_agent_num <= self.num_agents:
            raise ConfigError(
                f"early_stop_agent_num must be in [0, num_agents], got {self.early_stop_agent_num}"
            )
        if self.num_npcs < 0:
            raise ConfigError("num_npcs must be >= 0")
        if self.max_ticks < 1:
            raise ConfigError("max_ticks must be >= 1")
        if self.map_size < 16:
            raise ConfigError(f"map_size must be >= 16, got {self.map_size}")
        if self.immunity_mode not in ("fixed", "randomized"):
            raise ConfigError(f"immunity_mode must be 'fixed' or 'randomized', got {self.immunity_mode!r}")
        if self.spawn_immunity_ticks < 0:
            raise ConfigError("spawn_immunity_ticks must be >= 0")
        if self.vision_radius < 1:
            raise ConfigError("vision_radius must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "EnvConfig":
        return dataclass_from_dict(cls, data, "env")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def dataclass_from_dict(cls, data: dict, where: str):
    """Build a config dataclass, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
