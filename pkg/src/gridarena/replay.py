"""Replay stream (JSONL) and canonical state hashing.

Hash: 64-bit FNV-1a over the canonical little-endian serialization below.
Byte order: every integer is a signed 64-bit little-endian word unless noted;
booleans are one byte. Fields are folded in the documented sequence, so two
states hash equal iff their canonical serializations are byte-identical.
"""

from __future__ import annotations

import json
import struct
from typing import IO

from .world import WorldState

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

REPLAY_FORMAT = "gridarena-replay-1"
STATE_FORMAT = b"gridarena-state-1"


def fnv1a64(data: bytes, h: int = _FNV_OFFSET) -> int:
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(master: int, *parts: int | str) -> int:
    """Stable 63-bit sub-seed from a master seed and a label path."""
    h = fnv1a64(struct.pack("<q", master & _MASK64 if master >= 0 else master))
    for part in parts:
        if isinstance(part, str):
            h = fnv1a64(part.encode("utf-8"), h)
        else:
            h = fnv1a64(struct.pack("<q", part), h)
    return h & 0x7FFFFFFFFFFFFFFF


def _pack_ints(*values: int) -> bytes:
    return struct.pack(f"<{len(values)}q", *values)


def state_bytes(world: WorldState) -> bytes:
    """Canonical serialization: header, tick, agents by id (core stats, skills,
    inventory in slot order), NPCs by id, market listings by listing id,
    resource grid as int32 LE, event-log length."""
    chunks: list[bytes] = [STATE_FORMAT, _pack_ints(world.tick)]
    for agent in world.agents:
        chunks.append(
            _pack_ints(
                agent.id,
                agent.row,
                agent.col,
                agent.health,
                agent.food,
                agent.water,
                agent.gold,
                1 if agent.alive else 0,
                agent.spawn_immunity_remaining,
                agent.lifespan,
                agent.kill_count,
                agent.gold_earned,
                *agent.skills.xp,
            )
        )
        chunks.append(_pack_ints(len(agent.inventory)))
        for item in agent.inventory:
            chunks.append(
                _pack_ints(
                    item.uid,
                    int(item.kind),
                    item.tier,
                    -1 if item.style is None else int(item.style),
                    item.quantity,
                    1 if item.equipped else 0,
                )
            )
    for npc in world.npcs:
        chunks.append(
            _pack_ints(
                npc.id,
                npc.row,
                npc.col,
                npc.health,
                1 if npc.alive else 0,
                int(npc.disposition),
                int(npc.style),
                npc.level,
                npc.last_attacker,
            )
        )
    for listing_id in sorted(world.market):
        listing = world.market[listing_id]
        item = listing.item
        chunks.append(
            _pack_ints(
                listing.listing_id,
                listing.seller_id,
                listing.price,
                item.uid,
                int(item.kind),
                item.tier,
                -1 if item.style is None else int(item.style),
                item.quantity,
            )
        )
    chunks.append(world.resources.astype("<i4").tobytes())
    chunks.append(_pack_ints(len(world.event_log)))
    return b"".join(chunks)


def state_hash(world: WorldState) -> str:
    """64-bit FNV-1a of the canonical state, as fixed-width hex."""
    return f"{fnv1a64(state_bytes(world)):016x}"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class ReplayWriter:
    """Streams replay JSONL (one object per line, header first) and hashes it.

    The hash covers the exact bytes written, so two replays are equal iff
    their hashes agree.
    """

    def __init__(self, env_config: dict, seed: int, map_seed: int, stream: IO[str] | None = None):
        self.stream = stream
        self._hash = _FNV_OFFSET
        header = {
            "format": REPLAY_FORMAT,
            "env": env_config,
            "seed": seed,
            "map_seed": map_seed,
        }
        self._write_line(_dumps(header))

    def _write_line(self, line: str) -> None:
        data = (line + "\n").encode("utf-8")
        self._hash = fnv1a64(data, self._hash)
        if self.stream is not None:
            self.stream.write(line + "\n")

    def record_tick(self, world: WorldState, events) -> None:
        line = {
            "tick": world.tick,
            "events": [e.to_wire() for e in events],
            "agents": [
                {
                    "id": a.id,
                    "pos": [a.row, a.col],
                    "hp": a.health,
                    "food": a.food,
                    "water": a.water,
                    "gold": a.gold,
                    "alive": a.alive,
                }
                for a in world.agents
            ],
        }
        self._write_line(_dumps(line))

    @property
    def replay_hash(self) -> str:
        return f"{self._hash:016x}"
