"""Padding-free transition collection for variable-population episodes.

The buffer stores exactly one slot per living-agent tick (a dead agent
contributes one terminal done=True transition, then nothing), so the
effective batch size always equals the true transition count. The zero-padded
dense grid exists only as an equivalence/measurement oracle.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Transition:
    agent_id: int
    tick: int
    observation: Any  # opaque payload reference; never copied here
    action: int  # canonical action code (ActionKind value)
    reward: float
    done: bool


@dataclass(frozen=True)
class FlatBatch:
    transitions: tuple[Transition, ...]
    index: dict[int, list[int]]  # agent_id -> sorted tick list
    live_counts: dict[int, int]  # tick -> live transition count

    def __len__(self) -> int:
        return len(self.transitions)


class RolloutBuffer:
    """Single-writer per-episode collector; seal with finish()."""

    def __init__(self) -> None:
        self._ticks: list[tuple[int, list[Transition]]] = []
        self._last_tick: int | None = None
        self._finished = False
        self._done_agents: set[int] = set()
        self._size = 0

    def record_tick(self, tick: int, live_transitions: list[Transition]) -> None:
        if self._finished:
            raise RuntimeError("buffer already sealed")
        if self._last_tick is not None and tick <= self._last_tick:
            raise ValueError(f"non-monotone tick {tick} after {self._last_tick}")
        seen: set[int] = set()
        for transition in live_transitions:
            if transition.agent_id in seen:
                raise ValueError(f"duplicate agent {transition.agent_id} within tick {tick}")
            if transition.agent_id in self._done_agents:
                raise ValueError(
                    f"agent {transition.agent_id} already emitted its terminal transition"
                )
            if transition.tick != tick:
                raise ValueError("transition tick does not match recorded tick")
            seen.add(transition.agent_id)
        for transition in live_transitions:
            if transition.done:
                self._done_agents.add(transition.agent_id)
        ordered = sorted(live_transitions, key=lambda t: t.agent_id)
        self._ticks.append((tick, ordered))
        self._last_tick = tick
        self._size += len(ordered)

    def __len__(self) -> int:
        return self._size

    @property
    def capacity(self) -> int:
        """Allocated transition slots; grows with true transitions only."""
        return self._size

    def finish(self) -> FlatBatch:
        if self._finished:
            raise RuntimeError("buffer already sealed")
        if not self._ticks:
            raise ValueError("cannot finish an empty buffer")
        self._finished = True
        transitions: list[Transition] = []
        index: dict[int, list[int]] = {}
        live_counts: dict[int, int] = {}
        for tick, rows in self._ticks:
            live_counts[tick] = len(rows)
            for transition in rows:
                transitions.append(transition)
                index.setdefault(transition.agent_id, []).append(tick)
        return FlatBatch(transitions=tuple(transitions), index=index, live_counts=live_counts)

    def trace(self) -> list[tuple[int, list[Transition]]]:
        """Raw per-tick trace (for the dense oracle)."""
        return list(self._ticks)


def padded_oracle(
    episode_trace: list[tuple[int, list[Transition]]],
    num_agents: int,
    num_ticks: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Dense (num_agents, num_ticks) grid with validity mask.

    Cell (a, t) holds the transition when agent a was alive at tick t, else a
    zero placeholder with mask False. Ticks index columns directly.
    """
    grid = np.empty((num_agents, num_ticks), dtype=object)
    grid[:] = None
    mask = np.zeros((num_agents, num_ticks), dtype=bool)
    for tick, rows in episode_trace:
        if not 0 <= tick < num_ticks:
            raise ValueError(f"tick {tick} outside [0, {num_ticks})")
        for transition in rows:
            grid[transition.agent_id, tick] = transition
            mask[transition.agent_id, tick] = True
    return grid, mask


def compact_oracle(grid: np.ndarray, mask: np.ndarray) -> list[Transition]:
    """Mask-true cells in (tick, agent_id) order; must equal the FlatBatch."""
    num_agents, num_ticks = mask.shape
    out: list[Transition] = []
    for tick in range(num_ticks):
        for agent in range(num_agents):
            if mask[agent, tick]:
                out.append(grid[agent, tick])
    return out


def padding_fraction(mask: np.ndarray, tick_range: tuple[int, int] | None = None) -> float:
    """1 - (valid cells / total cells) over [start, stop) ticks."""
    num_ticks = mask.shape[1]
    start, stop = tick_range if tick_range is not None else (0, num_ticks)
    if not 0 <= start < stop <= num_ticks:
        raise ValueError(f"invalid tick range ({start}, {stop}) for {num_ticks} ticks")
    window = mask[:, start:stop]
    return 1.0 - window.sum() / window.size


BATCH_MAGIC = b"GABATCH1"


def dump_batch(batch: FlatBatch) -> bytes:
    """Binary layout: magic, u64 count, then columnar little-endian arrays
    (tick i64, agent_id i64, action code i64, reward f64, done u8)."""
    n = len(batch.transitions)
    ticks = np.array([t.tick for t in batch.transitions], dtype="<i8")
    agents = np.array([t.agent_id for t in batch.transitions], dtype="<i8")
    actions = np.array([t.action for t in batch.transitions], dtype="<i8")
    rewards = np.array([t.reward for t in batch.transitions], dtype="<f8")
    dones = np.array([1 if t.done else 0 for t in batch.transitions], dtype="u1")
    return b"".join(
        [
            BATCH_MAGIC,
            struct.pack("<Q", n),
            ticks.tobytes(),
            agents.tobytes(),
            actions.tobytes(),
            rewards.tobytes(),
            dones.tobytes(),
        ]
    )


def load_batch_columns(data: bytes) -> dict[str, np.ndarray]:
    if data[:8] != BATCH_MAGIC:
        raise ValueError("not a batch dump")
    (n,) = struct.unpack("<Q", data[8:16])
    offset = 16
    out: dict[str, np.ndarray] = {}
    for name, dtype in (("tick", "<i8"), ("agent_id", "<i8"), ("action", "<i8"), ("reward", "<f8")):
        width = n * 8
        out[name] = np.frombuffer(data, dtype=dtype, count=n, offset=offset)
        offset += width
    out["done"] = np.frombuffer(data, dtype="u1", count=n, offset=offset)
    return out
