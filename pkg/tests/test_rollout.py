from __future__ import annotations

import numpy as np
import pytest

from gridarena.rollout import (
    FlatBatch,
    RolloutBuffer,
    Transition,
    compact_oracle,
    dump_batch,
    load_batch_columns,
    padded_oracle,
    padding_fraction,
)


def _t(agent_id: int, tick: int, done: bool = False, reward: float = 0.0) -> Transition:
    return Transition(
        agent_id=agent_id, tick=tick, observation=None, action=0, reward=reward, done=done
    )


def random_trace(rng: np.random.Generator, num_agents: int, num_ticks: int):
    """Random episode trace: each agent dies at a random tick (or survives).

    Returns per-tick transition lists; the death tick carries done=True.
    """
    death_tick = rng.integers(1, num_ticks + 1, size=num_agents)  # ticks alive
    trace = []
    for tick in range(num_ticks):
        rows = []
        for agent in range(num_agents):
            if tick < death_tick[agent]:
                done = tick == death_tick[agent] - 1 and death_tick[agent] <= num_ticks
                rows.append(_t(agent, tick, done=bool(done), reward=float(rng.random())))
        if rows:
            trace.append((tick, rows))
    return trace


# -------------------------------------------------------------------- buffer


def test_record_full_population_tick():
    buffer = RolloutBuffer()
    buffer.record_tick(0, [_t(i, 0) for i in range(128)])
    assert len(buffer) == 128


def test_sizes_sum_over_ticks():
    buffer = RolloutBuffer()
    live = [4, 3, 1]
    for tick, count in enumerate(live):
        buffer.record_tick(tick, [_t(i, tick) for i in range(count)])
    assert len(buffer) == 8
    batch = buffer.finish()
    assert len(batch) == 8
    assert batch.live_counts == {0: 4, 1: 3, 2: 1}


def test_duplicate_agent_within_tick_rejected():
    buffer = RolloutBuffer()
    with pytest.raises(ValueError, match="duplicate"):
        buffer.record_tick(0, [_t(1, 0), _t(1, 0)])


def test_non_monotone_tick_rejected():
    buffer = RolloutBuffer()
    buffer.record_tick(3, [_t(0, 3)])
    with pytest.raises(ValueError, match="non-monotone"):
        buffer.record_tick(3, [_t(0, 3)])
    with pytest.raises(ValueError, match="non-monotone"):
        buffer.record_tick(1, [_t(0, 1)])


def test_agent_stops_after_terminal_transition():
    buffer = RolloutBuffer()
    buffer.record_tick(0, [_t(0, 0, done=True), _t(1, 0)])
    with pytest.raises(ValueError, match="terminal"):
        buffer.record_tick(1, [_t(0, 1)])


def test_finish_seals_and_orders():
    buffer = RolloutBuffer()
    buffer.record_tick(0, [_t(2, 0), _t(0, 0), _t(1, 0)])
    buffer.record_tick(2, [_t(0, 2), _t(2, 2)])
    batch = buffer.finish()
    order = [(t.tick, t.agent_id) for t in batch.transitions]
    assert order == sorted(order)
    assert order[0] == (0, 0)  # minimal (tick, agent_id) first
    assert batch.index == {0: [0, 2], 1: [0], 2: [0, 2]}
    with pytest.raises(RuntimeError):
        buffer.finish()
    with pytest.raises(RuntimeError):
        buffer.record_tick(3, [_t(0, 3)])


def test_empty_buffer_cannot_finish():
    with pytest.raises(ValueError):
        RolloutBuffer().finish()


def test_at_most_one_done_per_agent():
    buffer = RolloutBuffer()
    buffer.record_tick(0, [_t(0, 0), _t(1, 0, done=True)])
    buffer.record_tick(1, [_t(0, 1, done=True)])
    batch = buffer.finish()
    done_counts: dict[int, int] = {}
    for transition in batch.transitions:
        if transition.done:
            done_counts[transition.agent_id] = done_counts.get(transition.agent_id, 0) + 1
    assert all(v == 1 for v in done_counts.values())


# -------------------------------------------------------------------- oracle


def test_oracle_equivalence_random_traces():
    rng = np.random.default_rng(2024)
    for _ in range(30):
        num_agents = int(rng.integers(2, 20))
        num_ticks = int(rng.integers(2, 40))
        trace = random_trace(rng, num_agents, num_ticks)
        buffer = RolloutBuffer()
        for tick, rows in trace:
            buffer.record_tick(tick, rows)
        batch = buffer.finish()
        grid, mask = padded_oracle(trace, num_agents, num_ticks)
        assert list(batch.transitions) == compact_oracle(grid, mask)
        assert len(batch) == int(mask.sum())


def test_full_survival_padding_zero():
    trace = [(t, [_t(a, t) for a in range(4)]) for t in range(10)]
    _, mask = padded_oracle(trace, 4, 10)
    assert padding_fraction(mask) == 0.0


def test_half_dead_padding_half():
    trace = [(t, [_t(a, t) for a in range(2)]) for t in range(10)]
    _, mask = padded_oracle(trace, 4, 10)
    assert padding_fraction(mask) == 0.5


def _last_quarter_scenario(num_agents=128, num_ticks=1024, survivors=13, death_tick=32):
    """Most agents die early; `survivors` live the whole episode."""
    trace = []
    for tick in range(num_ticks):
        rows = [_t(a, tick, done=tick == num_ticks - 1) for a in range(survivors)]
        if tick < death_tick:
            rows += [_t(a, tick, done=tick == death_tick - 1) for a in range(survivors, num_agents)]
        trace.append((tick, sorted(rows, key=lambda t: t.agent_id)))
    return trace


def test_ninety_percent_padding_scenario():
    trace = _last_quarter_scenario()
    _, mask = padded_oracle(trace, 128, 1024)
    last_quarter = padding_fraction(mask, (768, 1024))
    assert last_quarter == pytest.approx(0.90, abs=0.01)


def test_memory_proportionality_on_pathological_episode():
    trace = _last_quarter_scenario()
    buffer = RolloutBuffer()
    for tick, rows in trace:
        buffer.record_tick(tick, rows)
    dense_cells = 128 * 1024
    assert buffer.capacity < 0.15 * dense_cells
    assert buffer.capacity == len(buffer)


def test_padding_fraction_range_validation():
    _, mask = padded_oracle([(0, [_t(0, 0)])], 1, 4)
    with pytest.raises(ValueError):
        padding_fraction(mask, (3, 2))
    with pytest.raises(ValueError):
        padding_fraction(mask, (0, 9))


# ---------------------------------------------------------------------- dump


def test_dump_round_trip():
    buffer = RolloutBuffer()
    buffer.record_tick(0, [_t(0, 0, reward=0.5), _t(1, 0, reward=-1.25)])
    buffer.record_tick(1, [_t(0, 1, done=True, reward=2.0)])
    batch = buffer.finish()
    columns = load_batch_columns(dump_batch(batch))
    assert columns["tick"].tolist() == [0, 0, 1]
    assert columns["agent_id"].tolist() == [0, 1, 0]
    assert columns["reward"].tolist() == [0.5, -1.25, 2.0]
    assert columns["done"].tolist() == [0, 0, 1]
