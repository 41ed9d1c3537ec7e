"""Episode runner: wires the world, policies, reward shaping, and collection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

from .config import EnvConfig
from .core import Action
from .mapgen import generate_map
from .policies import Policy, make_policy
from .replay import ReplayWriter, derive_seed, state_hash
from .rewards import RewardConfig, shaped_reward
from .rollout import RolloutBuffer, Transition
from .tasks import Curriculum, TaskAssignment, sample_assignments
from .world import reset


@dataclass
class PolicyGroup:
    policy: Policy
    agent_ids: list[int]


@dataclass
class EpisodeResult:
    assignments: list[TaskAssignment]
    lifespans: list[int]
    ticks: int
    state_hash: str
    replay_hash: str
    illegal_actions: int
    total_events: int
    buffer: RolloutBuffer | None = None
    reward_totals: dict[int, float] = field(default_factory=dict)


def run_episode(
    config: EnvConfig,
    map_seed: int,
    assignments: list[TaskAssignment],
    groups: list[PolicyGroup],
    reward_config: RewardConfig,
    episode_seed: int,
    spawn_slots: list[int] | None = None,
    group_ids: list[int] | None = None,
    replay_stream: IO[str] | None = None,
    collect: bool = False,
    max_ticks: int | None = None,
) -> EpisodeResult:
    """One full episode; deterministic given the seeds and policy roster."""
    grid = generate_map(map_seed, config.map_size)
    world, observations = reset(
        config, grid, assignments, seed=episode_seed, spawn_slots=spawn_slots, group_ids=group_ids
    )
    for g, group in enumerate(groups):
        group.policy.reset(derive_seed(episode_seed, "policy", g))

    writer = ReplayWriter(config.to_dict(), episode_seed, map_seed, stream=replay_stream)
    buffer = RolloutBuffer() if collect else None
    reward_totals = {a.id: 0.0 for a in world.agents}
    tick_cap = config.max_ticks if max_ticks is None else max_ticks

    while not world.done and world.tick < tick_cap:
        actions: dict[int, Action] = {}
        for group in groups:
            visible = {
                aid: observations[aid]
                for aid in group.agent_ids
                if aid in observations and world.agents[aid].alive
            }
            actions.update(group.policy.act(visible))
        result = world.step(actions)
        writer.record_tick(world, result.events)

        rewards = {aid: shaped_reward(reward_config, delta) for aid, delta in result.deltas.items()}
        for aid, reward in rewards.items():
            reward_totals[aid] += reward
        if buffer is not None:
            transitions = [
                Transition(
                    agent_id=aid,
                    tick=world.tick - 1,
                    observation=result.observations[aid],
                    action=int(actions.get(aid, Action.noop()).kind),
                    reward=rewards[aid],
                    done=result.deltas[aid].died or result.done,
                )
                for aid in sorted(result.deltas)
            ]
            buffer.record_tick(world.tick - 1, transitions)
        observations = result.observations

    return EpisodeResult(
        assignments=world.assignments,
        lifespans=[a.lifespan for a in world.agents],
        ticks=world.tick,
        state_hash=state_hash(world),
        replay_hash=writer.replay_hash,
        illegal_actions=world.illegal_actions,
        total_events=len(world.event_log),
        buffer=buffer,
        reward_totals=reward_totals,
    )


def single_policy_groups(policy_name: str, config: EnvConfig) -> list[PolicyGroup]:
    policy = make_policy(policy_name, allow_giving=not config.disable_giving)
    return [PolicyGroup(policy=policy, agent_ids=list(range(config.num_agents)))]


def simulate(
    config: EnvConfig,
    curriculum: Curriculum,
    policy_name: str,
    master_seed: int,
    replay_stream: IO[str] | None = None,
    max_ticks: int | None = None,
) -> EpisodeResult:
    """The canonical single-episode entry used by the CLI and the bindings
    parity check: seeds for map/tasks/env derive from one master seed."""
    map_seed = derive_seed(master_seed, "map")
    tasks_seed = derive_seed(master_seed, "tasks")
    episode_seed = derive_seed(master_seed, "env")
    assignments = sample_assignments(curriculum, config.num_agents, tasks_seed)
    groups = single_policy_groups(policy_name, config)
    return run_episode(
        config,
        map_seed,
        assignments,
        groups,
        RewardConfig(),
        episode_seed,
        replay_stream=replay_stream,
        max_ticks=max_ticks,
    )
