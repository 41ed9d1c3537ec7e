from __future__ import annotations

import pytest

from gridarena.config import EnvConfig
from gridarena.mapgen import generate_map
from gridarena.tasks import Curriculum, TaskAssignment, make_task


def desk_env(**overrides) -> EnvConfig:
    """Small, fast environment used across tests."""
    params = dict(num_agents=8, map_size=32, max_ticks=48, num_npcs=8, seed=0)
    params.update(overrides)
    return EnvConfig(**params)


def survival_curriculum() -> Curriculum:
    return Curriculum(
        [
            make_task("survive", "TickGE", target=48),
            make_task("eat", "CountEvent", event="EatFood", n=3),
            make_task("drink", "CountEvent", event="DrinkWater", n=3),
        ]
    )


def uniform_assignments(num_agents: int, task=None) -> list[TaskAssignment]:
    task = task or make_task("survive", "TickGE", target=1024)
    return [TaskAssignment(agent_id=i, task=task) for i in range(num_agents)]


@pytest.fixture
def small_grid():
    return generate_map(seed=3, size=32)
