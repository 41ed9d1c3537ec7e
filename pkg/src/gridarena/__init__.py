"""gridarena: deterministic multi-agent survival gridworld with
task-conditioned tournament evaluation."""

__version__ = "0.1.0"

from .config import ConfigError, EnvConfig, TaskFileError
from .core import Action, ActionKind, AgentState, CombatStyle, EventKind, Item, ItemKind
from .mapgen import MapGrid, TerrainKind, generate_map
from .observe import Observation
from .rewards import RewardConfig, TickDelta, shaped_reward
from .tasks import Curriculum, TaskAssignment, TaskSpec, parse_task_file, sample_assignments
from .world import StepResult, WorldState, reset, resolve_combat

__all__ = [
    "Action",
    "ActionKind",
    "AgentState",
    "CombatStyle",
    "ConfigError",
    "Curriculum",
    "EnvConfig",
    "EventKind",
    "Item",
    "ItemKind",
    "MapGrid",
    "Observation",
    "RewardConfig",
    "StepResult",
    "TaskAssignment",
    "TaskFileError",
    "TaskSpec",
    "TerrainKind",
    "TickDelta",
    "WorldState",
    "generate_map",
    "parse_task_file",
    "reset",
    "resolve_combat",
    "sample_assignments",
    "shaped_reward",
]
