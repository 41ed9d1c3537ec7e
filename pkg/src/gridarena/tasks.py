"""Predicate tasks: definitions, file parsing, progress evaluation, sampling.

Task files are line-oriented::

    # comment
    survive_long: TickGE(target=1024) weight=1
    eat_10: CountEvent(event=EatFood, n=10) weight=5

Progress is a monotone value in [0, 1]; completion is progress == 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .config import TaskFileError
from .core import (
    EVENT_KINDS_BY_NAME,
    ITEM_KINDS_BY_NAME,
    SKILLS,
    AgentState,
    EventKind,
    ItemKind,
)

# Argument schemas: name -> (type, validator). Declaration order is canonical.


def _positive(v: int) -> bool:
    return v >= 1


def _level_range(v: int) -> bool:
    return 1 <= v <= 10


def _tier_range(v: int) -> bool:
    return 1 <= v <= 10


def _non_negative(v: int) -> bool:
    return v >= 0


def _event_name(v: str) -> bool:
    return v in EVENT_KINDS_BY_NAME


def _skill_name(v: str) -> bool:
    return v.lower() in SKILLS


def _item_name(v: str) -> bool:
    return v in ITEM_KINDS_BY_NAME


def _equippable_name(v: str) -> bool:
    return v in ("Armor", "Weapon")


PREDICATE_SCHEMAS: dict[str, list[tuple[str, type, object]]] = {
    "TickGE": [("target", int, _positive)],
    "CountEvent": [("event", str, _event_name), ("n", int, _positive)],
    "AttainSkill": [("skill", str, _skill_name), ("level", int, _level_range)],
    "EquipItem": [("kind", str, _equippable_name), ("tier", int, _tier_range)],
    "OwnItem": [("kind", str, _item_name), ("tier", int, _tier_range), ("n", int, _positive)],
    "HarvestItem": [("kind", str, _item_name), ("n", int, _positive)],
    "EarnGold": [("amount", int, _positive)],
    "HoardGold": [("amount", int, _positive)],
    "OccupyTile": [("row", int, _non_negative), ("col", int, _non_negative)],
    "DefeatEntity": [("n", int, _positive)],
}

CATEGORIES = ("survival", "combat", "exploration", "skill", "item", "market")


@dataclass(frozen=True)
class TaskSpec:
    name: str
    predicate: str
    args: tuple[tuple[str, int | str], ...]
    sampling_weight: float = 1.0

    @property
    def source_text(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.args)
        return f"{self.predicate}({inner})"

    def arg(self, name: str) -> int | str:
        for key, value in self.args:
            if key == name:
                return value
        raise KeyError(name)

    def full_key(self) -> tuple:
        """(predicate, canonical args) identity used by full-mode overlap."""
        return (self.predicate, tuple(sorted(self.args)))


def make_task(name: str, predicate: str, weight: float = 1.0, **kwargs) -> TaskSpec:
    """Validated TaskSpec constructor; kwargs are the predicate arguments."""
    schema = PREDICATE_SCHEMAS.get(predicate)
    if schema is None:
        raise TaskFileError(f"unknown predicate {predicate!r}")
    if weight <= 0:
        raise TaskFileError(f"task {name!r}: weight must be positive, got {weight}")
    args: list[tuple[str, int | str]] = []
    seen = set(kwargs)
    for arg_name, arg_type, validator in schema:
        if arg_name not in kwargs:
            raise TaskFileError(f"task {name!r}: {predicate} missing argument {arg_name!r}")
        value = kwargs[arg_name]
        if not isinstance(value, arg_type):
            raise TaskFileError(
                f"task {name!r}: {predicate}.{arg_name} expects {arg_type.__name__}, got {value!r}"
            )
        if not validator(value):
            raise TaskFileError(f"task {name!r}: {predicate}.{arg_name}={value!r} out of range")
        args.append((arg_name, value))
        seen.discard(arg_name)
    if seen:
        raise TaskFileError(f"task {name!r}: {predicate} got unexpected arguments {sorted(seen)}")
    return TaskSpec(name=name, predicate=predicate, args=tuple(args), sampling_weight=float(weight))


@dataclass
class Curriculum:
    tasks: list[TaskSpec]

    def __post_init__(self) -> None:
        if not self.tasks:
            raise TaskFileError("curriculum is empty")
        names = [t.name for t in self.tasks]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise TaskFileError(f"duplicate task names: {dupes}")
        if any(t.sampling_weight <= 0 for t in self.tasks):
            raise TaskFileError("sampling weights must be strictly positive")

    @property
    def probabilities(self) -> np.ndarray:
        weights = np.array([t.sampling_weight for t in self.tasks], dtype=np.float64)
        return weights / weights.sum()

    def __len__(self) -> int:
        return len(self.tasks)


_LINE_RE = re.compile(
    r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*:\s*"
    r"(?P<pred>[A-Za-z_][A-Za-z0-9_]*)\s*\(\s*(?P<args>[^)]*)\)\s*"
    r"weight\s*=\s*(?P<weight>[0-9]+(?:\.[0-9]+)?)\s*$"
)
_ARG_RE = re.compile(r"^(?P<key>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<value>-?[A-Za-z0-9_]+)$")


def parse_task_line(line: str) -> TaskSpec:
    match = _LINE_RE.match(line.strip())
    if match is None:
        raise TaskFileError(f"cannot parse task line: {line.strip()!r}")
    kwargs: dict[str, int | str] = {}
    args_text = match.group("args").strip()
    if args_text:
        for part in args_text.split(","):
            arg_match = _ARG_RE.match(part.strip())
            if arg_match is None:
                raise TaskFileError(f"cannot parse argument {part.strip()!r}")
            key = arg_match.group("key")
            raw = arg_match.group("value")
            try:
                kwargs[key] = int(raw)
            except ValueError:
                kwargs[key] = raw
    return make_task(
        match.group("name"), match.group("pred"), weight=float(match.group("weight")), **kwargs
    )


def render_task_line(task: TaskSpec) -> str:
    weight = task.sampling_weight
    weight_text = str(int(weight)) if weight == int(weight) else repr(weight)
    return f"{task.name}: {task.source_text} weight={weight_text}"


def parse_task_file(text: str) -> Curriculum:
    """Parse a task file into a Curriculum; aggregates all line errors."""
    tasks: list[TaskSpec] = []
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tasks.append(parse_task_line(line))
        except TaskFileError as exc:
            errors.append(f"line {lineno}: {exc}")
    if errors:
        raise TaskFileError("; ".join(errors))
    try:
        return Curriculum(tasks)
    except TaskFileError as exc:
        raise TaskFileError(str(exc)) from None


def load_task_file(path) -> Curriculum:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_task_file(handle.read())


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def evaluate_progress(task: TaskSpec, agent: AgentState) -> float:
    """Raw progress of one predicate against current agent episode state.

    Counting predicates are min(1, achieved/target); EquipItem and OccupyTile
    are indicators. Monotonicity over the episode is enforced by
    TaskAssignment.update (sticky max), so state-dependent predicates like
    HoardGold may fluctuate here.
    """
    pred = task.predicate
    if pred == "TickGE":
        return _clamp01(agent.lifespan / task.arg("target"))
    if pred == "CountEvent":
        kind = EVENT_KINDS_BY_NAME[task.arg("event")]
        return _clamp01(agent.event_counts.get(kind, 0) / task.arg("n"))
    if pred == "AttainSkill":
        level = agent.skills.level(str(task.arg("skill")).lower())
        return _clamp01(level / task.arg("level"))
    if pred == "EquipItem":
        kind = ITEM_KINDS_BY_NAME[task.arg("kind")]
        item = agent.equipped(kind)
        return 1.0 if item is not None and item.tier >= task.arg("tier") else 0.0
    if pred == "OwnItem":
        kind = ITEM_KINDS_BY_NAME[task.arg("kind")]
        tier = task.arg("tier")
        count = sum(i.quantity for i in agent.inventory if i.kind == kind and i.tier >= tier)
        return _clamp01(count / task.arg("n"))
    if pred == "HarvestItem":
        wanted = task.arg("kind")
        count = agent.event_counts.get((EventKind.HARVEST_ITEM, wanted), 0)
        return _clamp01(count / task.arg("n"))
    if pred == "EarnGold":
        return _clamp01(agent.gold_earned / task.arg("amount"))
    if pred == "HoardGold":
        return _clamp01(agent.gold / task.arg("amount"))
    if pred == "OccupyTile":
        return 1.0 if (agent.row, agent.col) == (task.arg("row"), task.arg("col")) else 0.0
    if pred == "DefeatEntity":
        return _clamp01(agent.kill_count / task.arg("n"))
    raise TaskFileError(f"unknown predicate {pred!r}")


@dataclass
class TaskAssignment:
    agent_id: int
    task: TaskSpec
    progress: float = 0.0
    completed: bool = False

    def update(self, agent: AgentState) -> tuple[float, bool]:
        """Re-evaluate; returns (progress delta, completed-now). Never decreases."""
        raw = evaluate_progress(self.task, agent)
        new = max(self.progress, raw)
        delta = new - self.progress
        self.progress = new
        completed_now = not self.completed and new >= 1.0
        if completed_now:
            self.completed = True
        return delta, completed_now


def sample_assignments(curriculum: Curriculum, num_agents: int, rng_seed: int) -> list[TaskAssignment]:
    """i.i.d. draws from the normalized weight distribution; seed-deterministic."""
    rng = np.random.default_rng(rng_seed)
    indices = rng.choice(len(curriculum.tasks), size=num_agents, p=curriculum.probabilities)
    return [TaskAssignment(agent_id=i, task=curriculum.tasks[int(t)]) for i, t in enumerate(indices)]


def round_robin_assignments(
    curriculum: Curriculum, num_agents: int, start_trial: int
) -> list[TaskAssignment]:
    """Deterministic task rotation so trials split floor/ceil across task ids."""
    n = len(curriculum.tasks)
    return [
        TaskAssignment(agent_id=i, task=curriculum.tasks[(start_trial + i) % n])
        for i in range(num_agents)
    ]


def default_category(task: TaskSpec) -> str:
    """Map a task to one of the six evaluation categories."""
    pred = task.predicate
    if pred == "TickGE":
        return "survival"
    if pred == "DefeatEntity":
        return "combat"
    if pred == "OccupyTile":
        return "exploration"
    if pred == "AttainSkill":
        return "skill"
    if pred in ("EquipItem", "OwnItem", "HarvestItem"):
        return "item"
    if pred in ("EarnGold", "HoardGold"):
        return "market"
    if pred == "CountEvent":
        event = str(task.arg("event"))
        if event in ("EatFood", "DrinkWater"):
            return "survival"
        if event in ("ScoreHit", "PlayerKill"):
            return "combat"
        if event == "LevelUp":
            return "skill"
        if event in ("ListItem", "BuyItem", "EarnGold"):
            return "market"
        return "item"  # ConsumeItem, HarvestItem, EquipItem
    raise TaskFileError(f"no category for predicate {pred!r}")
