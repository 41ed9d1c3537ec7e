"""Two-stage tournament evaluation: PvE and PvP with task-completion scoring.

PvE: one policy controls every agent; episodes cycle over a fixed set of map
seeds. PvP: nine policies share each environment (groups of 14 plus 2
baseline filler agents), nine rounds of fresh seeds. Scores count full task
completions; partial credit is reported separately as mean progress.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, EnvConfig
from .replay import derive_seed
from .rewards import RewardConfig
from .runner import PolicyGroup, run_episode
from .tasks import Curriculum, TaskAssignment, TaskSpec, default_category
from .policies import make_policy


def trials_per_task(episodes: int, agents_per_policy: int, num_tasks: int) -> tuple[int, int]:
    """(base trials per task, remainder spread over the lowest task ids)."""
    total = episodes * agents_per_policy
    return total // num_tasks, total % num_tasks


def task_trial_counts(episodes: int, agents_per_policy: int, num_tasks: int) -> np.ndarray:
    base, remainder = trials_per_task(episodes, agents_per_policy, num_tasks)
    counts = np.full(num_tasks, base, dtype=np.int64)
    counts[:remainder] += 1
    return counts


@dataclass
class PveConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    episodes: int = 32
    map_seeds: tuple[int, ...] = (1, 2, 3, 4)
    sampled: bool = False  # random task sampling instead of round-robin

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if not self.map_seeds:
            raise ConfigError("map_seeds must be non-empty")
        self.map_seeds = tuple(int(s) for s in self.map_seeds)

    def validate_curriculum(self, curriculum: Curriculum) -> None:
        if self.episodes * self.env.num_agents < len(curriculum):
            raise ConfigError(
                f"episodes*num_agents = {self.episodes * self.env.num_agents} "
                f"< {len(curriculum)} eval tasks; trial arithmetic impossible"
            )


@dataclass
class PvpConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    num_groups: int = 9
    group_size: int = 14
    filler_agents: int = 2
    maps: tuple[int, ...] = tuple(range(10_000, 10_256))
    episodes: int = 200
    rounds: int = 9
    sampled: bool = False

    def __post_init__(self) -> None:
        expected = self.num_groups * self.group_size + self.filler_agents
        if expected != self.env.num_agents:
            raise ConfigError(
                f"num_groups*group_size + filler_agents = {expected} "
                f"!= num_agents = {self.env.num_agents}"
            )
        if self.episodes < 1 or self.rounds < 1:
            raise ConfigError("episodes and rounds must be >= 1")
        if not self.maps:
            raise ConfigError("maps must be non-empty")
        self.maps = tuple(int(s) for s in self.maps)

    @property
    def total_episodes(self) -> int:
        return self.rounds * self.episodes


@dataclass
class PerTaskScore:
    task_name: str
    predicate: str
    category: str
    trials: int = 0
    completions: int = 0
    progress_sum: float = 0.0

    @property
    def mean_progress(self) -> float:
        return self.progress_sum / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "task": self.task_name,
            "predicate": self.predicate,
            "category": self.category,
            "trials": self.trials,
            "completions": self.completions,
            "mean_progress": self.mean_progress,
        }


@dataclass
class ScoreReport:
    mode: str
    policy: str
    episodes: int
    seeds: dict
    per_task: list[PerTaskScore]
    lifespan_sum: float = 0.0
    lifespan_count: int = 0
    rank: int | None = None

    @property
    def trials(self) -> int:
        return sum(t.trials for t in self.per_task)

    @property
    def completions(self) -> int:
        return sum(t.completions for t in self.per_task)

    @property
    def completion_rate(self) -> float:
        """Percent of trials fully completed (progress == 1)."""
        return 100.0 * self.completions / self.trials if self.trials else 0.0

    @property
    def mean_progress(self) -> float:
        """Percent mean partial credit across trials."""
        total = sum(t.progress_sum for t in self.per_task)
        return 100.0 * total / self.trials if self.trials else 0.0

    @property
    def mean_lifespan(self) -> float:
        return self.lifespan_sum / self.lifespan_count if self.lifespan_count else 0.0

    def weighted_score(self, category_map: dict[str, str] | None = None) -> float:
        return weighted_category_score(self.per_task, category_map)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "policy": self.policy,
            "episodes": self.episodes,
            "seeds": self.seeds,
            "per_task": [t.to_dict() for t in self.per_task],
            "trials": self.trials,
            "completions": self.completions,
            "completion_rate": self.completion_rate,
            "mean_progress": self.mean_progress,
            "mean_lifespan": self.mean_lifespan,
            "weighted_score": self.weighted_score(),
            "rank": self.rank,
        }


def weighted_category_score(
    per_task: list[PerTaskScore], category_map: dict[str, str] | None = None
) -> float:
    """Equal task weights within a category, equal category weights overall."""
    from .tasks import CATEGORIES

    by_category: dict[str, list[float]] = {}
    for row in per_task:
        category = category_map.get(row.task_name) if category_map else row.category
        if category is None:
            raise ConfigError(f"task {row.task_name!r} missing from category map")
        if category not in CATEGORIES:
            raise ConfigError(f"unknown category {category!r} for task {row.task_name!r}")
        by_category.setdefault(category, []).append(row.mean_progress)
    if not by_category:
        return 0.0
    weight = 100.0 / len(by_category)
    return sum(weight * (sum(v) / len(v)) for v in by_category.values())


# ------------------------------------------------------------- episode worker


def _pvp_spawn_slots(
    num_tiles: int, num_groups: int, group_size: int, filler: int, rotation: int
) -> list[int]:
    """Group-to-spawn-region mapping, rotated per episode for fairness."""
    region_len = (num_tiles - filler) // num_groups
    if region_len < group_size:
        raise ConfigError(f"not enough spawn tiles ({num_tiles}) for PvP groups")
    slots: list[int] = []
    for i in range(num_groups * group_size + filler):
        g = i // group_size
        if g >= num_groups:
            slots.append(num_groups * region_len + (i - num_groups * group_size))
        else:
            region = (g + rotation) % num_groups
            member = i % group_size
            slots.append(region * region_len + member * region_len // group_size)
    return slots


def _episode_worker(payload: dict) -> list[tuple[int, int, float, bool, int]]:
    """Runs one episode; returns (agent_id, task_idx, progress, completed, lifespan)."""
    config = EnvConfig(**payload["env"])
    tasks: list[TaskSpec] = payload["tasks"]
    task_indices: list[int] = payload["task_indices"]
    assignments = [TaskAssignment(agent_id=i, task=tasks[t]) for i, t in enumerate(task_indices)]
    groups = [
        PolicyGroup(
            policy=make_policy(name, allow_giving=not config.disable_giving), agent_ids=ids
        )
        for name, ids in zip(payload["policy_names"], payload["group_agent_ids"])
    ]
    spawn_slots = None
    if payload.get("pvp_shape") is not None:
        num_groups, group_size, filler = payload["pvp_shape"]
        from .mapgen import generate_map

        grid = generate_map(payload["map_seed"], config.map_size)
        spawn_slots = _pvp_spawn_slots(
            len(grid.spawn_tiles), num_groups, group_size, filler, payload["rotation"]
        )
    result = run_episode(
        config,
        payload["map_seed"],
        assignments,
        groups,
        RewardConfig(),
        payload["episode_seed"],
        spawn_slots=spawn_slots,
        group_ids=payload.get("group_ids"),
    )
    return [
        (a.agent_id, task_indices[a.agent_id], a.progress, a.completed, result.lifespans[a.agent_id])
        for a in result.assignments
    ]


def _run_jobs(payloads: list[dict], jobs: int):
    """Ordered execution; output is identical regardless of the job count."""
    if jobs <= 1:
        return [_episode_worker(p) for p in payloads]
    import multiprocessing as mp

    context = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
    with ProcessPoolExecutor(max_workers=jobs, mp_context=context) as pool:
        return list(pool.map(_episode_worker, payloads, chunksize=1))


def _new_report(mode: str, policy: str, episodes: int, seeds: dict, tasks: list[TaskSpec]) -> ScoreReport:
    per_task = [
        PerTaskScore(task_name=t.name, predicate=t.predicate, category=default_category(t))
        for t in tasks
    ]
    return ScoreReport(mode=mode, policy=policy, episodes=episodes, seeds=seeds, per_task=per_task)


# -------------------------------------------------------------------- PvE run


def run_pve(
    policy_name: str,
    curriculum: Curriculum,
    config: PveConfig,
    master_seed: int,
    jobs: int = 1,
) -> ScoreReport:
    """All agents controlled by one policy; episodes cycle over map_seeds."""
    config.validate_curriculum(curriculum)
    tasks = curriculum.tasks
    n_tasks = len(tasks)
    num_agents = config.env.num_agents
    env_dict = config.env.to_dict()
    all_ids = list(range(num_agents))

    payloads = []
    for episode in range(config.episodes):
        if config.sampled:
            rng = np.random.default_rng(derive_seed(master_seed, "pve-tasks", episode))
            task_indices = [
                int(i) for i in rng.choice(n_tasks, size=num_agents, p=curriculum.probabilities)
            ]
        else:
            start = episode * num_agents
            task_indices = [(start + i) % n_tasks for i in range(num_agents)]
        payloads.append(
            {
                "env": env_dict,
                "map_seed": config.map_seeds[episode % len(config.map_seeds)],
                "episode_seed": derive_seed(master_seed, "pve", episode),
                "tasks": tasks,
                "task_indices": task_indices,
                "policy_names": [policy_name],
                "group_agent_ids": [all_ids],
            }
        )

    report = _new_report(
        "pve",
        policy_name,
        config.episodes,
        {"master_seed": master_seed, "map_seeds": list(config.map_seeds)},
        tasks,
    )
    for rows in _run_jobs(payloads, jobs):
        for _, task_idx, progress, completed, lifespan in rows:
            entry = report.per_task[task_idx]
            entry.trials += 1
            entry.completions += 1 if completed else 0
            entry.progress_sum += progress
            report.lifespan_sum += lifespan
            report.lifespan_count += 1
    return report


# -------------------------------------------------------------------- PvP run


def run_pvp(
    policy_names: list[str],
    baseline_name: str,
    curriculum: Curriculum,
    config: PvpConfig,
    master_seed: int,
    jobs: int = 1,
) -> list[ScoreReport]:
    """Shared-environment evaluation; returns ranked reports plus the baseline
    (rank None, filler agents excluded from all policy scores)."""
    if len(policy_names) != config.num_groups:
        raise ConfigError(f"expected {config.num_groups} policies, got {len(policy_names)}")
    tasks = curriculum.tasks
    n_tasks = len(tasks)
    group_size = config.group_size
    num_groups = config.num_groups
    filler = config.filler_agents
    env_dict = config.env.to_dict()

    group_agent_ids = [
        list(range(g * group_size, (g + 1) * group_size)) for g in range(num_groups)
    ]
    filler_ids = list(range(num_groups * group_size, num_groups * group_size + filler))
    group_ids_per_agent = [min(i // group_size, num_groups) for i in range(config.env.num_agents)]

    payloads = []
    policy_of_group_by_episode: list[list[int]] = []
    for round_idx in range(config.rounds):
        round_rng = np.random.default_rng(derive_seed(master_seed, "pvp-round", round_idx))
        perm = [int(p) for p in round_rng.permutation(num_groups)]
        for episode in range(config.episodes):
            rotation = episode % num_groups
            if config.sampled:
                rng = np.random.default_rng(
                    derive_seed(master_seed, "pvp-tasks", round_idx, episode)
                )
                member_tasks = [
                    [int(i) for i in rng.choice(n_tasks, size=group_size, p=curriculum.probabilities)]
                    for _ in range(num_groups)
                ]
                filler_tasks = [
                    int(i) for i in rng.choice(n_tasks, size=filler, p=curriculum.probabilities)
                ]
            else:
                schedule = [(episode * group_size + m) % n_tasks for m in range(group_size)]
                member_tasks = [schedule for _ in range(num_groups)]
                filler_tasks = [(episode * filler + k) % n_tasks for k in range(filler)]
            task_indices = [0] * config.env.num_agents
            for g in range(num_groups):
                for m, agent_id in enumerate(group_agent_ids[g]):
                    task_indices[agent_id] = member_tasks[g][m]
            for k, agent_id in enumerate(filler_ids):
                task_indices[agent_id] = filler_tasks[k]

            payloads.append(
                {
                    "env": env_dict,
                    "map_seed": config.maps[episode % len(config.maps)],
                    "episode_seed": derive_seed(master_seed, "pvp", round_idx, episode),
                    "tasks": tasks,
                    "task_indices": task_indices,
                    "policy_names": [policy_names[perm[g]] for g in range(num_groups)]
                    + [baseline_name],
                    "group_agent_ids": group_agent_ids + [filler_ids],
                    "group_ids": group_ids_per_agent,
                    "pvp_shape": (num_groups, group_size, filler),
                    "rotation": rotation,
                }
            )
            policy_of_group_by_episode.append([perm[g] for g in range(num_groups)])

    seeds = {"master_seed": master_seed, "rounds": config.rounds, "maps": len(config.maps)}
    reports = [
        _new_report("pvp", name, config.total_episodes, seeds, tasks) for name in policy_names
    ]
    baseline_report = _new_report("pvp", baseline_name, config.total_episodes, seeds, tasks)

    for episode_idx, rows in enumerate(_run_jobs(payloads, jobs)):
        policy_of_group = policy_of_group_by_episode[episode_idx]
        for agent_id, task_idx, progress, completed, lifespan in rows:
            g = agent_id // group_size
            report = baseline_report if g >= num_groups else reports[policy_of_group[g]]
            entry = report.per_task[task_idx]
            entry.trials += 1
            entry.completions += 1 if completed else 0
            entry.progress_sum += progress
            report.lifespan_sum += lifespan
            report.lifespan_count += 1

    ranked = sorted(
        reports,
        key=lambda r: (-r.completion_rate, -r.mean_progress, -r.mean_lifespan, r.policy),
    )
    for rank, report in enumerate(ranked, start=1):
        report.rank = rank
    return ranked + [baseline_report]


# ------------------------------------------------------------------ rankings


def _average_ranks(values: list[float]) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    array = np.asarray(values, dtype=np.float64)
    order = np.argsort(array, kind="stable")
    ranks = np.empty(len(array), dtype=np.float64)
    i = 0
    while i < len(array):
        j = i
        while j + 1 < len(array) and array[order[j + 1]] == array[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: list[float], ys: list[float]) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    if len(xs) != len(ys):
        raise ValueError("rank lists must have equal length")
    if len(xs) < 2:
        raise ValueError("need at least 2 observations")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    num = float(np.dot(dx, dy))
    den = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if den == 0.0:
        return 0.0
    return num / den


def lifespan_rank_correlation(reports: list[ScoreReport]) -> float:
    """Rank agreement between mean lifespan and completion rate."""
    if len(reports) < 3:
        raise ValueError("need at least 3 reports")
    return spearman(
        [r.mean_lifespan for r in reports], [r.completion_rate for r in reports]
    )


def _section_kwargs(cls, data: dict, where: str) -> dict:
    import dataclasses

    known = {f.name for f in dataclasses.fields(cls)} - {"env"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    return dict(data)


def pve_config_from_dict(data: dict, env: EnvConfig) -> PveConfig:
    kwargs = _section_kwargs(PveConfig, data, "tournament.pve")
    if "map_seeds" in kwargs:
        kwargs["map_seeds"] = tuple(kwargs["map_seeds"])
    return PveConfig(env=env, **kwargs)


def pvp_config_from_dict(data: dict, env: EnvConfig) -> PvpConfig:
    kwargs = _section_kwargs(PvpConfig, data, "tournament.pvp")
    if "maps" in kwargs:
        kwargs["maps"] = tuple(kwargs["maps"])
    return PvpConfig(env=env, **kwargs)
