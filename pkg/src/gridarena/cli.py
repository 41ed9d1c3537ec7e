"""Command-line entry point: simulate, eval, tasks, bench, serve."""

from __future__ import annotations

import argparse
import importlib.resources
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ConfigError, EnvConfig, TaskFileError
from .rewards import RewardConfig, preset
from .tasks import Curriculum, load_task_file, parse_task_file

log = logging.getLogger("gridarena")

_KNOWN_SECTIONS = {"env", "rewards", "tasks", "tournament", "output_dir", "master_seed"}
_KNOWN_TOURNAMENT = {"pve", "pvp", "policies", "baseline"}


@dataclass
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    train_tasks: str | None = None  # None -> bundled corpus
    eval_tasks: str | None = None
    pve_section: dict = field(default_factory=dict)
    pvp_section: dict = field(default_factory=dict)
    policies: list[str] = field(default_factory=lambda: ["random", "forage", "warrior", "marketeer"])
    baseline: str = "random"
    output_dir: str = "out"
    master_seed: int = 0

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = sorted(set(data) - _KNOWN_SECTIONS)
        if unknown:
            raise ConfigError(f"config: unknown sections {unknown}")
        env = EnvConfig.from_dict(data.get("env", {}))

        rewards_section = dict(data.get("rewards", {}))
        preset_name = rewards_section.pop("preset", None)
        if preset_name is not None:
            base = preset(preset_name).to_dict()
            base.update(rewards_section)
            rewards = RewardConfig.from_dict(base)
        else:
            rewards = RewardConfig.from_dict(rewards_section)

        tasks_section = data.get("tasks", {})
        unknown_tasks = sorted(set(tasks_section) - {"train", "eval"})
        if unknown_tasks:
            raise ConfigError(f"tasks: unknown keys {unknown_tasks}")

        tournament = data.get("tournament", {})
        unknown_tournament = sorted(set(tournament) - _KNOWN_TOURNAMENT)
        if unknown_tournament:
            raise ConfigError(f"tournament: unknown keys {unknown_tournament}")

        return cls(
            env=env,
            rewards=rewards,
            train_tasks=tasks_section.get("train"),
            eval_tasks=tasks_section.get("eval"),
            pve_section=tournament.get("pve", {}),
            pvp_section=tournament.get("pvp", {}),
            policies=list(tournament.get("policies", ["random", "forage", "warrior", "marketeer"])),
            baseline=tournament.get("baseline", "random"),
            output_dir=data.get("output_dir", "out"),
            master_seed=int(data.get("master_seed", 0)),
        )

    def load_curriculum(self, which: str) -> Curriculum:
        path = self.train_tasks if which == "train" else self.eval_tasks
        if path is not None:
            try:
                return load_task_file(path)
            except OSError as exc:
                raise ConfigError(f"cannot read task file {path}: {exc}") from None
        name = "train_tasks.txt" if which == "train" else "eval_tasks.txt"
        text = importlib.resources.files("gridarena.data").joinpath(name).read_text("utf-8")
        return parse_task_file(text)


def _out_dir(args) -> Path:
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(args) -> int:
    from .runner import simulate

    run = RunConfig.load(args.config)
    seed = run.master_seed if args.seed is None else args.seed
    if args.ticks is not None and args.ticks <= 0:
        raise ConfigError(f"--ticks must be >= 1, got {args.ticks}")
    curriculum = run.load_curriculum("train")

    stream = None
    if args.replay:
        Path(args.replay).parent.mkdir(parents=True, exist_ok=True)
        stream = open(args.replay, "w", encoding="utf-8")
    try:
        result = simulate(
            run.env, curriculum, args.policy, seed, replay_stream=stream, max_ticks=args.ticks
        )
    finally:
        if stream is not None:
            stream.close()
    print(
        json.dumps(
            {
                "seed": seed,
                "policy": args.policy,
                "ticks": result.ticks,
                "state_hash": result.state_hash,
                "replay_hash": result.replay_hash,
                "events": result.total_events,
                "illegal_actions": result.illegal_actions,
            },
            sort_keys=True,
        )
    )
    return 0


def _print_table(rows: list[tuple[str, str, str]]) -> None:
    header = ("policy", "PvE (%)", "PvP (%)")
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(3)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    print(line)
    print("-" * len(line))
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))


def cmd_eval(args) -> int:
    from .tournament import (
        lifespan_rank_correlation,
        pve_config_from_dict,
        pvp_config_from_dict,
        run_pve,
        run_pvp,
    )

    run = RunConfig.load(args.config)
    seed = run.master_seed if args.seed is None else args.seed
    curriculum = run.load_curriculum("eval")
    out = _out_dir(args)

    if args.mode == "pve":
        config = pve_config_from_dict(run.pve_section, run.env)
        reports = [
            run_pve(name, curriculum, config, seed, jobs=args.jobs)
            for name in run.policies + [run.baseline]
        ]
        rows = [(r.policy, f"{r.completion_rate:.2f}", "-") for r in reports]
        payload = {"mode": "pve", "reports": [r.to_dict() for r in reports]}
        if len(reports) >= 3:
            payload["lifespan_rank_correlation"] = lifespan_rank_correlation(reports)
    else:
        config = pvp_config_from_dict(run.pvp_section, run.env)
        if len(run.policies) != config.num_groups:
            raise ConfigError(
                f"tournament.policies has {len(run.policies)} entries; "
                f"pvp.num_groups is {config.num_groups}"
            )
        reports = run_pvp(run.policies, run.baseline, curriculum, config, seed, jobs=args.jobs)
        rows = [(r.policy, "-", f"{r.completion_rate:.2f}") for r in reports]
        payload = {"mode": "pvp", "reports": [r.to_dict() for r in reports]}
        if len(reports) >= 3:
            payload["lifespan_rank_correlation"] = lifespan_rank_correlation(reports)

    payload["seed"] = seed
    report_path = out / f"report_{args.mode}.json"
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _print_table(rows)
    print(f"report written to {report_path}")
    return 0


def cmd_tasks(args) -> int:
    from .embedding import embed_curriculum, overlap, pca_csv

    run = RunConfig.load(args.config)
    train = run.load_curriculum("train")
    eval_curriculum = run.load_curriculum("eval")
    out = _out_dir(args)

    if args.embed:
        payload = {
            task.name: [float(x) for x in vec]
            for curriculum in (train, eval_curriculum)
            for task, vec in zip(curriculum.tasks, embed_curriculum(curriculum))
        }
        path = out / "embeddings.json"
        path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        print(f"{len(payload)} embeddings written to {path}")
    if args.overlap:
        values = {
            "predicates": overlap(train, eval_curriculum, "predicates"),
            "full": overlap(train, eval_curriculum, "full"),
        }
        path = out / "overlap.json"
        path.write_text(json.dumps(values, sort_keys=True) + "\n", encoding="utf-8")
        print(f"overlap predicates={values['predicates']:.4f} full={values['full']:.4f}")
    if args.pca:
        combined = Curriculum(train.tasks + eval_curriculum.tasks)
        path = out / "pca.csv"
        path.write_text(pca_csv(combined), encoding="utf-8")
        print(f"PCA projection written to {path}")
    if not (args.embed or args.overlap or args.pca):
        raise ConfigError("tasks: pass at least one of --embed, --overlap, --pca")
    return 0


def _bench_kernels(impls: dict, env: EnvConfig) -> None:
    import numpy as np

    size = env.map_size
    n_entities = env.num_agents + env.num_npcs
    rng = np.random.default_rng(0)
    positions = rng.integers(0, size, size=(max(n_entities, 2), 2)).astype(np.int64)
    ids = np.arange(max(n_entities, 2), dtype=np.int64)
    observers = np.arange(env.num_agents, dtype=np.int64)
    radius = env.vision_radius
    padded = np.zeros((3, size + 2 * radius, size + 2 * radius), dtype=np.float32)
    centers = positions[: env.num_agents]

    cases = {
        "noise_field": lambda impl: impl.noise_field(12345, size, max(4, size // 8), 4),
        "entity_scan": lambda impl: impl.entity_scan(positions, ids, observers, radius, env.entity_cap),
        "crop_batch": lambda impl: impl.crop_batch(padded, centers, radius),
    }
    print(f"kernel timings (map {size}, {env.num_agents} agents, {env.num_npcs} NPCs):")
    for name, call in cases.items():
        row = {}
        for backend, impl in sorted(impls.items()):
            call(impl)  # warmup: JIT compile/dispatch outside the timed region
            reps = 10
            start = time.perf_counter()
            for _ in range(reps):
                call(impl)
            row[backend] = (time.perf_counter() - start) / reps * 1e3
        line = f"  {name}: " + ", ".join(f"{b} {ms:.3f} ms" for b, ms in sorted(row.items()))
        if len(row) == 2:
            line += f"  (numba {row['numpy'] / row['numba']:.1f}x)"
        print(line)


def cmd_bench(args) -> int:
    from . import kernels
    from .runner import simulate

    if args.episodes <= 0:
        raise ConfigError(f"--episodes must be >= 1, got {args.episodes}")
    run = RunConfig.load(args.config)
    env = run.env
    if args.config is None:
        env = EnvConfig(num_agents=32, map_size=48, max_ticks=256, num_npcs=32)
    curriculum = run.load_curriculum("train")

    impls = kernels.implementations()
    _bench_kernels(impls, env)

    results = {}
    for backend in sorted(impls):
        # Re-bind the dispatcher so episodes use this backend's kernels.
        impl = impls[backend]
        kernels.noise_field, kernels.entity_scan, kernels.crop_batch = (
            impl.noise_field,
            impl.entity_scan,
            impl.crop_batch,
        )
        simulate(env, curriculum, "random", args.seed, max_ticks=min(8, env.max_ticks))  # warmup
        steps = 0
        dense = 0
        start = time.perf_counter()
        for episode in range(args.episodes):
            result = simulate(env, curriculum, "random", args.seed + episode)
            steps += sum(result.lifespans)
            dense += env.num_agents * result.ticks
        elapsed = time.perf_counter() - start
        results[backend] = steps / elapsed if elapsed > 0 else float("inf")
        print(
            f"backend={backend}: {steps} agent-steps in {elapsed:.3f}s "
            f"-> {steps / elapsed:,.0f} agent-steps/s"
        )
        print(
            f"  padding-free transitions={steps}, dense cells={dense}, "
            f"dense padding fraction={1 - steps / dense:.3f}"
        )
    # Restore the configured dispatcher bindings.
    default = impls[kernels.backend_name()]
    kernels.noise_field, kernels.entity_scan, kernels.crop_batch = (
        default.noise_field,
        default.entity_scan,
        default.crop_batch,
    )
    if len(results) == 2:
        print(f"numba/numpy episode throughput ratio: {results['numba'] / results['numpy']:.2f}x")
    return 0


def cmd_serve(args) -> int:
    from .serve import serve_stdio

    return serve_stdio(args.config, sys.stdin, sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridarena",
        description="Deterministic multi-agent survival arena with task-based tournament scoring.",
        epilog="Config defaults: 128 agents, 128x128 map, 1024 ticks, 128 NPCs, "
        "spawn immunity 20, early stop 0; see the env section of the JSON config. "
        "Env var ARENA_LOG sets the log level, ARENA_BACKEND=numpy|numba picks the kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run-config JSON path (defaults are used when omitted)")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--out", default="out", help="output directory (default: out)")

    p = sub.add_parser("simulate", help="run one episode; print state/replay hashes")
    common(p)
    p.add_argument("--policy", default="forage", help="scripted policy name (default: forage)")
    p.add_argument("--ticks", type=int, default=None, help="tick cap override (>= 1)")
    p.add_argument("--replay", help="write replay JSONL to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="run the tournament and write a score report")
    common(p)
    p.add_argument("--mode", choices=("pve", "pvp"), required=True)
    p.add_argument("--jobs", type=int, default=1, help="parallel episode workers (default 1)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tasks", help="task-system artifacts: embeddings, overlap, PCA")
    common(p)
    p.add_argument("--embed", action="store_true", help="write embeddings.json")
    p.add_argument("--overlap", action="store_true", help="write overlap.json and print both modes")
    p.add_argument("--pca", action="store_true", help="write pca.csv (task_name,predicate,x,y)")
    p.set_defaults(func=cmd_tasks)

    p = sub.add_parser("bench", help="throughput and padding statistics per kernel backend")
    common(p)
    p.add_argument("--episodes", type=int, required=True)
    p.set_defaults(func=cmd_bench)
    p.set_defaults(seed=0)

    p = sub.add_parser("serve", help="stdio JSONL environment server (bindings endpoint)")
    p.add_argument("--config", help="run-config JSON path")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("ARENA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TaskFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
