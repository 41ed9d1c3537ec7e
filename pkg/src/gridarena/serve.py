"""Line-delimited JSON environment server over stdio.

One episode at a time: reset(seed) derives map/tasks/env seeds exactly like
the native simulate path, so a boundary-driven run with the same actions
produces an identical replay hash. Arrays cross the wire as base64-encoded
little-endian buffers (same layouts as the binary batch dump).
"""

from __future__ import annotations

import base64
import json
from typing import IO

import numpy as np

from .cli import RunConfig
from .config import ConfigError, TaskFileError
from .core import Action
from .mapgen import generate_map
from .observe import Observation, terminal_observation
from .replay import ReplayWriter, derive_seed, state_hash
from .rewards import shaped_reward
from .tasks import sample_assignments
from .world import WorldState, reset

ABI = "gridarena-abi-1"

_WIRE_DTYPES = {
    np.dtype(np.float32): "<f4",
    np.dtype(np.float64): "<f8",
    np.dtype(np.int64): "<i8",
    np.dtype(np.bool_): "|u1",
}


def _encode_array(array: np.ndarray) -> dict:
    wire = _WIRE_DTYPES[array.dtype]
    data = array.astype(wire if wire != "|u1" else np.uint8).tobytes(order="C")
    return {
        "dtype": wire,
        "shape": list(array.shape),
        "b64": base64.b64encode(data).decode("ascii"),
    }


def _encode_observations(observations: dict[int, Observation], num_agents: int) -> dict:
    blocks: dict[str, dict] = {}
    sample = observations[0].flat_blocks()
    for name, _ in sample:
        stacked = np.stack([dict(observations[i].flat_blocks())[name] for i in range(num_agents)])
        blocks[name] = _encode_array(stacked)
    return blocks


class _Session:
    def __init__(self, run: RunConfig):
        self.run = run
        self.world: WorldState | None = None
        self.writer: ReplayWriter | None = None

    def hello(self) -> dict:
        sample_names = [
            "tiles",
            "tile_mask",
            "entities",
            "entity_mask",
            "entity_ids",
            "inventory",
            "inventory_mask",
            "market",
            "market_mask",
            "market_ids",
            "self_stats",
            "task_embedding",
        ]
        return {
            "hello": {
                "abi": ABI,
                "num_agents": self.run.env.num_agents,
                "max_ticks": self.run.env.max_ticks,
                "blocks": sample_names,
                "action_shape": [self.run.env.num_agents, 3],
            }
        }

    def reset(self, seed: int) -> dict:
        env = self.run.env
        curriculum = self.run.load_curriculum("train")
        map_seed = derive_seed(seed, "map")
        tasks_seed = derive_seed(seed, "tasks")
        episode_seed = derive_seed(seed, "env")
        grid = generate_map(map_seed, env.map_size)
        assignments = sample_assignments(curriculum, env.num_agents, tasks_seed)
        self.world, observations = reset(env, grid, assignments, seed=episode_seed)
        self.writer = ReplayWriter(env.to_dict(), episode_seed, map_seed)
        return {
            "ok": {
                "tick": 0,
                "obs": _encode_observations(observations, env.num_agents),
            }
        }

    def step(self, actions_wire) -> dict:
        if self.world is None:
            return _error("no_episode", "call reset before step")
        if self.world.done:
            return _error("episode_done", "episode is done; reset to start another")
        env = self.run.env
        n = env.num_agents
        if not isinstance(actions_wire, list) or len(actions_wire) != n:
            return _error("bad_actions", f"expected {n} action triples")
        actions: dict[int, Action] = {}
        for agent_id, row in enumerate(actions_wire):
            if not isinstance(row, list) or len(row) != 3:
                return _error("bad_actions", f"action row {agent_id} must be [kind, a, b]")
            try:
                actions[agent_id] = Action.from_code(int(row[0]), int(row[1]), int(row[2]))
            except (ValueError, TypeError) as exc:
                return _error("bad_actions", f"action row {agent_id}: {exc}")

        result = self.world.step(actions)
        self.writer.record_tick(self.world, result.events)

        observations = dict(result.observations)
        for agent_id in range(n):
            if agent_id not in observations:
                observations[agent_id] = terminal_observation(self.world, agent_id)
        rewards = np.zeros(n, dtype=np.float64)
        for agent_id, delta in result.deltas.items():
            rewards[agent_id] = shaped_reward(self.run.rewards, delta)
        dones = np.array(
            [result.done or not self.world.agents[i].alive for i in range(n)], dtype=bool
        )
        info = {
            "tick": self.world.tick,
            "done": result.done,
            "deaths": result.deaths,
            "events": len(result.events),
            "illegal_actions": result.illegal_actions,
            "progress": [a.progress for a in self.world.assignments],
            "completed": [a.completed for a in self.world.assignments],
        }
        return {
            "ok": {
                "obs": _encode_observations(observations, n),
                "rewards": _encode_array(rewards),
                "dones": _encode_array(dones),
                "info": info,
            }
        }

    def hashes(self) -> dict:
        if self.world is None or self.writer is None:
            return _error("no_episode", "call reset first")
        return {
            "ok": {"state_hash": state_hash(self.world), "replay_hash": self.writer.replay_hash}
        }


def _error(kind: str, message: str) -> dict:
    return {"error": {"type": kind, "message": message}}


def serve_stdio(config_path: str | None, stdin: IO[str], stdout: IO[str]) -> int:
    def send(obj: dict) -> None:
        stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
        stdout.flush()

    try:
        run = RunConfig.load(config_path)
        session = _Session(run)
    except (ConfigError, TaskFileError) as exc:
        send(_error("config", str(exc)))
        return 2

    send(session.hello())
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            send(_error("bad_request", f"invalid JSON: {exc}"))
            continue
        op = request.get("op")
        try:
            if op == "reset":
                send(session.reset(int(request.get("seed", 0))))
            elif op == "step":
                send(session.step(request.get("actions")))
            elif op == "hashes":
                send(session.hashes())
            elif op == "close":
                send({"ok": {}})
                return 0
            else:
                send(_error("bad_request", f"unknown op {op!r}"))
        except (ConfigError, TaskFileError) as exc:
            send(_error("config", str(exc)))
        except Exception as exc:  # protocol robustness: report, keep serving
            send(_error("internal", f"{type(exc).__name__}: {exc}"))
    return 0
