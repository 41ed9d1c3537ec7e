import { execFile } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { afterEach, describe, expect, it } from "vitest";

import {
  Actions,
  ActionShapeError,
  ConfigError,
  Env,
  EpisodeDoneError,
  NoEpisodeError,
  runEval,
  type ActionTriple,
} from "../src/index.js";

const exec = promisify(execFile);

// The numpy kernel backend is bit-identical to numba and skips JIT warmup,
// which keeps these process-spawning tests fast.
const SERVER_ENV = { ARENA_BACKEND: "numpy" };

const PARITY_ENV = {
  num_agents: 6,
  map_size: 32,
  max_ticks: 256,
  num_npcs: 6,
  seed: 0,
};

function writeConfig(body: Record<string, unknown>): string {
  const dir = mkdtempSync(join(tmpdir(), "gridarena-"));
  const path = join(dir, "run.json");
  writeFileSync(path, JSON.stringify(body));
  return path;
}

const envs: Env[] = [];

function makeEnv(configPath: string | null): Env {
  const env = new Env(configPath, { env: SERVER_ENV });
  envs.push(env);
  return env;
}

afterEach(async () => {
  while (envs.length) {
    await envs.pop()!.close();
  }
});

function cycleActions(tick: number, numAgents: number): ActionTriple[] {
  const rows: ActionTriple[] = [];
  for (let i = 0; i < numAgents; i++) {
    rows.push(Actions.move((tick + i) % 4));
  }
  return rows;
}

async function nativeHashes(configPath: string, seed: number) {
  const { stdout } = await exec(
    "python3",
    ["-m", "gridarena.cli", "simulate", "--config", configPath, "--seed", String(seed), "--policy", "cycle"],
    { env: { ...process.env, ...SERVER_ENV } },
  );
  return JSON.parse(stdout) as { state_hash: string; replay_hash: string; ticks: number };
}

describe("Env handshake", () => {
  it("checks the ABI string and reports the population", async () => {
    const env = makeEnv(writeConfig({ env: PARITY_ENV }));
    const hello = await env.ready();
    expect(hello.abi).toBe("gridarena-abi-1");
    expect(hello.num_agents).toBe(6);
    expect(hello.action_shape).toEqual([6, 3]);
  });

  it("maps a malformed config to ConfigError", async () => {
    const dir = mkdtempSync(join(tmpdir(), "gridarena-bad-"));
    const path = join(dir, "broken.json");
    writeFileSync(path, "{not json");
    const env = makeEnv(path);
    await expect(env.ready()).rejects.toBeInstanceOf(ConfigError);
  });

  it("maps unknown config keys to ConfigError", async () => {
    const env = makeEnv(writeConfig({ env: { bogus_knob: 1 } }));
    await expect(env.ready()).rejects.toBeInstanceOf(ConfigError);
  });
});

describe("reset and step", () => {
  it("returns observation arrays with leading dimension num_agents", async () => {
    const env = makeEnv(writeConfig({ env: PARITY_ENV }));
    const hello = await env.ready();
    const obs = await env.reset(3);
    for (const name of hello.blocks) {
      expect(obs[name]).toBeDefined();
      expect(obs[name].shape[0]).toBe(6);
    }
    expect(obs.self_stats.shape).toEqual([6, 13]);
    expect(obs.task_embedding.shape).toEqual([6, 64]);
    const stats = obs.self_stats.data as Float32Array;
    expect(stats[0]).toBeCloseTo(1.0, 6); // full health scales to 1
  });

  it("rejects wrong-shaped and unknown-code actions", async () => {
    const env = makeEnv(writeConfig({ env: PARITY_ENV }));
    await env.ready();
    await env.reset(1);
    await expect(env.step([[0, 0, 0]])).rejects.toBeInstanceOf(ActionShapeError);
    const badRow = [[0, 0]].concat(Array(5).fill([0, 0, 0]));
    await expect(env.step(badRow as number[][])).rejects.toBeInstanceOf(ActionShapeError);
    const badCode: ActionTriple[] = Array(6).fill([42, 0, 0]);
    await expect(env.step(badCode)).rejects.toBeInstanceOf(ActionShapeError);
  });

  it("raises NoEpisodeError before reset and EpisodeDoneError after the end", async () => {
    const shortEnv = { ...PARITY_ENV, max_ticks: 4 };
    const env = makeEnv(writeConfig({ env: shortEnv }));
    await env.ready();
    const noop: ActionTriple[] = Array(6).fill(Actions.noop());
    await expect(env.step(noop)).rejects.toBeInstanceOf(NoEpisodeError);
    await env.reset(2);
    let lastDones: Uint8Array | null = null;
    for (let t = 0; t < 4; t++) {
      const result = await env.step(noop);
      lastDones = result.dones;
    }
    expect(Array.from(lastDones!)).toEqual([1, 1, 1, 1, 1, 1]);
    await expect(env.step(noop)).rejects.toBeInstanceOf(EpisodeDoneError);
  });

  it("carries rewards, dones, and task progress in step results", async () => {
    const env = makeEnv(writeConfig({ env: PARITY_ENV, rewards: { preset: "mori" } }));
    await env.ready();
    await env.reset(5);
    const result = await env.step(cycleActions(0, 6));
    expect(result.rewards.length).toBe(6);
    expect(result.dones.length).toBe(6);
    expect(result.info.progress.length).toBe(6);
    expect(result.info.tick).toBe(1);
  });
});

describe("boundary parity", () => {
  it("reproduces the native replay hash over 256 scripted ticks for 5 seeds", async () => {
    const configPath = writeConfig({ env: PARITY_ENV });
    for (const seed of [11, 22, 33, 44, 55]) {
      const env = makeEnv(configPath);
      const hello = await env.ready();
      await env.reset(seed);
      let done = false;
      let tick = 0;
      while (!done && tick < PARITY_ENV.max_ticks) {
        const result = await env.step(cycleActions(tick, hello.num_agents));
        done = result.info.done;
        tick += 1;
      }
      const served = await env.hashes();
      await env.close();
      const native = await nativeHashes(configPath, seed);
      expect(tick).toBe(native.ticks);
      expect(served.replay_hash).toBe(native.replay_hash);
      expect(served.state_hash).toBe(native.state_hash);
    }
  });
});

describe("tournament runner", () => {
  it("runs a desk-scale PvE eval and parses the report", async () => {
    const configPath = writeConfig({
      env: { num_agents: 4, map_size: 32, max_ticks: 16, num_npcs: 4, seed: 0 },
      tournament: {
        policies: ["random", "forage"],
        baseline: "noop",
        pve: { episodes: 3, map_seeds: [1] },
      },
      master_seed: 3,
    });
    const outDir = mkdtempSync(join(tmpdir(), "gridarena-out-"));
    const report = await runEval(configPath, "pve", outDir, { seed: 3 });
    expect(report.mode).toBe("pve");
    expect(report.reports.length).toBe(3);
    for (const entry of report.reports) {
      expect(entry.trials).toBeGreaterThan(0);
      expect(entry.completion_rate).toBeGreaterThanOrEqual(0);
      expect(entry.completion_rate).toBeLessThanOrEqual(100);
    }
  });
});
