/** Tournament runner access: shells the native eval command and parses its
 * JSON report. */

import { execFile } from "node:child_process";
import { readFile } from "node:fs/promises";
import { join } from "node:path";
import { promisify } from "node:util";

import { ConfigError } from "./errors.js";

const run = promisify(execFile);

export type PolicyReport = {
  policy: string;
  completion_rate: number;
  mean_progress: number;
  mean_lifespan: number;
  weighted_score: number;
  rank: number | null;
  trials: number;
  completions: number;
};

export type EvalReport = {
  mode: "pve" | "pvp";
  seed: number;
  reports: PolicyReport[];
  lifespan_rank_correlation?: number;
};

export async function runEval(
  configPath: string,
  mode: "pve" | "pvp",
  outDir: string,
  options: { python?: string; seed?: number; jobs?: number } = {},
): Promise<EvalReport> {
  const args = ["-m", "gridarena.cli", "eval", "--config", configPath, "--mode", mode, "--out", outDir];
  if (options.seed !== undefined) {
    args.push("--seed", String(options.seed));
  }
  if (options.jobs !== undefined) {
    args.push("--jobs", String(options.jobs));
  }
  try {
    await run(options.python ?? "python3", args);
  } catch (error) {
    throw new ConfigError(`eval failed: ${(error as Error).message}`);
  }
  const text = await readFile(join(outDir, `report_${mode}.json`), "utf-8");
  return JSON.parse(text) as EvalReport;
}
