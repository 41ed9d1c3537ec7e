/** Environment handle over the stdio JSONL server.
 *
 * One child process per Env; the protocol is strict request/response, so a
 * FIFO of pending resolvers is enough. The server's hello carries the ABI
 * string, checked before any request is allowed out.
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface, type Interface } from "node:readline";

import { AbiMismatchError, ConfigError, GridArenaError, ProtocolError, mapServerError } from "./errors.js";
import {
  decodeArray,
  decodeObservations,
  type ActionTriple,
  type ObservationBatch,
  type StepResult,
  type WireArray,
} from "./protocol.js";

export const ABI = "gridarena-abi-1";

export type EnvOptions = {
  /** Python interpreter to launch (default "python3"). */
  python?: string;
  /** Extra environment variables for the server process. */
  env?: Record<string, string>;
};

type Pending = {
  resolve: (reply: Record<string, unknown>) => void;
  reject: (error: Error) => void;
};

export type HelloInfo = {
  abi: string;
  num_agents: number;
  max_ticks: number;
  blocks: string[];
  action_shape: [number, number];
};

export class Env {
  readonly configPath: string | null;
  private child: ChildProcessWithoutNullStreams;
  private lines: Interface;
  private pending: Pending[] = [];
  private helloPromise: Promise<HelloInfo>;
  private hello: HelloInfo | null = null;
  private closed = false;
  private stderrTail = "";

  constructor(configPath: string | null = null, options: EnvOptions = {}) {
    this.configPath = configPath;
    const args = ["-m", "gridarena.cli", "serve"];
    if (configPath !== null) {
      args.push("--config", configPath);
    }
    this.child = spawn(options.python ?? "python3", args, {
      stdio: ["pipe", "pipe", "pipe"],
      env: { ...process.env, ...options.env },
    });
    this.child.stderr.on("data", (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString()).slice(-2000);
    });
    this.lines = createInterface({ input: this.child.stdout });

    let resolveHello!: (value: HelloInfo) => void;
    let rejectHello!: (error: Error) => void;
    this.helloPromise = new Promise<HelloInfo>((resolve, reject) => {
      resolveHello = resolve;
      rejectHello = reject;
    });

    let sawHello = false;
    this.lines.on("line", (line) => {
      let payload: Record<string, unknown>;
      try {
        payload = JSON.parse(line);
      } catch {
        this.failAll(new ProtocolError(`unparseable server line: ${line.slice(0, 200)}`));
        return;
      }
      if (!sawHello) {
        sawHello = true;
        if ("error" in payload) {
          const err = payload.error as { type: string; message: string };
          rejectHello(mapServerError(err.type, err.message));
          return;
        }
        const hello = (payload as { hello?: HelloInfo }).hello;
        if (!hello) {
          rejectHello(new ProtocolError("server did not send a hello"));
          return;
        }
        if (hello.abi !== ABI) {
          rejectHello(new AbiMismatchError(`server ABI ${hello.abi}, bindings expect ${ABI}`));
          return;
        }
        this.hello = hello;
        resolveHello(hello);
        return;
      }
      const waiter = this.pending.shift();
      if (waiter) {
        waiter.resolve(payload);
      }
    });
    this.child.on("exit", (code) => {
      if (!sawHello) {
        sawHello = true;
        rejectHello(
          new ConfigError(`server exited with code ${code} before hello: ${this.stderrTail}`),
        );
      }
      this.failAll(new ProtocolError(`server exited with code ${code}: ${this.stderrTail}`));
    });
  }

  private failAll(error: Error): void {
    const waiters = this.pending;
    this.pending = [];
    for (const waiter of waiters) {
      waiter.reject(error);
    }
  }

  /** Resolves once the hello arrived and the ABI string checked out. */
  ready(): Promise<HelloInfo> {
    return this.helloPromise;
  }

  get info(): HelloInfo {
    if (!this.hello) {
      throw new ProtocolError("server not ready; await ready() first");
    }
    return this.hello;
  }

  private async request(body: Record<string, unknown>): Promise<Record<string, unknown>> {
    await this.helloPromise;
    if (this.closed) {
      throw new ProtocolError("environment already closed");
    }
    const reply = await new Promise<Record<string, unknown>>((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.child.stdin.write(JSON.stringify(body) + "\n");
    });
    if ("error" in reply) {
      const err = reply.error as { type: string; message: string };
      throw mapServerError(err.type, err.message);
    }
    return reply.ok as Record<string, unknown>;
  }

  /** Start a fresh episode; observation arrays have leading dim num_agents. */
  async reset(seed: number): Promise<ObservationBatch> {
    const ok = await this.request({ op: "reset", seed });
    return decodeObservations(ok.obs as Record<string, WireArray>);
  }

  /** Advance one tick. Requires exactly num_agents action triples. */
  async step(actions: ActionTriple[] | number[][]): Promise<StepResult> {
    const ok = await this.request({ op: "step", actions });
    return {
      obs: decodeObservations(ok.obs as Record<string, WireArray>),
      rewards: decodeArray(ok.rewards as WireArray).data as Float64Array,
      dones: decodeArray(ok.dones as WireArray).data as Uint8Array,
      info: ok.info as StepResult["info"],
    };
  }

  /** Canonical state and replay hashes of the current episode. */
  async hashes(): Promise<{ state_hash: string; replay_hash: string }> {
    const ok = await this.request({ op: "hashes" });
    return ok as { state_hash: string; replay_hash: string };
  }

  async close(): Promise<void> {
    if (this.closed) {
      return;
    }
    this.closed = true;
    try {
      await this.helloPromise.catch(() => undefined);
      this.child.stdin.write(JSON.stringify({ op: "close" }) + "\n");
    } catch {
      // the pipe may already be gone; kill below regardless
    }
    const exited = new Promise<void>((resolve) => {
      this.child.once("exit", () => resolve());
      setTimeout(() => {
        this.child.kill();
        resolve();
      }, 2000).unref();
    });
    await exited;
  }
}

export { GridArenaError };
