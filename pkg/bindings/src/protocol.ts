/** Wire format helpers: base64 little-endian buffers into typed arrays. */

import { ProtocolError } from "./errors.js";

export type WireArray = {
  dtype: "<f4" | "<f8" | "<i8" | "|u1";
  shape: number[];
  b64: string;
};

export type TypedBlock = {
  shape: number[];
  data: Float32Array | Float64Array | BigInt64Array | Uint8Array;
};

/** Per-agent observation blocks, leading dimension num_agents. Block order
 * mirrors the native observation field order. */
export type ObservationBatch = Record<string, TypedBlock>;

export type StepInfo = {
  tick: number;
  done: boolean;
  deaths: number[];
  events: number;
  illegal_actions: number;
  progress: number[];
  completed: boolean[];
};

export type StepResult = {
  obs: ObservationBatch;
  rewards: Float64Array;
  dones: Uint8Array;
  info: StepInfo;
};

export function decodeArray(wire: WireArray): TypedBlock {
  const raw = Buffer.from(wire.b64, "base64");
  const bytes = new Uint8Array(raw.byteLength);
  bytes.set(raw);
  const buffer = bytes.buffer;
  let data: TypedBlock["data"];
  switch (wire.dtype) {
    case "<f4":
      data = new Float32Array(buffer);
      break;
    case "<f8":
      data = new Float64Array(buffer);
      break;
    case "<i8":
      data = new BigInt64Array(buffer);
      break;
    case "|u1":
      data = new Uint8Array(buffer);
      break;
    default:
      throw new ProtocolError(`unknown wire dtype ${(wire as WireArray).dtype}`);
  }
  const expected = wire.shape.reduce((a, b) => a * b, 1);
  if (data.length !== expected) {
    throw new ProtocolError(
      `decoded ${data.length} elements but shape ${JSON.stringify(wire.shape)} needs ${expected}`,
    );
  }
  return { shape: wire.shape, data };
}

export function decodeObservations(blocks: Record<string, WireArray>): ObservationBatch {
  const out: ObservationBatch = {};
  for (const [name, wire] of Object.entries(blocks)) {
    out[name] = decodeArray(wire);
  }
  return out;
}

/** Action triples [kind, a, b]; kinds: 0 noop, 1 move(dir), 2 attack(style,
 * slot), 3 use(slot), 4 sell(slot, price), 5 buy(slot), 6 giveItem(slot,
 * target), 7 giveGold(amount, target). */
export type ActionTriple = [number, number, number];

export const Actions = {
  noop(): ActionTriple {
    return [0, 0, 0];
  },
  move(direction: number): ActionTriple {
    return [1, direction, 0];
  },
  attack(style: number, targetSlot: number): ActionTriple {
    return [2, style, targetSlot];
  },
  use(slot: number): ActionTriple {
    return [3, slot, 0];
  },
  sell(slot: number, price: number): ActionTriple {
    return [4, slot, price];
  },
  buy(marketSlot: number): ActionTriple {
    return [5, marketSlot, 0];
  },
};
