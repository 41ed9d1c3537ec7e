export { ABI, Env, type EnvOptions, type HelloInfo } from "./env.js";
export {
  Actions,
  decodeArray,
  decodeObservations,
  type ActionTriple,
  type ObservationBatch,
  type StepInfo,
  type StepResult,
  type TypedBlock,
  type WireArray,
} from "./protocol.js";
export {
  AbiMismatchError,
  ActionShapeError,
  ConfigError,
  EpisodeDoneError,
  GridArenaError,
  NoEpisodeError,
  ProtocolError,
} from "./errors.js";
export { runEval, type EvalReport, type PolicyReport } from "./tournament.js";
