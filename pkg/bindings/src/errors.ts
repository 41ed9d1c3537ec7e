/** Typed exceptions mapped from server error responses. */

export class GridArenaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** Malformed run config, unreadable task files, invalid parameters. */
export class ConfigError extends GridArenaError {}

/** Wrong action array shape or unknown action codes. */
export class ActionShapeError extends GridArenaError {}

/** step() after the episode finished (all dones true). */
export class EpisodeDoneError extends GridArenaError {}

/** step() before reset(). */
export class NoEpisodeError extends GridArenaError {}

/** ABI string mismatch between this package and the server. */
export class AbiMismatchError extends GridArenaError {}

/** Server crashed, closed the pipe, or sent an unexpected payload. */
export class ProtocolError extends GridArenaError {}

export function mapServerError(kind: string, message: string): GridArenaError {
  switch (kind) {
    case "config":
      return new ConfigError(message);
    case "bad_actions":
      return new ActionShapeError(message);
    case "episode_done":
      return new EpisodeDoneError(message);
    case "no_episode":
      return new NoEpisodeError(message);
    default:
      return new ProtocolError(`${kind}: ${message}`);
  }
}
