/**
 * TypeScript client for the flight-combat environment server: the framed
 * JSON wire protocol, a gym-style remote environment handle, and a seeded
 * TD3 trainer.
 */

export { selectBackend } from './backend';
export { FrameDecoder, FramingError, MAX_FRAME_BYTES, encodeFrame } from './frames';
export { Connection, PROTOCOL_SCHEMA, ProtocolFailure, ServerError } from './connection';
export {
  ACTION_SIZE,
  OBSERVATION_SIZE,
  parseTd3Config,
  td3ConfigSchema,
} from './schemas';
export type { TD3Config } from './schemas';
export { Rng } from './rng';
export { RemoteEnvHandle, RewardMismatchError, makeEnv, recomputeReward } from './env';
export type { MakeEnvOptions, RewardSpecView, RunMode, StepOutcome } from './env';
export { ObservationNormalizer } from './normalizer';
export { ReplayBuffer } from './buffer';
export type { Transition, TransitionBatch } from './buffer';
export { DivergenceError, TD3Agent } from './td3';
export type { UpdateStats } from './td3';
export { loadTd3Config, randomPolicyRun, td3Train } from './train';
export type { EpisodeRecord, TrainOptions, TrainResult } from './train';
