/**
 * Gym-style handle over one remote environment: make it, reset it, step it
 * with a 3-float action, read back a 13-float observation, a scalar reward
 * and a done flag.
 */

import { Connection } from './connection';
import {
  ACTION_SIZE,
  OBSERVATION_SIZE,
  createPayloadSchema,
  resetPayloadSchema,
  stepPayloadSchema,
} from './schemas';

export interface RunMode {
  kind: 'synchronous' | 'asynchronous';
  ticks_per_inference: number;
}

export interface RewardSpecView {
  distanceScale: number;
  goalBonus: number;
  failurePenalty: number;
}

export interface MakeEnvOptions {
  /** Run mode for the environment; defaults to synchronous. */
  mode?: RunMode;
  /** Slot to attach; defaults to the first external slot. */
  slot?: string;
  /**
   * Recompute the reward from each observation and fail loudly if the
   * server's value drifts beyond 1e-9. Only meaningful for navigation
   * scenarios at one tick per inference, where the observation the client
   * sees is the one the reward was computed from.
   */
  rewardCheck?: RewardSpecView;
}

export interface StepOutcome {
  observation: number[];
  reward: number;
  done: boolean;
  status: string | null;
  tick: number;
  episodeDone: boolean;
  events: Record<string, unknown>[];
}

const SUCCESS_STATUSES = new Set(['success', 'victory', 'evaded']);
const REWARD_TOLERANCE = 1e-9;

export class RewardMismatchError extends Error {}

/**
 * Shaping reward implied by an observation: the first three components are
 * the world-frame delta to the objective.
 */
export function recomputeReward(
  observation: number[],
  spec: RewardSpecView,
  done: boolean,
  status: string | null,
): number {
  const distance = Math.hypot(observation[0], observation[1], observation[2]);
  let reward = -spec.distanceScale * distance;
  if (done && status !== null) {
    reward += SUCCESS_STATUSES.has(status) ? spec.goalBonus : spec.failurePenalty;
  }
  return reward;
}

export class RemoteEnvHandle {
  readonly observationSize = OBSERVATION_SIZE;
  readonly actionSize = ACTION_SIZE;

  private constructor(
    readonly connection: Connection,
    readonly envId: string,
    readonly agentSlot: string,
    readonly seed: number,
    readonly mode: RunMode,
    readonly scenario: string | Record<string, unknown>,
    private readonly rewardCheck?: RewardSpecView,
  ) {}

  /**
   * Create an environment on the server, attach to one external slot and
   * return the handle. `scenario` is a packaged scenario name or a full
   * scenario config object (the same JSON the server's files use).
   */
  static async makeEnv(
    address: string,
    scenario: string | Record<string, unknown>,
    options: MakeEnvOptions = {},
  ): Promise<RemoteEnvHandle> {
    const connection = await Connection.connect(address);
    try {
      const payload: Record<string, unknown> = { scenario };
      if (options.mode !== undefined) payload.mode = options.mode;
      const created = createPayloadSchema.parse(
        await connection.request('CreateEnv', { payload }));

      const slot = options.slot ?? created.external_slots[0];
      if (slot === undefined) {
        throw new Error(`scenario has no external slots (slots: ${created.slots})`);
      }
      await connection.request('AttachAgent', { envId: created.env_id, agentSlot: slot });
      return new RemoteEnvHandle(
        connection, created.env_id, slot, created.seed, created.mode,
        scenario, options.rewardCheck);
    } catch (error) {
      connection.close();
      throw error;
    }
  }

  /** Reset and return this slot's initial 13-float observation. */
  async reset(seed?: number): Promise<number[]> {
    const payload = seed === undefined ? {} : { seed };
    const response = resetPayloadSchema.parse(
      await this.connection.request('Reset', { envId: this.envId, payload }));
    return response.observations[this.agentSlot];
  }

  /**
   * Apply a 3-float action (rudder, elevator, aileron). Arity is checked
   * here; out-of-range component values are the server's job to clamp and
   * are deliberately passed through unchanged.
   */
  async step(action: number[]): Promise<StepOutcome> {
    if (action.length !== ACTION_SIZE) {
      throw new TypeError(`action must have ${ACTION_SIZE} components, got ${action.length}`);
    }
    const response = stepPayloadSchema.parse(
      await this.connection.request('Step', {
        envId: this.envId,
        payload: { actions: { [this.agentSlot]: action } },
      }));
    const result = response.results[this.agentSlot];
    const outcome: StepOutcome = {
      observation: result.observation,
      reward: result.reward,
      done: result.done,
      status: result.status,
      tick: response.tick,
      episodeDone: response.episode_done,
      events: response.events,
    };
    this.verifyReward(outcome);
    return outcome;
  }

  private verifyReward(outcome: StepOutcome): void {
    if (this.rewardCheck === undefined) return;
    const expected = recomputeReward(
      outcome.observation, this.rewardCheck, outcome.done, outcome.status);
    if (Math.abs(outcome.reward - expected) > REWARD_TOLERANCE) {
      throw new RewardMismatchError(
        `tick ${outcome.tick}: server reward ${outcome.reward}, ` +
        `recomputed ${expected} (|diff| > ${REWARD_TOLERANCE})`);
    }
  }

  async state(): Promise<Record<string, unknown>> {
    const payload = await this.connection.request('GetState', { envId: this.envId });
    return payload.state as Record<string, unknown>;
  }

  /** Destroy the server-side environment and drop the connection. */
  async close(): Promise<void> {
    try {
      await this.connection.request('DestroyEnv', { envId: this.envId });
    } finally {
      this.connection.close();
    }
  }
}

/**
 * Create an environment on the server and attach to it: the usual entry
 * point. One handle per connection; handles are fully independent.
 */
export function makeEnv(
  address: string,
  scenario: string | Record<string, unknown>,
  options: MakeEnvOptions = {},
): Promise<RemoteEnvHandle> {
  return RemoteEnvHandle.makeEnv(address, scenario, options);
}
