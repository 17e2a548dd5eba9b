/**
 * TD3 training against a remote environment, replayable end to end: the
 * per-episode reset seed, the warm-up actions, the exploration noise and the
 * replay sampling all come from one seeded client RNG, and the network
 * weights from seeded initializers.
 *
 * Two artifacts per run: an episodic-reward CSV (episode,return,steps,status)
 * and a JSON Lines log of everything the client saw. The log shares the
 * server trace record shape (step, agents, events) but holds one record per
 * inference, not per physics tick, and carries no RNG draw counts, both of
 * which only the server can see; its header kind is "client_log" so the two
 * file families cannot be mistaken for each other.
 */

import * as fs from 'fs';
import { ReplayBuffer, TransitionBatch } from './buffer';
import { RemoteEnvHandle, StepOutcome } from './env';
import { ObservationNormalizer } from './normalizer';
import { Rng } from './rng';
import { TD3Config, parseTd3Config } from './schemas';
import { TD3Agent } from './td3';

/** Load and validate a config file; missing keys take schema defaults. */
export function loadTd3Config(path: string): TD3Config {
  return parseTd3Config(JSON.parse(fs.readFileSync(path, 'utf-8')));
}

export interface EpisodeRecord {
  episode: number;
  episodeReturn: number;
  steps: number;
  status: string | null;
}

export interface TrainOptions {
  episodes: number;
  /** Episodic-reward CSV path. */
  csvPath?: string;
  /** JSON Lines client log path. */
  logPath?: string;
  onEpisode?: (record: EpisodeRecord) => void;
}

export interface TrainResult {
  episodes: EpisodeRecord[];
  updates: number;
  totalSteps: number;
}

type ActFn = (observation: number[], totalStep: number) => number[];
type LearnFn = (state: number[], action: number[], outcome: StepOutcome) => void;

function clamp(value: number, low: number, high: number): number {
  return Math.min(high, Math.max(low, value));
}

class LineSink {
  private readonly stream: fs.WriteStream;

  constructor(path: string) {
    this.stream = fs.createWriteStream(path, { encoding: 'utf-8' });
  }

  line(text: string): void {
    this.stream.write(text + '\n');
  }

  close(): Promise<void> {
    return new Promise((resolve) => this.stream.end(() => resolve()));
  }
}

/**
 * Drive `opts.episodes` episodes: reset with seed `config.seed + episode`,
 * act with `act`, feed every transition to `learn`, and write the CSV and
 * log sinks as results arrive so an aborted run still leaves its artifacts.
 */
async function driveEpisodes(
  env: RemoteEnvHandle,
  config: TD3Config,
  opts: TrainOptions,
  act: ActFn,
  learn: LearnFn | null,
): Promise<EpisodeRecord[]> {
  const csv = opts.csvPath === undefined ? null : new LineSink(opts.csvPath);
  const log = opts.logPath === undefined ? null : new LineSink(opts.logPath);
  csv?.line('episode,return,steps,status');
  log?.line(JSON.stringify({
    schema: 1,
    kind: 'client_log',
    env_id: env.envId,
    scenario: env.scenario,
    seed: config.seed,
    mode: env.mode,
  }));

  const records: EpisodeRecord[] = [];
  let totalSteps = 0;
  try {
    for (let episode = 0; episode < opts.episodes; episode += 1) {
      let observation = await env.reset(config.seed + episode);
      let episodeReturn = 0;
      let steps = 0;
      let status: string | null = null;
      for (;;) {
        const action = act(observation, totalSteps);
        const outcome = await env.step(action);
        totalSteps += 1;
        steps += 1;
        episodeReturn += outcome.reward;
        log?.line(JSON.stringify({
          step: totalSteps,
          agents: {
            [env.agentSlot]: {
              observation: outcome.observation,
              action,
              reward: outcome.reward,
              done: outcome.done,
              status: outcome.status,
            },
          },
          events: outcome.events,
        }));
        learn?.(observation, action, outcome);
        observation = outcome.observation;
        if (outcome.done || outcome.episodeDone) {
          status = outcome.status;
          break;
        }
      }
      const record = { episode, episodeReturn, steps, status };
      records.push(record);
      csv?.line(`${episode},${episodeReturn},${steps},${status ?? ''}`);
      opts.onEpisode?.(record);
    }
  } finally {
    await Promise.all([csv?.close(), log?.close()]);
  }
  return records;
}

function normalizeBatch(batch: TransitionBatch,
                        normalizer: ObservationNormalizer): TransitionBatch {
  return {
    ...batch,
    states: batch.states.map((state) => normalizer.normalize(state)),
    nextStates: batch.nextStates.map((state) => normalizer.normalize(state)),
  };
}

/**
 * Train a TD3 agent on the environment. The first `warmup_steps` actions are
 * uniform random; afterwards the policy acts with Gaussian exploration noise
 * (`exploration_noise`, clipped to the action range) and one gradient update
 * runs per `update_every` environment steps. Observations are stored raw and
 * normalized at network input with statistics gathered during warm-up; the
 * statistics freeze once updates begin so stored experience keeps a stable
 * normalized form.
 */
export async function td3Train(
  env: RemoteEnvHandle,
  config: TD3Config,
  opts: TrainOptions,
): Promise<TrainResult> {
  const rng = new Rng(config.seed);
  const agent = new TD3Agent(env.observationSize, env.actionSize, config);
  const buffer = new ReplayBuffer(config.buffer_size);
  const normalizer = new ObservationNormalizer(env.observationSize);
  const netInput = (observation: number[]): number[] =>
    config.normalize_observations ? normalizer.normalize(observation) : observation;

  let totalSteps = 0;
  const act: ActFn = (observation, step) => {
    if (step < config.warmup_steps) {
      return [rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)];
    }
    return agent.act(netInput(observation)).map((value) =>
      clamp(value + config.exploration_noise * rng.gaussian(), -1, 1));
  };

  const learn: LearnFn = (state, action, outcome) => {
    // Statistics settle on the warm-up data; freezing them afterwards keeps
    // every stored observation's normalized form, and with it the critic
    // targets, from drifting as training progresses.
    if (totalSteps < config.warmup_steps) normalizer.update(state);
    buffer.add({
      state,
      action,
      reward: outcome.reward,
      nextState: outcome.observation,
      // The time limit truncates rather than ends the task, so value
      // estimates bootstrap through it; other terminals stop the return.
      done: outcome.done && outcome.status !== 'timeout',
    });
    totalSteps += 1;
    if (totalSteps < config.warmup_steps || buffer.size < config.batch_size) {
      return;
    }
    if (totalSteps % config.update_every !== 0) return;
    for (let step = 0; step < config.gradient_steps; step += 1) {
      let batch = buffer.sample(config.batch_size, rng);
      if (config.normalize_observations) {
        batch = normalizeBatch(batch, normalizer);
      }
      agent.update(batch);
    }
  };

  try {
    const episodes = await driveEpisodes(env, config, opts, act, learn);
    return { episodes, updates: agent.updateCount, totalSteps };
  } finally {
    agent.dispose();
  }
}

/**
 * Learning-free control: the same episode seed schedule driven by uniform
 * random actions, for judging whether a reward trend is the policy or the
 * environment.
 */
export async function randomPolicyRun(
  env: RemoteEnvHandle,
  config: TD3Config,
  opts: TrainOptions,
): Promise<TrainResult> {
  const rng = new Rng(config.seed);
  const episodes = await driveEpisodes(
    env, config, opts,
    () => [rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)],
    null);
  const totalSteps = episodes.reduce((sum, record) => sum + record.steps, 0);
  return { episodes, updates: 0, totalSteps };
}
