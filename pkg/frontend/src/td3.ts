/**
 * Twin-delayed DDPG (TD3) for the 13-observation / 3-action flight tasks:
 * twin critics trained on the smaller of the two target values, a delayed
 * deterministic actor, Gaussian-smoothed target actions, and soft target
 * tracking. HER is deliberately not implemented; this is plain TD3.
 *
 * Every source of randomness is seeded (weight initializers, target
 * smoothing noise, the caller's exploration noise), so a training run is
 * replayable end to end.
 */

import * as tf from '@tensorflow/tfjs';
import { TransitionBatch } from './buffer';
import { TD3Config } from './schemas';

export class DivergenceError extends Error {}

export interface UpdateStats {
  criticLoss: number;
  actorLoss: number | null;
}

function denseStack(
  input: tf.SymbolicTensor,
  hidden: readonly [number, number],
  seed: number,
): tf.SymbolicTensor {
  let x = input;
  hidden.forEach((units, index) => {
    x = tf.layers.dense({
      units,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + index }),
    }).apply(x) as tf.SymbolicTensor;
  });
  return x;
}

// Vanishingly small output-layer weights keep the initial policy near zero
// deflection and inside tanh's linear band. A wide init starts the actor at
// the action bounds, where the tanh gradient is flat and early critic noise
// pins it into constant full-deflection output for good.
const OUTPUT_INIT_SCALE = 3e-3;

function outputInit(seed: number) {
  return tf.initializers.randomUniform({
    minval: -OUTPUT_INIT_SCALE, maxval: OUTPUT_INIT_SCALE, seed,
  });
}

function buildActor(obsSize: number, actionSize: number,
                    hidden: readonly [number, number], seed: number): tf.LayersModel {
  const input = tf.input({ shape: [obsSize] });
  const trunk = denseStack(input, hidden, seed);
  const output = tf.layers.dense({
    units: actionSize,
    activation: 'tanh',
    kernelInitializer: outputInit(seed + 17),
    biasInitializer: outputInit(seed + 18),
  }).apply(trunk) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: output });
}

function buildCritic(obsSize: number, actionSize: number,
                     hidden: readonly [number, number], seed: number): tf.LayersModel {
  const input = tf.input({ shape: [obsSize + actionSize] });
  const trunk = denseStack(input, hidden, seed);
  const output = tf.layers.dense({
    units: 1,
    kernelInitializer: outputInit(seed + 17),
    biasInitializer: outputInit(seed + 18),
  }).apply(trunk) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: output });
}

function cloneFrom(source: tf.LayersModel, build: () => tf.LayersModel): tf.LayersModel {
  const target = build();
  target.setWeights(source.getWeights());
  return target;
}

function trainables(model: tf.LayersModel): tf.Variable[] {
  // minimize() needs the backing tf.Variables; LayerVariable keeps them
  // behind a protected field with no typed public accessor.
  return model.trainableWeights.map(
    (weight) => (weight as unknown as { val: tf.Variable }).val);
}

export class TD3Agent {
  readonly actor: tf.LayersModel;
  readonly critic1: tf.LayersModel;
  readonly critic2: tf.LayersModel;
  private readonly targetActor: tf.LayersModel;
  private readonly targetCritic1: tf.LayersModel;
  private readonly targetCritic2: tf.LayersModel;
  private readonly actorOptimizer: tf.Optimizer;
  private readonly criticOptimizer: tf.Optimizer;
  private updates = 0;

  constructor(readonly obsSize: number, readonly actionSize: number,
              readonly config: TD3Config) {
    const seed = config.seed;
    const hidden = config.hidden_layers;
    this.actor = buildActor(obsSize, actionSize, hidden, seed + 100);
    this.critic1 = buildCritic(obsSize, actionSize, hidden, seed + 200);
    this.critic2 = buildCritic(obsSize, actionSize, hidden, seed + 300);
    this.targetActor = cloneFrom(this.actor,
      () => buildActor(obsSize, actionSize, hidden, seed + 100));
    this.targetCritic1 = cloneFrom(this.critic1,
      () => buildCritic(obsSize, actionSize, hidden, seed + 200));
    this.targetCritic2 = cloneFrom(this.critic2,
      () => buildCritic(obsSize, actionSize, hidden, seed + 300));
    this.actorOptimizer = tf.train.adam(config.actor_learning_rate);
    this.criticOptimizer = tf.train.adam(config.critic_learning_rate);
  }

  /** Deterministic policy output for one observation. */
  act(observation: number[]): number[] {
    return tf.tidy(() => {
      const action = this.actor.predict(tf.tensor2d([observation])) as tf.Tensor;
      return Array.from(action.dataSync());
    });
  }

  get updateCount(): number {
    return this.updates;
  }

  /** One gradient step on the critics, plus the delayed actor/target step. */
  update(batch: TransitionBatch): UpdateStats {
    this.updates += 1;
    let criticLossValue = Number.NaN;
    let actorLossValue: number | null = null;
    tf.tidy(() => {
      const states = tf.tensor2d(batch.states);
      const actions = tf.tensor2d(batch.actions);
      const rewards = tf.tensor2d(batch.rewards, [batch.rewards.length, 1]);
      const nextStates = tf.tensor2d(batch.nextStates);
      const notDone = tf.scalar(1).sub(tf.tensor2d(batch.dones, [batch.dones.length, 1]));

      // Smoothed, clipped target actions; seeded per update for replayability.
      const raw = this.targetActor.predict(nextStates) as tf.Tensor;
      const noise = tf.randomNormal(raw.shape as [number, number], 0,
        this.config.target_noise, 'float32', this.config.seed + this.updates)
        .clipByValue(-this.config.target_noise_clip, this.config.target_noise_clip);
      const smoothed = raw.add(noise).clipByValue(-1, 1);
      const joined = tf.concat([nextStates, smoothed], 1);
      const q1Target = this.targetCritic1.predict(joined) as tf.Tensor;
      const q2Target = this.targetCritic2.predict(joined) as tf.Tensor;
      const targets = rewards.add(
        notDone.mul(tf.scalar(this.config.discount)).mul(tf.minimum(q1Target, q2Target)));

      const observed = tf.concat([states, actions], 1);
      const criticLoss = this.criticOptimizer.minimize(() => {
        const q1 = this.critic1.predict(observed) as tf.Tensor;
        const q2 = this.critic2.predict(observed) as tf.Tensor;
        return tf.losses.meanSquaredError(targets, q1)
          .add(tf.losses.meanSquaredError(targets, q2)) as tf.Scalar;
      }, true, [...trainables(this.critic1), ...trainables(this.critic2)])!;
      criticLossValue = criticLoss.dataSync()[0];

      if (this.updates % this.config.policy_delay === 0) {
        const actorLoss = this.actorOptimizer.minimize(() => {
          const proposed = this.actor.predict(states) as tf.Tensor;
          const value = this.critic1.predict(tf.concat([states, proposed], 1)) as tf.Tensor;
          return value.mean().neg() as tf.Scalar;
        }, true, trainables(this.actor))!;
        actorLossValue = actorLoss.dataSync()[0];
      }
    });
    const stats: UpdateStats = { criticLoss: criticLossValue, actorLoss: actorLossValue };

    if (!Number.isFinite(stats.criticLoss)
        || (stats.actorLoss !== null && !Number.isFinite(stats.actorLoss))) {
      throw new DivergenceError(
        `training diverged at update ${this.updates}: ` +
        `critic loss ${stats.criticLoss}, actor loss ${stats.actorLoss} ` +
        `(lr ${this.config.critic_learning_rate}/${this.config.actor_learning_rate}, ` +
        `batch ${this.config.batch_size})`);
    }

    if (this.updates % this.config.policy_delay === 0) {
      this.softUpdate(this.actor, this.targetActor);
      this.softUpdate(this.critic1, this.targetCritic1);
      this.softUpdate(this.critic2, this.targetCritic2);
    }
    return stats;
  }

  private softUpdate(source: tf.LayersModel, target: tf.LayersModel): void {
    const tau = this.config.target_update_rate;
    tf.tidy(() => {
      const mixed = source.getWeights().map((weight, index) =>
        weight.mul(tau).add(target.getWeights()[index].mul(1 - tau)));
      target.setWeights(mixed);
    });
  }

  dispose(): void {
    for (const model of [this.actor, this.critic1, this.critic2,
                         this.targetActor, this.targetCritic1, this.targetCritic2]) {
      model.dispose();
    }
    this.actorOptimizer.dispose();
    this.criticOptimizer.dispose();
  }
}
