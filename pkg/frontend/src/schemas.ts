/**
 * Zod schemas for everything that crosses a boundary: server response
 * payloads and the TD3 training configuration file.
 */

import { z } from 'zod';

export const OBSERVATION_SIZE = 13;
export const ACTION_SIZE = 3;

const observationSchema = z.array(z.number()).length(OBSERVATION_SIZE);

export const createPayloadSchema = z.object({
  env_id: z.string(),
  seed: z.number().int(),
  mode: z.object({
    kind: z.enum(['synchronous', 'asynchronous']),
    ticks_per_inference: z.number().int().min(1),
  }),
  slots: z.array(z.string()),
  external_slots: z.array(z.string()),
  observation_size: z.literal(OBSERVATION_SIZE),
  action_size: z.literal(ACTION_SIZE),
});

export const resetPayloadSchema = z.object({
  observations: z.record(z.string(), observationSchema),
  seed: z.number().int(),
});

export const stepResultSchema = z.object({
  observation: observationSchema,
  reward: z.number(),
  done: z.boolean(),
  status: z.string().nullable(),
});

export const stepPayloadSchema = z.object({
  results: z.record(z.string(), stepResultSchema),
  tick: z.number().int(),
  events: z.array(z.record(z.string(), z.unknown())),
  episode_done: z.boolean(),
});

export type StepPayload = z.infer<typeof stepPayloadSchema>;
export type StepResult = z.infer<typeof stepResultSchema>;

/**
 * TD3 hyperparameters. The stock setup: learning rates 1e-3 under Adam,
 * target update rate 5e-3, batch 100, discount 0.99, hidden layers 400/300,
 * normalized observations. Exploration noise (sigma 0.1) and warm-up (1000
 * uniform random steps) are documented defaults, as are the standard TD3
 * internals (policy delay 2, target smoothing noise 0.2 clipped at 0.5).
 */
export const td3ConfigSchema = z.object({
  actor_learning_rate: z.number().positive().default(1e-3),
  critic_learning_rate: z.number().positive().default(1e-3),
  target_update_rate: z.number().positive().max(1).default(5e-3),
  batch_size: z.number().int().positive().default(100),
  discount: z.number().min(0).max(1).default(0.99),
  hidden_layers: z.tuple([z.number().int().positive(), z.number().int().positive()])
    .default([400, 300]),
  normalize_observations: z.boolean().default(true),
  exploration_noise: z.number().min(0).default(0.1),
  warmup_steps: z.number().int().min(0).default(1000),
  update_every: z.number().int().positive().default(1),
  gradient_steps: z.number().int().positive().default(1),
  policy_delay: z.number().int().positive().default(2),
  target_noise: z.number().min(0).default(0.2),
  target_noise_clip: z.number().min(0).default(0.5),
  buffer_size: z.number().int().positive().default(100_000),
  seed: z.number().int().default(0),
});

export type TD3Config = z.infer<typeof td3ConfigSchema>;

export function parseTd3Config(raw: unknown): TD3Config {
  return td3ConfigSchema.parse(raw ?? {});
}
