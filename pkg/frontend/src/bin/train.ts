#!/usr/bin/env node
/**
 * Command-line training run against a live environment server:
 *
 *   node dist/bin/train.js --address 127.0.0.1:10301 --scenario navigation_toy
 *
 * Writes the episodic-reward CSV (and optionally the client JSON Lines log)
 * and prints one line per episode. --random replaces the learner with
 * uniform random actions as a no-learning control.
 */

import * as path from 'path';
import { parseArgs } from 'util';
import { selectBackend } from '../backend';
import { makeEnv, RunMode } from '../env';
import { EpisodeRecord, loadTd3Config, randomPolicyRun, td3Train } from '../train';

async function main(): Promise<void> {
  const { values } = parseArgs({
    options: {
      address: { type: 'string', default: '127.0.0.1:10301' },
      scenario: { type: 'string', default: 'navigation_toy' },
      episodes: { type: 'string', default: '150' },
      'ticks-per-inference': { type: 'string', default: '10' },
      config: { type: 'string' },
      csv: { type: 'string', default: 'rewards.csv' },
      log: { type: 'string' },
      seed: { type: 'string' },
      random: { type: 'boolean', default: false },
    },
  });

  const configPath = values.config
    ?? path.join(__dirname, '..', '..', 'td3.config.json');
  let config = loadTd3Config(configPath);
  if (values.seed !== undefined) {
    config = { ...config, seed: Number(values.seed) };
  }

  const ticks = Number(values['ticks-per-inference']);
  const mode: RunMode = ticks > 1
    ? { kind: 'asynchronous', ticks_per_inference: ticks }
    : { kind: 'synchronous', ticks_per_inference: 1 };

  console.log(`backend: ${await selectBackend()}`);
  const env = await makeEnv(values.address as string, values.scenario as string,
                            { mode });
  try {
    const options = {
      episodes: Number(values.episodes),
      csvPath: values.csv,
      logPath: values.log,
      onEpisode: (record: EpisodeRecord) => {
        console.log(
          `episode ${record.episode}: return ${record.episodeReturn.toFixed(4)} `
          + `(${record.steps} steps, ${record.status ?? 'cut off'})`);
      },
    };
    const result = values.random
      ? await randomPolicyRun(env, config, options)
      : await td3Train(env, config, options);
    const returns = result.episodes.map((record) => record.episodeReturn);
    const mean = returns.reduce((sum, value) => sum + value, 0) / returns.length;
    console.log(`${result.episodes.length} episodes, ${result.updates} updates, `
                + `mean return ${mean.toFixed(4)}, CSV at ${values.csv}`);
  } finally {
    await env.close();
  }
}

main().catch((error) => {
  console.error(error instanceof Error ? `error: ${error.message}` : error);
  process.exitCode = 1;
});
