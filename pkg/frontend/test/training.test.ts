/** End-to-end learning check on the small navigation task: 150 episodes of
 * TD3 with the shipped configuration trends up in episodic reward, while a
 * random-action control on the same seed schedule does not. The whole run
 * is seeded (weights, noise, resets), so these numbers are reproducible. */

import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { selectBackend } from '../src/backend';
import { RunMode, makeEnv } from '../src/env';
import { parseTd3Config } from '../src/schemas';
import { randomPolicyRun, td3Train } from '../src/train';
import { TestServer, startServer } from './harness';

const EPISODES = 150;
const WINDOW = 25;
const mode: RunMode = { kind: 'asynchronous', ticks_per_inference: 10 };

function mean(values: number[]): number {
  return values.reduce((sum, value) => sum + value, 0) / values.length;
}

describe('TD3 on the small navigation task', () => {
  let server: TestServer;
  let workDir: string;

  beforeAll(async () => {
    await selectBackend();
    server = await startServer(4);
    workDir = fs.mkdtempSync(path.join(os.tmpdir(), 'td3-run-'));
  });

  afterAll(async () => {
    await server.stop();
  });

  it('improves episodic reward where a random policy does not', async () => {
    const config = parseTd3Config({ seed: 1 });
    const csvPath = path.join(workDir, 'rewards.csv');
    const logPath = path.join(workDir, 'run.jsonl');

    const learner = await makeEnv(server.address, 'navigation_toy', { mode });
    let trained;
    try {
      trained = await td3Train(learner, config,
                               { episodes: EPISODES, csvPath, logPath });
    } finally {
      await learner.close();
    }

    const control = await makeEnv(server.address, 'navigation_toy', { mode });
    let random;
    try {
      random = await randomPolicyRun(control, config, {
        episodes: EPISODES, csvPath: path.join(workDir, 'control.csv'),
      });
    } finally {
      await control.close();
    }

    const returns = trained.episodes.map((record) => record.episodeReturn);
    const early = mean(returns.slice(0, WINDOW));
    const late = mean(returns.slice(-WINDOW));
    const controlReturns = random.episodes.map((record) => record.episodeReturn);
    const controlEarly = mean(controlReturns.slice(0, WINDOW));
    const controlLate = mean(controlReturns.slice(-WINDOW));
    const gain = late - early;
    const controlGain = controlLate - controlEarly;

    expect(late).toBeGreaterThan(early);
    expect(controlGain).toBeLessThan(gain);

    // One CSV row per episode, numeric returns.
    const csv = fs.readFileSync(csvPath, 'utf-8').trim().split('\n');
    expect(csv[0]).toBe('episode,return,steps,status');
    expect(csv).toHaveLength(EPISODES + 1);
    const firstRow = csv[1].split(',');
    expect(Number(firstRow[0])).toBe(0);
    expect(Number.isFinite(Number(firstRow[1]))).toBe(true);

    // The client log: header line, then one record per inference.
    const log = fs.readFileSync(logPath, 'utf-8').trim().split('\n');
    const header = JSON.parse(log[0]);
    expect(header.kind).toBe('client_log');
    expect(header.schema).toBe(1);
    expect(header.scenario).toBe('navigation_toy');
    expect(header.mode).toEqual(mode);
    expect(log).toHaveLength(trained.totalSteps + 1);
    const record = JSON.parse(log[1]);
    expect(record.step).toBe(1);
    expect(Object.keys(record.agents)).toEqual([learner.agentSlot]);
    expect(record.agents[learner.agentSlot].observation).toHaveLength(13);
    expect(record.agents[learner.agentSlot].action).toHaveLength(3);
  });
});
