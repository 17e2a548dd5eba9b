import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    // Training acceptance drives a live server for many episodes.
    testTimeout: 1_800_000,
    hookTimeout: 60_000,
    // Each test file owns one server process; keep files sequential so the
    // TD3 run gets the whole CPU.
    fileParallelism: false,
  },
});
