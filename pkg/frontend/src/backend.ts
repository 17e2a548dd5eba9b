/**
 * Compute backend selection. The wasm backend (XNNPACK) runs the 400/300
 * networks several times faster than the plain-JS cpu backend, so training
 * prefers it and falls back to cpu when it cannot initialize.
 */

import * as tf from '@tensorflow/tfjs';
import '@tensorflow/tfjs-backend-wasm';

export async function selectBackend(): Promise<string> {
  try {
    if (await tf.setBackend('wasm')) {
      await tf.ready();
      return tf.getBackend();
    }
  } catch {
    // wasm unavailable here; cpu always works
  }
  await tf.setBackend('cpu');
  await tf.ready();
  return tf.getBackend();
}
