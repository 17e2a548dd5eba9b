/** Circular experience replay buffer with seeded uniform sampling. */

import { Rng } from './rng';

export interface Transition {
  state: number[];
  action: number[];
  reward: number;
  nextState: number[];
  done: boolean;
}

export interface TransitionBatch {
  states: number[][];
  actions: number[][];
  rewards: number[];
  nextStates: number[][];
  dones: number[];
}

export class ReplayBuffer {
  private readonly storage: Transition[] = [];
  private position = 0;

  constructor(readonly capacity: number) {}

  add(transition: Transition): void {
    if (this.storage.length < this.capacity) {
      this.storage.push(transition);
    } else {
      this.storage[this.position] = transition;
    }
    this.position = (this.position + 1) % this.capacity;
  }

  get size(): number {
    return this.storage.length;
  }

  sample(batchSize: number, rng: Rng): TransitionBatch {
    const batch: TransitionBatch = {
      states: [], actions: [], rewards: [], nextStates: [], dones: [],
    };
    for (let i = 0; i < batchSize; i++) {
      const pick = this.storage[Math.floor(rng.next() * this.storage.length)];
      batch.states.push(pick.state);
      batch.actions.push(pick.action);
      batch.rewards.push(pick.reward);
      batch.nextStates.push(pick.nextState);
      batch.dones.push(pick.done ? 1 : 0);
    }
    return batch;
  }
}
