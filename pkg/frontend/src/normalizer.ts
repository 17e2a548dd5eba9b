/** Running per-dimension mean/variance (Welford) for observation scaling. */

export class ObservationNormalizer {
  private count = 0;
  private readonly mean: Float64Array;
  private readonly m2: Float64Array;

  constructor(readonly size: number) {
    this.mean = new Float64Array(size);
    this.m2 = new Float64Array(size);
  }

  update(observation: number[]): void {
    this.count += 1;
    for (let i = 0; i < this.size; i++) {
      const delta = observation[i] - this.mean[i];
      this.mean[i] += delta / this.count;
      this.m2[i] += delta * (observation[i] - this.mean[i]);
    }
  }

  normalize(observation: number[]): number[] {
    if (this.count < 2) return observation.slice();
    const out = new Array<number>(this.size);
    for (let i = 0; i < this.size; i++) {
      const variance = this.m2[i] / (this.count - 1);
      out[i] = (observation[i] - this.mean[i]) / Math.sqrt(variance + 1e-8);
    }
    return out;
  }

  get samples(): number {
    return this.count;
  }
}
