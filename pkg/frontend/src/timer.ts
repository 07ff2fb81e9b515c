/** Wall-clock spent selecting: first stroke after reset until submit. */
export class SelectTimer {
  private startedAt: number | null = null;
  private total = 0;

  constructor(private readonly now: () => number = () => performance.now()) {}

  reset(): void {
    this.startedAt = null;
    this.total = 0;
  }

  strokeStarted(): void {
    if (this.startedAt === null) {
      this.startedAt = this.now();
    }
  }

  submitted(): number {
    if (this.startedAt !== null) {
      this.total += this.now() - this.startedAt;
      this.startedAt = null;
    }
    return this.total;
  }

  /** Seconds accumulated so far (running stroke included). */
  seconds(): number {
    const live = this.startedAt === null ? 0 : this.now() - this.startedAt;
    return (this.total + live) / 1000;
  }
}
