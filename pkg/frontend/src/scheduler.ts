/** Latest-wins task scheduling for viewport loads.
 *
 * At most one fetch is in flight; settles arriving meanwhile coalesce so
 * only the newest runs next. Rapid panning can never interleave stale
 * marker sets: results apply in schedule order, last writer wins.
 */

export class LatestWins {
  private running = false;
  private queued: (() => Promise<void>) | null = null;

  schedule(task: () => Promise<void>): void {
    if (this.running) {
      this.queued = task;
      return;
    }
    this.running = true;
    void this.drain(task);
  }

  private async drain(task: () => Promise<void>): Promise<void> {
    try {
      await task();
    } catch {
      // a failed load keeps the previous markers; next settle retries
    }
    this.running = false;
    const next = this.queued;
    this.queued = null;
    if (next) this.schedule(next);
  }
}
