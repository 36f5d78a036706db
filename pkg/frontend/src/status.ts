/** Periodic /status polling with an immediate first load. */

import { BrokerStatus } from "./api.js";

export const DEFAULT_POLL_MS = 2000;

export type StatusListener = (status: BrokerStatus | null, error?: Error) => void;

export class StatusPoller {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly load: () => Promise<BrokerStatus>,
    private readonly listener: StatusListener,
    readonly intervalMs: number = DEFAULT_POLL_MS,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    try {
      this.listener(await this.load());
    } catch (err) {
      this.listener(null, err as Error);
    }
  }
}
