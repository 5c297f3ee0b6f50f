/** Run polling: 1 s base interval with backoff, deduplicated per run id. */

import type { ApiClient } from "./api.js";
import type { RunTraceDoc } from "./types.js";

export const BASE_INTERVAL_MS = 1000;
export const MAX_INTERVAL_MS = 10_000;

/** Next delay after `failures` consecutive errors: 1s, 2s, 4s, ... capped. */
export function nextInterval(failures: number): number {
  return Math.min(BASE_INTERVAL_MS * 2 ** failures, MAX_INTERVAL_MS);
}

export interface PollHandlers {
  onUpdate: (trace: RunTraceDoc) => void;
  onComplete: (trace: RunTraceDoc) => void;
  onError?: (error: unknown, failures: number) => void;
}

type Sleeper = (ms: number) => Promise<void>;

const defaultSleep: Sleeper = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export class RunPoller {
  private active = new Map<string, Promise<RunTraceDoc>>();

  constructor(
    private readonly api: ApiClient,
    private readonly sleep: Sleeper = defaultSleep,
  ) {}

  isPolling(runId: string): boolean {
    return this.active.has(runId);
  }

  /** Start polling a run; concurrent calls for the same id share one loop. */
  poll(runId: string, handlers: PollHandlers): Promise<RunTraceDoc> {
    const existing = this.active.get(runId);
    if (existing) {
      return existing;
    }
    const task = this.loop(runId, handlers).finally(() => {
      this.active.delete(runId);
    });
    this.active.set(runId, task);
    return task;
  }

  private async loop(runId: string, handlers: PollHandlers): Promise<RunTraceDoc> {
    let failures = 0;
    for (;;) {
      try {
        const trace = await this.api.getRun(runId);
        failures = 0;
        handlers.onUpdate(trace);
        if (trace.complete) {
          handlers.onComplete(trace);
          return trace;
        }
      } catch (error) {
        failures += 1;
        handlers.onError?.(error, failures);
      }
      await this.sleep(nextInterval(failures));
    }
  }
}
