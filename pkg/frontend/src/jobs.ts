/** Job submission and polling with a forward-only state display. */
import type { ApiClient, JobState, JobStatus } from './api.js';

const STATE_ORDER: Record<JobState, number> = {
  queued: 0,
  running: 1,
  done: 2,
  failed: 2,
};

/** Never step a displayed job state backwards, whatever a stale poll says. */
export function advanceState(previous: JobState, next: JobState): JobState {
  return STATE_ORDER[next] >= STATE_ORDER[previous] ? next : previous;
}

export function isTerminal(state: JobState): boolean {
  return state === 'done' || state === 'failed';
}

/** Human-readable state; cancellation travels as failed + error "canceled". */
export function displayState(job: Pick<JobStatus, 'state' | 'error'>): string {
  if (job.state === 'failed' && job.error === 'canceled') return 'canceled';
  return job.state;
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (job: JobStatus) => void;
  sleeper?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/** Poll until the job reaches a terminal state; resolves with the final
 * status (including failed/canceled -- the caller decides what to do). */
export async function pollJob(
  client: ApiClient,
  jobId: string,
  options: PollOptions = {},
): Promise<JobStatus> {
  const interval = options.intervalMs ?? 500;
  const timeout = options.timeoutMs ?? 10 * 60 * 1000;
  const sleep = options.sleeper ?? defaultSleep;
  const deadline = Date.now() + timeout;
  let shown: JobState = 'queued';
  for (;;) {
    const job = await client.getJob(jobId);
    shown = advanceState(shown, job.state);
    options.onUpdate?.({ ...job, state: shown });
    if (isTerminal(shown)) return { ...job, state: shown };
    if (Date.now() >= deadline) {
      throw new Error(`job ${jobId} did not settle within ${timeout} ms`);
    }
    await sleep(interval);
  }
}
