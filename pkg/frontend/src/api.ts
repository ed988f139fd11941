/** Typed client for the chaoscope service JSON endpoints. */

export interface RunSummary {
  run_id: string;
  created_at: string;
  system_name: string;
}

export interface RangeJson {
  var: string;
  lo: number;
  hi: number;
}

export interface InitRegionJson {
  ranges: RangeJson[];
}

export interface ManifestCfg {
  method: string;
  h: number;
  t0: number;
  t1: number;
  sample_stride: number;
}

export interface Manifest {
  run_id: string;
  created_at: string;
  system_source: string;
  system_name: string;
  predicate_source: string;
  region: InitRegionJson;
  cfg: ManifestCfg;
  seed: number;
  result_refs: string[];
  n_trajectories: number;
}

export type OrbitClass = 'true' | 'false' | 'untestable' | null;

export interface OrbitProjection {
  ic_index: number;
  class: OrbitClass;
  points: [number, number][];
}

export interface TrajectoriesResponse {
  run_id: string;
  vars: [string, string];
  orbits: OrbitProjection[];
}

export type JobKind = 'solve' | 'boxcount' | 'fdim';
export type JobState = 'queued' | 'running' | 'done' | 'failed';

export interface JobStatus {
  job_id: string;
  kind: JobKind;
  state: JobState;
  progress: number;
  result_ref: string | null;
  error: string | null;
  created_at: string;
}

export interface FdimPoint {
  delta: number;
  fraction: number;
}

export interface FdimData {
  kind: 'fdim';
  D: number;
  alpha: number;
  d_B: number;
  se_percent: number;
  pearson_r: number;
  intercept: number;
  points: FdimPoint[];
  dropped_epsilons: number[];
}

export interface ResultEntry {
  file: string;
  data: unknown;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  listRuns(): Promise<RunSummary[]> {
    return this.get<RunSummary[]>('/api/runs');
  }

  getRun(runId: string): Promise<Manifest> {
    return this.get<Manifest>(`/api/runs/${encodeURIComponent(runId)}`);
  }

  getResults(runId: string): Promise<ResultEntry[]> {
    return this.get<ResultEntry[]>(`/api/runs/${encodeURIComponent(runId)}/results`);
  }

  getTrajectories(runId: string, query: string): Promise<TrajectoriesResponse> {
    return this.get<TrajectoriesResponse>(
      `/api/runs/${encodeURIComponent(runId)}/trajectories?${query}`,
    );
  }

  async submitJob(kind: JobKind, params: unknown): Promise<{ job_id: string }> {
    const resp = await this.fetchImpl(`${this.base}/api/jobs`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ kind, params }),
    });
    return asJson(resp);
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.get<JobStatus>(`/api/jobs/${encodeURIComponent(jobId)}`);
  }

  async cancelJob(jobId: string): Promise<void> {
    const resp = await this.fetchImpl(
      `${this.base}/api/jobs/${encodeURIComponent(jobId)}`,
      { method: 'DELETE' },
    );
    await asJson(resp);
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(`${this.base}${path}`);
    return asJson<T>(resp);
  }
}
