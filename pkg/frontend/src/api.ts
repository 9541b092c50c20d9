/** Thin typed client for the pipeline HTTP API.
 *
 * The UI never computes domain results itself: every number it renders
 * comes from one of these calls. The fetch function is injectable so
 * component tests can run against canned responses.
 */

import type {
  ExportResponse,
  MetricsResponse,
  NgramReport,
  PreviewResponse,
  ProjectSummary,
  ScoreReport,
  TrainJob,
  TrainStartResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`API ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, String(body.detail ?? response.statusText));
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  listProjects(): Promise<{ projects: ProjectSummary[] }> {
    return this.request("/projects");
  }

  ngrams(project: string, n: number, center: string, limit: number): Promise<NgramReport> {
    const query = new URLSearchParams({
      n: String(n),
      center,
      limit: String(limit),
    });
    return this.request(`/projects/${project}/ngrams?${query}`);
  }

  previewRules(project: string, rulesCsv: string, limit = 5): Promise<PreviewResponse> {
    return this.post(`/projects/${project}/rules/preview`, {
      rules_csv: rulesCsv,
      limit,
    });
  }

  exportValidation(project: string, perRule: number, seed: number): Promise<ExportResponse> {
    return this.post(`/projects/${project}/validation/export`, {
      per_rule: perRule,
      seed,
    });
  }

  scoreValidation(
    project: string,
    rows: { sample_id: string; values: Record<string, number> }[],
  ): Promise<ScoreReport> {
    return this.post(`/projects/${project}/validation/score`, { rows });
  }

  startTraining(
    project: string,
    family: string,
    options: { tag?: string; grid?: boolean; purify?: boolean; requestId?: string } = {},
  ): Promise<TrainStartResponse> {
    return this.post(`/projects/${project}/train`, {
      family,
      tag: options.tag,
      grid: options.grid ?? false,
      purify: options.purify ?? false,
      request_id: options.requestId,
    });
  }

  trainStatus(project: string, jobId: string): Promise<TrainJob> {
    return this.request(`/projects/${project}/train/${jobId}`);
  }

  metrics(project: string): Promise<MetricsResponse> {
    return this.request(`/projects/${project}/metrics`);
  }
}
