/** Wire types mirroring the HTTP API's JSON responses. */

export interface ProjectSummary {
  id: string;
}

export interface NgramRow {
  ngram: string;
  count: number;
}

export interface NgramReport {
  n: number;
  center: string;
  total_phrases: number;
  rows: NgramRow[];
}

export interface PreviewExample {
  chunk: string;
  tags: Record<string, number>;
  winning_rule: string;
}

export interface PreviewRule {
  rule: string;
  prio: number;
  count: number;
  examples: PreviewExample[];
}

export interface PreviewResponse {
  tags: string[];
  chunks_scanned: number;
  unmatched_chunks: number;
  rules: PreviewRule[];
}

export interface CoderRow {
  sample_id: string;
  chunk: string;
}

export interface ExportResponse {
  tags: string[];
  rows: CoderRow[];
}

export interface TagAgreement {
  agreement: number;
  kappa: number;
  kappa_degenerate: boolean;
}

export interface Disagreement {
  sample_id: string;
  tag: string;
  rule: string;
  expected: number;
  coded: number;
}

export interface ScoreReport {
  per_tag: Record<string, TagAgreement>;
  chunk_agreement: number;
  rule_agreement: number;
  disagreements: Disagreement[];
}

export interface ModelMetrics {
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
}

export interface ModelInfo {
  file: string;
  family: string;
  tag: string;
  purified: boolean;
  metrics: ModelMetrics | null;
}

export interface PrevalencePoint {
  year: string;
  pct: string;
  n: string;
  partial: string;
}

export interface MetricsResponse {
  models: ModelInfo[];
  prevalence: Record<string, PrevalencePoint[]>;
}

export interface TrainStartResponse {
  job_id: string;
  status?: string;
  deduplicated?: boolean;
}

export interface TrainJob {
  job_id: string;
  project: string;
  tag: string;
  status: "queued" | "running" | "done" | "failed";
  result: {
    model: string;
    family: string;
    tag: string;
    metrics: ModelMetrics;
  } | null;
  error: string | null;
}
