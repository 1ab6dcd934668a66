// Shapes of the JSON payloads the API returns. Field names mirror the wire
// format exactly so values can be rendered verbatim.

export interface DocumentMeta {
  id: string;
  name: string;
  byte_size: number;
  token_count: number;
  ingested_at: number;
}

export interface CorpusStats {
  document_count: number;
  total_tokens: number;
  vocabulary_size: number;
}

export interface CorpusListing {
  documents: DocumentMeta[];
  stats: CorpusStats;
}

export interface SmoothingInfo {
  name: string;
  k?: number;
}

export interface ModelStats {
  n: number;
  vocabulary_size: number;
  distinct_contexts: number;
  distinct_ngrams: number;
  total_ngrams: number;
  build_millis: number | null;
}

export type BuildState = "none" | "building" | "ready" | "failed";

export interface ModelStatus {
  status: BuildState;
  stale: boolean;
  model: ModelStats | null;
  params: { n: number; smoothing: SmoothingInfo } | null;
  error: string | null;
}

export interface Prediction {
  word: string;
  score: number;
  probability: number;
  matched_order: number;
}

export interface PredictResponse {
  prompt: string;
  smoothing: SmoothingInfo;
  tokens: string[];
  truncated: boolean;
  predictions: Prediction[];
  stale: boolean;
}

export interface PerplexityReport {
  smoothing: SmoothingInfo;
  test_token_count: number;
  scored_positions: number;
  skipped_prefix: number;
  log2_prob_sum: number;
  perplexity: number | null;
  infinite: boolean;
  zero_probability_positions: number;
  stale: boolean;
}

export interface ThroughputReport {
  tokens_per_second: number;
}

export interface ApiErrorBody {
  error: string;
  message: string;
}
