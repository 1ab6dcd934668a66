import type {
  CorpusListing,
  DocumentMeta,
  ModelStats,
  ModelStatus,
  PerplexityReport,
  PredictResponse,
  ThroughputReport,
} from "./types";

/** Error carrying the structured code the API returns alongside the message. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

export function isAbort(err: unknown): boolean {
  // Not instanceof Error: DOMException comes from another realm under jsdom.
  return typeof err === "object" && err !== null && (err as { name?: unknown }).name === "AbortError";
}

export interface BuildSpec {
  n: number;
  smoothing: string;
  k?: number;
}

export interface PredictQuery {
  prompt: string;
  count?: number;
  top?: number;
  backoff?: boolean;
  smoothing?: string;
  k?: number;
}

export interface PerplexityQuery {
  text: string;
  smoothing?: string;
  k?: number;
}

export interface PruneResult {
  removed_contexts: number;
  model: ModelStats;
  stale: boolean;
}

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve, reject) => {
    if (signal?.aborted) {
      reject(new DOMException("aborted", "AbortError"));
      return;
    }
    const timer = setTimeout(() => {
      signal?.removeEventListener("abort", onAbort);
      resolve();
    }, ms);
    function onAbort(): void {
      clearTimeout(timer);
      reject(new DOMException("aborted", "AbortError"));
    }
    signal?.addEventListener("abort", onAbort, { once: true });
  });
}

export class ApiClient {
  readonly base: string;
  pollMs: number;

  constructor(base = "", pollMs = 400) {
    this.base = base.replace(/\/$/, "");
    this.pollMs = pollMs;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, init);
    } catch (err) {
      if (isAbort(err)) throw err;
      const reason = err instanceof Error ? err.message : String(err);
      throw new ApiError("unreachable", `cannot reach the server: ${reason}`, 0);
    }
    if (!response.ok) {
      let code = `http_${response.status}`;
      let message = response.statusText || code;
      try {
        const body = (await response.json()) as { error?: string; message?: string };
        if (body && typeof body.error === "string") code = body.error;
        if (body && typeof body.message === "string") message = body.message;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(code, message, response.status);
    }
    return (await response.json()) as T;
  }

  listCorpus(signal?: AbortSignal): Promise<CorpusListing> {
    return this.request("/corpus", { signal });
  }

  uploadDocument(name: string, text: string, signal?: AbortSignal): Promise<DocumentMeta> {
    const query = new URLSearchParams({ name });
    return this.request(`/corpus?${query}`, {
      method: "POST",
      headers: { "Content-Type": "text/plain; charset=utf-8" },
      body: text,
      signal,
    });
  }

  deleteDocument(id: string, signal?: AbortSignal): Promise<unknown> {
    return this.request(`/corpus/${encodeURIComponent(id)}`, { method: "DELETE", signal });
  }

  clearCorpus(signal?: AbortSignal): Promise<unknown> {
    return this.request("/corpus", { method: "DELETE", signal });
  }

  modelStatus(signal?: AbortSignal): Promise<ModelStatus> {
    return this.request("/model", { signal });
  }

  /**
   * Start a build and wait for it to finish. Small corpora build inside the
   * POST; large ones return 202 and are polled through GET /model until the
   * status leaves "building".
   */
  async buildModel(spec: BuildSpec, signal?: AbortSignal): Promise<ModelStatus> {
    const body: Record<string, unknown> = { n: spec.n, smoothing: spec.smoothing };
    if (spec.k !== undefined) body.k = spec.k;
    const first = await this.request<ModelStatus>("/model", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    let status = first;
    while (status.status === "building") {
      await sleep(this.pollMs, signal);
      status = await this.modelStatus(signal);
    }
    return status;
  }

  prune(threshold: number, signal?: AbortSignal): Promise<PruneResult> {
    return this.request("/model/prune", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ threshold }),
      signal,
    });
  }

  predict(query: PredictQuery, signal?: AbortSignal): Promise<PredictResponse> {
    const params = new URLSearchParams({ prompt: query.prompt });
    if (query.count !== undefined) params.set("count", String(query.count));
    if (query.top !== undefined) params.set("top", String(query.top));
    if (query.backoff !== undefined) params.set("backoff", query.backoff ? "true" : "false");
    if (query.smoothing !== undefined) params.set("smoothing", query.smoothing);
    if (query.k !== undefined) params.set("k", String(query.k));
    return this.request(`/predict?${params}`, { signal });
  }

  perplexity(query: PerplexityQuery, signal?: AbortSignal): Promise<PerplexityReport> {
    const params = new URLSearchParams({ text: query.text });
    if (query.smoothing !== undefined) params.set("smoothing", query.smoothing);
    if (query.k !== undefined) params.set("k", String(query.k));
    return this.request(`/perplexity?${params}`, { signal });
  }

  throughput(signal?: AbortSignal): Promise<ThroughputReport> {
    return this.request("/bench/throughput", { signal });
  }
}
