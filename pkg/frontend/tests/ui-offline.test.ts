import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { PlaygroundApp } from "../src/app";
import type { CorpusListing, ModelStatus, PredictResponse } from "../src/types";

// Recorded responses from a real server session, replayed by a tiny router
// so the whole UI can be exercised without a backend.

const LISTING: CorpusListing = {
  documents: [
    { id: "05fb59583eea", name: "pets.txt", byte_size: 62, token_count: 12, ingested_at: 1786935208.5 },
  ],
  stats: { document_count: 1, total_tokens: 12, vocabulary_size: 6 },
};

const MODEL_READY: ModelStatus = {
  status: "ready",
  stale: false,
  model: {
    n: 2,
    vocabulary_size: 6,
    distinct_contexts: 6,
    distinct_ngrams: 9,
    total_ngrams: 11,
    build_millis: 0.23,
  },
  params: { n: 2, smoothing: { name: "laplace" } },
  error: null,
};

const PREDICTION: PredictResponse = {
  prompt: "The cat",
  smoothing: { name: "laplace" },
  tokens: ["is"],
  truncated: false,
  predictions: [
    { word: "is", score: 0.375, probability: 0.375, matched_order: 3 },
    { word: "cat", score: 0.125, probability: 0.125, matched_order: 3 },
  ],
  stale: false,
};

interface MockCall {
  method: string;
  path: string;
  body: string | null;
}

class MockServer {
  calls: MockCall[] = [];
  modelStatus: ModelStatus = MODEL_READY;
  listing: CorpusListing = LISTING;
  predictBody: PredictResponse | { error: string; message: string } = PREDICTION;
  predictStatus = 200;
  holdBuilds = false;
  private heldBuilds: Array<{ n: number; release: () => void }> = [];

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const parsed = new URL(url, "http://mock");
    const method = init?.method ?? "GET";
    this.calls.push({ method, path: parsed.pathname, body: (init?.body as string) ?? null });
    if (init?.signal?.aborted) throw new DOMException("aborted", "AbortError");

    if (method === "GET" && parsed.pathname === "/corpus") {
      return respond(this.listing);
    }
    if (method === "GET" && parsed.pathname === "/model") {
      return respond(this.modelStatus);
    }
    if (method === "POST" && parsed.pathname === "/model") {
      const spec = JSON.parse(String(init?.body ?? "{}")) as { n: number };
      if (this.holdBuilds) {
        await new Promise<void>((resolve, reject) => {
          this.heldBuilds.push({ n: spec.n, release: resolve });
          init?.signal?.addEventListener(
            "abort",
            () => reject(new DOMException("aborted", "AbortError")),
            { once: true },
          );
        });
      }
      const status: ModelStatus = {
        ...MODEL_READY,
        model: { ...MODEL_READY.model!, n: spec.n },
        params: { n: spec.n, smoothing: { name: "laplace" } },
      };
      this.modelStatus = status;
      return respond(status);
    }
    if (method === "GET" && parsed.pathname === "/predict") {
      return respond(this.predictBody, this.predictStatus);
    }
    throw new Error(`mock has no route for ${method} ${parsed.pathname}`);
  };

  releaseBuilds(): void {
    for (const held of this.heldBuilds.splice(0)) held.release();
  }

  countCalls(method: string, path: string): number {
    return this.calls.filter((c) => c.method === method && c.path === path).length;
  }
}

function respond(body: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: "",
    json: async () => body,
  } as unknown as Response;
}

function byId<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) throw new Error(`missing #${id}`);
  return found as T;
}

let server: MockServer;

beforeEach(() => {
  server = new MockServer();
  vi.stubGlobal("fetch", server.fetch);
  document.body.innerHTML = '<div id="app"></div>';
});

afterEach(() => {
  vi.unstubAllGlobals();
});

function makeApp(debounceMs = 0): PlaygroundApp {
  return new PlaygroundApp(byId("app"), { apiBase: "http://mock", debounceMs });
}

describe("initial render", () => {
  it("shows the recorded corpus and model state", async () => {
    const app = makeApp();
    await app.init();
    const docs = byId<HTMLUListElement>("corpus-docs");
    expect(docs.children).toHaveLength(1);
    expect(docs.textContent).toContain("pets.txt");
    expect(docs.textContent).toContain("12 tokens");
    expect(byId("corpus-stats").textContent).toBe("1 documents, 12 tokens, vocabulary 6");
    expect(byId("status-label").textContent).toBe("ready (n=2, laplace)");
    expect(byId("stale-badge").hidden).toBe(true);
    expect(byId("stat-n").textContent).toBe("2");
  });

  it("disables the slider while the corpus is empty", async () => {
    server.listing = { documents: [], stats: { document_count: 0, total_tokens: 0, vocabulary_size: 0 } };
    const app = makeApp();
    await app.init();
    expect(byId<HTMLInputElement>("order-slider").disabled).toBe(true);
    expect(byId<HTMLButtonElement>("build-button").disabled).toBe(true);
  });

  it("raises the stale badge when the model status says so", async () => {
    server.modelStatus = { ...MODEL_READY, stale: true };
    const app = makeApp();
    await app.init();
    expect(byId("stale-badge").hidden).toBe(false);
    expect(byId("status-label").className).toContain("status-stale");
  });
});

describe("prediction panel", () => {
  it("renders the recorded prediction verbatim", async () => {
    const app = makeApp();
    await app.init();
    const prompt = byId<HTMLInputElement>("prompt-input");
    prompt.value = "The cat";
    prompt.dispatchEvent(new Event("input", { bubbles: true }));
    await app.whenIdle();

    expect(byId("continuation").textContent).toBe("is");
    const items = byId<HTMLOListElement>("prediction-list").children;
    expect(items).toHaveLength(2);
    expect(items[0].querySelector(".pred-word")!.textContent).toBe("is");
    expect(items[0].querySelector(".pred-prob")!.textContent).toBe("0.375");
    expect(items[0].querySelector(".pred-order")!.textContent).toBe("order 3");
    expect(byId("playground-hint").hidden).toBe(true);
  });

  it("shows the build-a-model hint on 409", async () => {
    server.predictBody = { error: "model_not_built", message: "no model yet" };
    server.predictStatus = 409;
    const app = makeApp();
    await app.init();
    const prompt = byId<HTMLInputElement>("prompt-input");
    prompt.value = "the";
    prompt.dispatchEvent(new Event("input", { bubbles: true }));
    await app.whenIdle();

    expect(byId("playground-hint").hidden).toBe(false);
    expect(byId("playground-hint").textContent).toBe("build a model first");
    expect(byId<HTMLOListElement>("prediction-list").children).toHaveLength(0);
  });

  it("debounces prompt edits into a single request", async () => {
    const app = makeApp(40);
    await app.init();
    const prompt = byId<HTMLInputElement>("prompt-input");
    for (const text of ["t", "th", "the"]) {
      prompt.value = text;
      prompt.dispatchEvent(new Event("input", { bubbles: true }));
    }
    await app.whenIdle();
    expect(server.countCalls("GET", "/predict")).toBe(1);
  });

  it("drops rendered data and raises the banner when the server dies", async () => {
    const app = makeApp();
    await app.init();
    const prompt = byId<HTMLInputElement>("prompt-input");
    prompt.value = "The cat";
    prompt.dispatchEvent(new Event("input", { bubbles: true }));
    await app.whenIdle();
    expect(byId<HTMLOListElement>("prediction-list").children).toHaveLength(2);

    vi.stubGlobal("fetch", async () => {
      throw new TypeError("connection refused");
    });
    prompt.value = "The cat is";
    prompt.dispatchEvent(new Event("input", { bubbles: true }));
    await app.whenIdle();

    expect(byId("error-banner").hidden).toBe(false);
    expect(byId("error-banner").textContent).toContain("server unreachable");
    expect(byId<HTMLOListElement>("prediction-list").children).toHaveLength(0);
    expect(byId("continuation").textContent).toBe("");
  });
});

describe("slider rebuilds", () => {
  it("rebuilds on a slider move and refetches the prediction", async () => {
    const app = makeApp();
    await app.init();
    const slider = byId<HTMLInputElement>("order-slider");
    slider.value = "3";
    slider.dispatchEvent(new Event("input", { bubbles: true }));
    await app.whenIdle();

    expect(server.countCalls("POST", "/model")).toBe(1);
    expect(byId("stat-n").textContent).toBe("3");
    expect(byId("status-label").textContent).toBe("ready (n=3, laplace)");
    expect(server.countCalls("GET", "/predict")).toBe(1);
  });

  it("lets only the final build of a rapid slide win", async () => {
    const app = makeApp();
    await app.init();
    server.holdBuilds = true;
    const slider = byId<HTMLInputElement>("order-slider");
    for (const value of ["2", "3", "4"]) {
      slider.value = value;
      slider.dispatchEvent(new Event("input", { bubbles: true }));
    }
    server.holdBuilds = false;
    server.releaseBuilds();
    await app.whenIdle();

    expect(byId("stat-n").textContent).toBe("4");
    expect(byId("status-label").textContent).toBe("ready (n=4, laplace)");
    // the superseded builds must not have repainted the panel afterwards
    expect(server.countCalls("GET", "/predict")).toBe(1);
  });
});
