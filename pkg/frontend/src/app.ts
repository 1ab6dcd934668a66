import { ApiClient, ApiError, isAbort } from "./api";
import type { PerplexityQuery, PredictQuery } from "./api";
import type { ModelStatus, PredictResponse } from "./types";
import type { ModelPhase, TimingPoint } from "./state";
import {
  BASIC_MAX_ORDER,
  ENGINE_MAX_ORDER,
  appendTiming,
  clampOrder,
  phaseFromStatus,
} from "./state";
import { formatBytes, formatMs, perplexityLine, probabilityText } from "./format";
import { timingChartSvg } from "./chart";

export interface AppOptions {
  apiBase?: string;
  /** Delay before a prompt edit fires a request. Keeps the rate under ~4/s. */
  debounceMs?: number;
  /** Poll interval while a large build runs server side. */
  pollMs?: number;
}

const DEFAULT_DEBOUNCE_MS = 250;
const DEFAULT_POLL_MS = 400;
const TOP_PREDICTIONS = 5;
const DEFAULT_CONTINUATION = 5;

const PHASE_LABELS: Record<ModelPhase, string> = {
  none: "no model",
  building: "building",
  ready: "ready",
  stale: "ready",
  failed: "build failed",
};

async function readFileText(file: File): Promise<string> {
  if (typeof file.text === "function") return file.text();
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(String(reader.result ?? ""));
    reader.onerror = () => reject(reader.error);
    reader.readAsText(file);
  });
}

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve, reject) => {
    if (signal?.aborted) {
      reject(new DOMException("aborted", "AbortError"));
      return;
    }
    const timer = setTimeout(() => resolve(), ms);
    signal?.addEventListener(
      "abort",
      () => {
        clearTimeout(timer);
        reject(new DOMException("aborted", "AbortError"));
      },
      { once: true },
    );
  });
}

/**
 * The whole single-page playground: corpus pane, model controls, and the
 * prediction panel. Builds its own DOM under the given root so tests can
 * drive it inside any document.
 *
 * Every probability, perplexity, and timing figure on the page is rendered
 * verbatim from an API response.
 */
export class PlaygroundApp {
  readonly api: ApiClient;
  private readonly root: HTMLElement;
  private readonly debounceMs: number;

  private pending = 0;
  private idleWaiters: Array<() => void> = [];
  private promptTimer: ReturnType<typeof setTimeout> | null = null;

  private buildSeq = 0;
  private buildAbort: AbortController | null = null;
  private predictSeq = 0;
  private predictAbort: AbortController | null = null;

  private phase: ModelPhase = "none";
  private corpusBytes = 0;
  private corpusEmpty = true;
  private history: TimingPoint[] = [];

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.root = root;
    this.api = new ApiClient(options.apiBase ?? "", options.pollMs ?? DEFAULT_POLL_MS);
    this.debounceMs = options.debounceMs ?? DEFAULT_DEBOUNCE_MS;
    this.render();
    this.wire();
  }

  /** Resolves once no request, poll, or pending debounce is outstanding. */
  whenIdle(): Promise<void> {
    if (this.pending === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  init(): Promise<void> {
    return this.track(async () => {
      await this.refreshCorpus();
      await this.refreshModel();
    });
  }

  // ---- task bookkeeping ------------------------------------------------

  private begin(): void {
    this.pending += 1;
  }

  private end(): void {
    this.pending -= 1;
    if (this.pending === 0) {
      const waiters = this.idleWaiters;
      this.idleWaiters = [];
      for (const wake of waiters) wake();
    }
  }

  private track<T>(work: () => Promise<T>): Promise<T> {
    this.begin();
    return work().finally(() => this.end());
  }

  // ---- DOM -------------------------------------------------------------

  private render(): void {
    this.root.innerHTML = `
      <div id="error-banner" class="banner" hidden></div>
      <main class="panes">
        <section class="pane" id="corpus-pane">
          <h2>Corpus</h2>
          <div class="row">
            <input type="file" id="corpus-file" multiple accept=".txt,text/plain">
            <button id="corpus-clear" type="button">Clear</button>
          </div>
          <p id="corpus-error" class="hint" hidden></p>
          <ul id="corpus-docs"></ul>
          <p id="corpus-stats">empty corpus</p>
        </section>
        <section class="pane" id="model-pane">
          <h2>Model</h2>
          <div class="row">
            <label for="order-slider">n = <span id="order-value">2</span></label>
            <input type="range" id="order-slider" min="1" max="${BASIC_MAX_ORDER}" step="1" value="2">
          </div>
          <label class="row small">
            <input type="checkbox" id="order-extended"> orders up to ${ENGINE_MAX_ORDER}
          </label>
          <div class="row">
            <select id="smoothing-select">
              <option value="laplace" selected>laplace</option>
              <option value="mle">mle</option>
              <option value="addk">addk</option>
              <option value="good-turing">good-turing</option>
            </select>
            <label id="k-label" hidden>k <input type="number" id="k-input" min="0.001" max="1" step="0.01" value="0.5"></label>
            <button id="build-button" type="button">Build</button>
          </div>
          <p class="row">
            <span id="status-label" class="status status-none">no model</span>
            <span id="stale-badge" class="badge" hidden>stale</span>
          </p>
          <p id="model-error" class="hint" hidden></p>
          <dl id="model-stats" hidden>
            <dt>order</dt><dd id="stat-n"></dd>
            <dt>vocabulary</dt><dd id="stat-vocab"></dd>
            <dt>contexts</dt><dd id="stat-contexts"></dd>
            <dt>distinct n-grams</dt><dd id="stat-ngrams"></dd>
            <dt>build time</dt><dd id="stat-build-ms"></dd>
          </dl>
          <div id="timing-chart"></div>
        </section>
        <section class="pane" id="playground-pane">
          <h2>Playground</h2>
          <input type="text" id="prompt-input" placeholder="type a prompt" autocomplete="off">
          <div class="row small">
            <label>continue <input type="number" id="count-input" min="1" max="100" value="${DEFAULT_CONTINUATION}"></label>
            <label><input type="checkbox" id="backoff-toggle" checked> backoff</label>
          </div>
          <p id="continuation"></p>
          <ol id="prediction-list"></ol>
          <p id="playground-hint" class="hint" hidden></p>
          <div class="row">
            <input type="text" id="perplexity-input" placeholder="text to score" autocomplete="off">
            <button id="perplexity-button" type="button">Score</button>
          </div>
          <p id="perplexity-readout"></p>
        </section>
      </main>`;
    this.redrawChart();
  }

  private el<T extends HTMLElement>(id: string): T {
    const found = this.root.querySelector(`#${id}`);
    if (found === null) throw new Error(`missing element #${id}`);
    return found as T;
  }

  private wire(): void {
    this.el<HTMLInputElement>("corpus-file").addEventListener("change", () => {
      this.onFilesChosen();
    });
    this.el<HTMLButtonElement>("corpus-clear").addEventListener("click", () => {
      void this.track(async () => {
        await this.guardCorpus(() => this.api.clearCorpus());
        await this.afterCorpusChange();
      });
    });
    this.el<HTMLUListElement>("corpus-docs").addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const button = target.closest("button.doc-remove") as HTMLButtonElement | null;
      const id = button?.dataset.id;
      if (id === undefined) return;
      void this.track(async () => {
        await this.guardCorpus(() => this.api.deleteDocument(id));
        await this.afterCorpusChange();
      });
    });

    const slider = this.el<HTMLInputElement>("order-slider");
    slider.addEventListener("input", () => {
      this.el("order-value").textContent = slider.value;
      void this.track(() => this.requestBuild());
    });
    this.el<HTMLInputElement>("order-extended").addEventListener("change", () => {
      const extended = this.el<HTMLInputElement>("order-extended").checked;
      const max = extended ? ENGINE_MAX_ORDER : BASIC_MAX_ORDER;
      slider.max = String(max);
      const clamped = clampOrder(Number(slider.value), max);
      slider.value = String(clamped);
      this.el("order-value").textContent = slider.value;
    });
    this.el<HTMLSelectElement>("smoothing-select").addEventListener("change", () => {
      const method = this.el<HTMLSelectElement>("smoothing-select").value;
      this.el<HTMLElement>("k-label").hidden = method !== "addk";
      void this.track(() => this.runPredict());
    });
    this.el<HTMLInputElement>("k-input").addEventListener("change", () => {
      void this.track(() => this.runPredict());
    });
    this.el<HTMLButtonElement>("build-button").addEventListener("click", () => {
      void this.track(() => this.requestBuild());
    });

    this.el<HTMLInputElement>("prompt-input").addEventListener("input", () => {
      this.schedulePredict();
    });
    this.el<HTMLInputElement>("count-input").addEventListener("change", () => {
      void this.track(() => this.runPredict());
    });
    this.el<HTMLInputElement>("backoff-toggle").addEventListener("change", () => {
      void this.track(() => this.runPredict());
    });

    const scoreInput = this.el<HTMLInputElement>("perplexity-input");
    this.el<HTMLButtonElement>("perplexity-button").addEventListener("click", () => {
      void this.track(() => this.runPerplexity());
    });
    scoreInput.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        void this.track(() => this.runPerplexity());
      }
    });
  }

  // ---- corpus ----------------------------------------------------------

  private onFilesChosen(): void {
    const input = this.el<HTMLInputElement>("corpus-file");
    const files = input.files === null ? [] : Array.from(input.files);
    if (files.length === 0) return;
    void this.track(async () => {
      await this.guardCorpus(async () => {
        for (const file of files) {
          const text = await readFileText(file);
          await this.api.uploadDocument(file.name, text);
        }
      });
      await this.afterCorpusChange();
    });
  }

  /** Runs a corpus mutation, routing failures to the corpus pane. */
  private async guardCorpus(mutate: () => Promise<unknown>): Promise<void> {
    const errorLine = this.el("corpus-error");
    errorLine.hidden = true;
    try {
      await mutate();
      this.clearBanner();
    } catch (err) {
      if (err instanceof ApiError && err.code === "unreachable") {
        this.showBanner(err.message);
      } else {
        errorLine.textContent = err instanceof Error ? err.message : String(err);
        errorLine.hidden = false;
      }
    }
  }

  private async afterCorpusChange(): Promise<void> {
    await this.refreshCorpus();
    await this.refreshModel();
    await this.runPredict();
  }

  private async refreshCorpus(): Promise<void> {
    let listing;
    try {
      listing = await this.api.listCorpus();
    } catch (err) {
      if (err instanceof ApiError && err.code === "unreachable") {
        this.showBanner(err.message);
      }
      return;
    }
    this.clearBanner();
    const docs = this.el<HTMLUListElement>("corpus-docs");
    docs.textContent = "";
    for (const doc of listing.documents) {
      const item = document.createElement("li");
      const name = document.createElement("span");
      name.className = "doc-name";
      name.textContent = doc.name;
      const meta = document.createElement("span");
      meta.className = "doc-meta";
      meta.textContent = `${doc.token_count} tokens, ${formatBytes(doc.byte_size)}`;
      const remove = document.createElement("button");
      remove.type = "button";
      remove.className = "doc-remove";
      remove.dataset.id = doc.id;
      remove.textContent = "remove";
      item.append(name, meta, remove);
      docs.append(item);
    }
    const stats = listing.stats;
    this.corpusBytes = listing.documents.reduce((sum, doc) => sum + doc.byte_size, 0);
    this.corpusEmpty = stats.document_count === 0;
    this.el("corpus-stats").textContent = this.corpusEmpty
      ? "empty corpus"
      : `${stats.document_count} documents, ${stats.total_tokens} tokens, vocabulary ${stats.vocabulary_size}`;
    this.el<HTMLInputElement>("order-slider").disabled = this.corpusEmpty;
    this.el<HTMLButtonElement>("build-button").disabled = this.corpusEmpty;
  }

  // ---- model -----------------------------------------------------------

  private currentBuildSpec(): { n: number; smoothing: string; k?: number } {
    const slider = this.el<HTMLInputElement>("order-slider");
    const max = Number(slider.max);
    const n = clampOrder(Number(slider.value), max);
    const smoothing = this.el<HTMLSelectElement>("smoothing-select").value;
    if (smoothing === "addk") {
      return { n, smoothing, k: Number(this.el<HTMLInputElement>("k-input").value) };
    }
    return { n, smoothing };
  }

  private async refreshModel(): Promise<void> {
    try {
      const status = await this.api.modelStatus();
      this.renderStatus(status, false);
    } catch (err) {
      if (err instanceof ApiError && err.code === "unreachable") {
        this.showBanner(err.message);
      }
    }
  }

  /**
   * Kick off a build for the current controls and wait it out. Only the
   * newest request publishes its result: older in-flight builds are
   * aborted, and anything that still resolves is discarded by sequence
   * number so rapid slider moves settle on the final value.
   */
  private async requestBuild(): Promise<void> {
    if (this.corpusEmpty) return;
    const seq = ++this.buildSeq;
    this.buildAbort?.abort();
    const controller = new AbortController();
    this.buildAbort = controller;
    this.setPhase("building");
    const spec = this.currentBuildSpec();
    try {
      let status: ModelStatus;
      for (;;) {
        try {
          status = await this.api.buildModel(spec, controller.signal);
          break;
        } catch (err) {
          // Another build already holds the server; wait for it to end and
          // retry, unless a newer request has replaced this one meanwhile.
          if (err instanceof ApiError && err.code === "build_in_progress") {
            await this.waitWhileBuilding(controller.signal);
            if (seq !== this.buildSeq) return;
            continue;
          }
          throw err;
        }
      }
      if (seq !== this.buildSeq) return;
      this.renderStatus(status, true);
      await this.runPredict();
    } catch (err) {
      if (isAbort(err) || seq !== this.buildSeq) return;
      if (err instanceof ApiError && err.code === "unreachable") {
        this.showBanner(err.message);
        return;
      }
      this.setPhase("failed");
      const line = this.el("model-error");
      line.textContent = err instanceof Error ? err.message : String(err);
      line.hidden = false;
    }
  }

  private async waitWhileBuilding(signal: AbortSignal): Promise<void> {
    for (;;) {
      const status = await this.api.modelStatus(signal);
      if (status.status !== "building") return;
      await sleep(this.api.pollMs, signal);
    }
  }

  private renderStatus(status: ModelStatus, recordTiming: boolean): void {
    const phase = phaseFromStatus(status);
    this.setPhase(phase);
    const errorLine = this.el("model-error");
    if (phase === "failed" && status.error !== null) {
      errorLine.textContent = status.error;
      errorLine.hidden = false;
    } else {
      errorLine.hidden = true;
    }
    const statsBlock = this.el<HTMLElement>("model-stats");
    if (status.model === null) {
      statsBlock.hidden = true;
    } else {
      statsBlock.hidden = false;
      this.el("stat-n").textContent = String(status.model.n);
      this.el("stat-vocab").textContent = String(status.model.vocabulary_size);
      this.el("stat-contexts").textContent = String(status.model.distinct_contexts);
      this.el("stat-ngrams").textContent = String(status.model.distinct_ngrams);
      this.el("stat-build-ms").textContent =
        status.model.build_millis === null ? "-" : formatMs(status.model.build_millis);
      if (recordTiming && status.model.build_millis !== null) {
        this.history = appendTiming(this.history, {
          corpusKb: Math.round((this.corpusBytes / 1024) * 10) / 10,
          buildMs: status.model.build_millis,
          n: status.model.n,
        });
        this.redrawChart();
      }
    }
    if (status.params !== null) {
      const summary = status.params.smoothing.k === undefined
        ? status.params.smoothing.name
        : `${status.params.smoothing.name} k=${status.params.smoothing.k}`;
      this.el("status-label").textContent =
        `${PHASE_LABELS[phase]} (n=${status.params.n}, ${summary})`;
    }
  }

  private setPhase(phase: ModelPhase): void {
    this.phase = phase;
    const label = this.el("status-label");
    label.className = `status status-${phase}`;
    label.textContent = PHASE_LABELS[phase];
    this.el<HTMLElement>("stale-badge").hidden = phase !== "stale";
    if (phase === "building") {
      this.el("model-error").hidden = true;
    }
  }

  private markStale(stale: boolean): void {
    if (stale && this.phase === "ready") {
      this.setPhase("stale");
    }
  }

  private redrawChart(): void {
    this.el("timing-chart").innerHTML = timingChartSvg(this.history);
  }

  // ---- playground ------------------------------------------------------

  private schedulePredict(): void {
    if (this.promptTimer !== null) {
      clearTimeout(this.promptTimer);
    } else {
      this.begin();
    }
    this.promptTimer = setTimeout(() => {
      this.promptTimer = null;
      void this.runPredict().finally(() => this.end());
    }, this.debounceMs);
  }

  private currentPredictQuery() {
    const smoothing = this.el<HTMLSelectElement>("smoothing-select").value;
    const count = Number(this.el<HTMLInputElement>("count-input").value) || DEFAULT_CONTINUATION;
    const query: PredictQuery = {
      prompt: this.el<HTMLInputElement>("prompt-input").value,
      count,
      top: TOP_PREDICTIONS,
      backoff: this.el<HTMLInputElement>("backoff-toggle").checked,
      smoothing,
    };
    if (smoothing === "addk") {
      query.k = Number(this.el<HTMLInputElement>("k-input").value);
    }
    return query;
  }

  private async runPredict(): Promise<void> {
    const seq = ++this.predictSeq;
    this.predictAbort?.abort();
    const controller = new AbortController();
    this.predictAbort = controller;
    try {
      const payload = await this.api.predict(this.currentPredictQuery(), controller.signal);
      if (seq !== this.predictSeq) return;
      this.clearBanner();
      this.renderPredictions(payload);
    } catch (err) {
      if (isAbort(err) || seq !== this.predictSeq) return;
      this.clearPredictions();
      if (err instanceof ApiError && err.code === "unreachable") {
        this.showBanner(err.message);
      } else if (err instanceof ApiError && err.code === "model_not_built") {
        this.setHint("build a model first");
      } else {
        this.setHint(err instanceof Error ? err.message : String(err));
      }
    }
  }

  private renderPredictions(payload: PredictResponse): void {
    this.setHint(null);
    const continuation = this.el("continuation");
    continuation.textContent =
      payload.tokens.length === 0
        ? "(no continuation)"
        : payload.tokens.join(" ") + (payload.truncated ? " …(dead end)" : "");
    const list = this.el<HTMLOListElement>("prediction-list");
    list.textContent = "";
    for (const prediction of payload.predictions) {
      const item = document.createElement("li");
      const word = document.createElement("span");
      word.className = "pred-word";
      word.textContent = prediction.word;
      const prob = document.createElement("span");
      prob.className = "pred-prob";
      prob.textContent = probabilityText(prediction.probability);
      const order = document.createElement("span");
      order.className = "pred-order";
      order.textContent = `order ${prediction.matched_order}`;
      item.append(word, prob, order);
      list.append(item);
    }
    this.markStale(payload.stale);
  }

  private clearPredictions(): void {
    this.el("continuation").textContent = "";
    this.el<HTMLOListElement>("prediction-list").textContent = "";
  }

  private async runPerplexity(): Promise<void> {
    const text = this.el<HTMLInputElement>("perplexity-input").value;
    const readout = this.el("perplexity-readout");
    if (text.trim() === "") {
      readout.textContent = "";
      return;
    }
    const smoothing = this.el<HTMLSelectElement>("smoothing-select").value;
    const query: PerplexityQuery = { text, smoothing };
    if (smoothing === "addk") {
      query.k = Number(this.el<HTMLInputElement>("k-input").value);
    }
    try {
      const report = await this.api.perplexity(query);
      this.clearBanner();
      readout.textContent = perplexityLine(report);
      this.markStale(report.stale);
    } catch (err) {
      readout.textContent = "";
      if (err instanceof ApiError && err.code === "unreachable") {
        this.showBanner(err.message);
      } else if (err instanceof ApiError && err.code === "model_not_built") {
        this.setHint("build a model first");
      } else {
        this.setHint(err instanceof Error ? err.message : String(err));
      }
    }
  }

  // ---- shared chrome ---------------------------------------------------

  private setHint(message: string | null): void {
    const hint = this.el("playground-hint");
    if (message === null) {
      hint.hidden = true;
      hint.textContent = "";
    } else {
      hint.textContent = message;
      hint.hidden = false;
    }
  }

  private showBanner(message: string): void {
    const banner = this.el("error-banner");
    banner.textContent = `server unreachable: ${message}`;
    banner.hidden = false;
    this.clearPredictions();
    this.el("perplexity-readout").textContent = "";
  }

  private clearBanner(): void {
    this.el("error-banner").hidden = true;
  }
}
