import type { ModelStatus } from "./types";

/**
 * The four states the model pane renders. "stale" is "ready" whose corpus
 * has changed since the build; the server keeps answering from the old
 * model but flags it, and the UI must show the flag.
 */
export type ModelPhase = "none" | "building" | "ready" | "stale" | "failed";

export const MIN_ORDER = 1;
export const BASIC_MAX_ORDER = 4;
export const ENGINE_MAX_ORDER = 8;

export function phaseFromStatus(status: ModelStatus): ModelPhase {
  if (status.status === "ready" && status.stale) return "stale";
  return status.status;
}

export function clampOrder(value: number, max: number): number {
  const rounded = Math.round(value);
  if (!Number.isFinite(rounded) || rounded < MIN_ORDER) return MIN_ORDER;
  if (rounded > max) return max;
  return rounded;
}

/** One finished build, charted as corpus size against build time. */
export interface TimingPoint {
  corpusKb: number;
  buildMs: number;
  n: number;
}

const HISTORY_LIMIT = 200;

export function appendTiming(history: TimingPoint[], point: TimingPoint): TimingPoint[] {
  const next = history.concat(point);
  if (next.length > HISTORY_LIMIT) next.splice(0, next.length - HISTORY_LIMIT);
  return next;
}
