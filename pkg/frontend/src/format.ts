import type { PerplexityReport } from "./types";

/**
 * Display helpers. Probabilities and perplexities pass through String() so
 * the page shows exactly the numbers the API sent; only sizes and
 * durations get cosmetic units.
 */

export function formatBytes(bytes: number): string {
  if (bytes < 1024) return `${bytes} B`;
  if (bytes < 1024 * 1024) return `${(bytes / 1024).toFixed(1)} KB`;
  return `${(bytes / (1024 * 1024)).toFixed(1)} MB`;
}

export function formatMs(ms: number): string {
  if (ms >= 1000) return `${(ms / 1000).toFixed(2)} s`;
  return `${ms.toFixed(1)} ms`;
}

export function probabilityText(value: number): string {
  return String(value);
}

export function perplexityLine(report: PerplexityReport): string {
  const value = report.infinite ? "inf" : String(report.perplexity);
  let line =
    `perplexity ${value} over ${report.scored_positions} scored positions` +
    ` (skipped ${report.skipped_prefix}, method ${report.smoothing.name})`;
  if (report.zero_probability_positions > 0) {
    line += `; ${report.zero_probability_positions} zero-probability positions`;
  }
  return line;
}
