import type { TimingPoint } from "./state";

/**
 * Tiny dependency-free scatter chart of build time against corpus size,
 * returned as an SVG string. Axis positions are layout math only; the
 * plotted values come straight from the build records.
 */

const MARGIN = { top: 12, right: 12, bottom: 28, left: 46 };

function niceMax(value: number): number {
  if (value <= 0) return 1;
  const magnitude = 10 ** Math.floor(Math.log10(value));
  for (const step of [1, 2, 5, 10]) {
    if (value <= step * magnitude) return step * magnitude;
  }
  return 10 * magnitude;
}

export function timingChartSvg(points: TimingPoint[], width = 340, height = 180): string {
  const open = `<svg class="timing-chart" viewBox="0 0 ${width} ${height}" role="img" aria-label="build time versus corpus size">`;
  if (points.length === 0) {
    return `${open}<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">no builds yet</text></svg>`;
  }
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const maxKb = niceMax(Math.max(...points.map((p) => p.corpusKb)));
  const maxMs = niceMax(Math.max(...points.map((p) => p.buildMs)));
  const x = (kb: number): number => MARGIN.left + (kb / maxKb) * plotW;
  const y = (ms: number): number => MARGIN.top + plotH - (ms / maxMs) * plotH;

  const parts: string[] = [open];
  parts.push(
    `<line class="axis" x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}"/>`,
    `<line class="axis" x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + plotH}"/>`,
    `<text class="axis-label" x="${MARGIN.left + plotW / 2}" y="${height - 6}" text-anchor="middle">corpus (KB)</text>`,
    `<text class="axis-label" x="12" y="${MARGIN.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 12 ${MARGIN.top + plotH / 2})">build (ms)</text>`,
    `<text class="tick" x="${MARGIN.left + plotW}" y="${MARGIN.top + plotH + 14}" text-anchor="end">${maxKb}</text>`,
    `<text class="tick" x="${MARGIN.left - 4}" y="${MARGIN.top + 4}" text-anchor="end">${maxMs}</text>`,
  );
  for (const p of points) {
    const cx = x(p.corpusKb).toFixed(1);
    const cy = y(p.buildMs).toFixed(1);
    parts.push(
      `<circle class="point order-${p.n}" cx="${cx}" cy="${cy}" r="3.5"><title>n=${p.n}: ${p.buildMs} ms at ${p.corpusKb} KB</title></circle>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
