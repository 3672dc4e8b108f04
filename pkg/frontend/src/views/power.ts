// Power view: SVG chart plus value tables.  Renderers are pure functions of
// API responses, so identical responses always produce identical markup.

import { formatCount, formatMeasure, formatPercent } from "../format.js";
import type { CompareResult, PowerCurveResult, ThresholdsResult } from "../types.js";

export const CHART_W = 640;
export const CHART_H = 360;
const PAD = { left: 56, right: 16, top: 16, bottom: 40 };

export interface Scale {
  x(v: number): number;
  y(v: number): number;
}

export function linearScale(
  xDomain: [number, number],
  yDomain: [number, number],
): Scale {
  const xSpan = xDomain[1] - xDomain[0] || 1;
  const ySpan = yDomain[1] - yDomain[0] || 1;
  return {
    x: (v) => PAD.left + ((v - xDomain[0]) / xSpan) * (CHART_W - PAD.left - PAD.right),
    y: (v) => CHART_H - PAD.bottom - ((v - yDomain[0]) / ySpan) * (CHART_H - PAD.top - PAD.bottom),
  };
}

function polyline(points: Array<[number, number]>, cls: string): string {
  const attr = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
  return `<polyline class="${cls}" fill="none" points="${attr}"/>`;
}

export function renderThresholdSummary(res: ThresholdsResult): string {
  const rows: Array<[string, string]> = [
    ["n0 / n1", `${formatCount(res.design.n0)} / ${formatCount(res.design.n1)}`],
    ["n0' / n1'", `${formatCount(res.design.n0p)} / ${formatCount(res.design.n1p)}`],
    ["alpha", formatMeasure(res.thresholds.alpha)],
    ["beta", formatMeasure(res.thresholds.beta)],
    ["gamma", formatMeasure(res.thresholds.gamma)],
    ["beta_star", formatMeasure(res.beta_star)],
    ["beta_perp", formatMeasure(res.beta_perp)],
    ["p0", formatMeasure(res.p0)],
  ];
  const body = rows
    .map(([k, v]) => `<tr><th>${k}</th><td data-field="${k}">${v}</td></tr>`)
    .join("");
  return `<table class="summary">${body}</table>`;
}

export interface PowerChartOptions {
  /** annotate the B-A gap at the grid point nearest this log-OR */
  annotateAtLogOr?: number;
}

export function renderPowerChart(
  res: PowerCurveResult,
  opts: PowerChartOptions = {},
): string {
  const xs = res.grid.map((p) => p.log_or);
  const scale = linearScale([Math.min(...xs), Math.max(...xs)], [0, 1]);
  const lines = (["power_A", "power_B", "power_C"] as const)
    .map((key, i) =>
      polyline(
        res.grid.map((p) => [scale.x(p.log_or), scale.y(p[key])]),
        `curve method-${"ABC"[i]}`,
      ),
    )
    .join("");

  let marker = "";
  if (xs[0] <= 0 && xs[xs.length - 1] >= 0) {
    // the three curves meet at the conserved null rate when OR = 1
    marker = `<circle class="p0-marker" cx="${scale.x(0).toFixed(2)}" ` +
      `cy="${scale.y(res.p0).toFixed(2)}" r="4">` +
      `<title>P0 = ${formatMeasure(res.p0)}</title></circle>`;
  }

  let annotation = "";
  if (opts.annotateAtLogOr !== undefined) {
    const target = Math.min(Math.max(opts.annotateAtLogOr, xs[0]), xs[xs.length - 1]);
    const hi = Math.max(1, res.grid.findIndex((p) => p.log_or >= target));
    const lo = hi - 1;
    const span = res.grid[hi].log_or - res.grid[lo].log_or || 1;
    const w = (target - res.grid[lo].log_or) / span;
    const lerp = (a: number, b: number) => a + w * (b - a);
    const gap = lerp(
      res.grid[lo].power_B - res.grid[lo].power_A,
      res.grid[hi].power_B - res.grid[hi].power_A,
    );
    const yB = lerp(res.grid[lo].power_B, res.grid[hi].power_B);
    annotation =
      `<text class="gap-annotation" x="${scale.x(target).toFixed(2)}" ` +
      `y="${(scale.y(yB) - 10).toFixed(2)}" data-gap="${formatMeasure(gap)}">` +
      `B-A = ${formatPercent(gap)} at OR ${Math.exp(target).toFixed(2)}</text>`;
  }

  const axes =
    `<line class="axis" x1="${PAD.left}" y1="${CHART_H - PAD.bottom}" ` +
    `x2="${CHART_W - PAD.right}" y2="${CHART_H - PAD.bottom}"/>` +
    `<line class="axis" x1="${PAD.left}" y1="${PAD.top}" ` +
    `x2="${PAD.left}" y2="${CHART_H - PAD.bottom}"/>`;
  return (
    `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" class="power-chart" role="img">` +
    axes + lines + marker + annotation + `</svg>`
  );
}

export function renderPowerTable(res: PowerCurveResult): string {
  const head = `<tr>${res.columns.map((c) => `<th>${c}</th>`).join("")}</tr>`;
  const body = res.grid
    .map(
      (p) =>
        `<tr>` +
        `<td>${formatMeasure(p.log_or)}</td>` +
        `<td>${formatMeasure(p.power_A)}</td>` +
        `<td>${formatMeasure(p.power_B)}</td>` +
        `<td>${formatMeasure(p.power_C)}</td>` +
        `</tr>`,
    )
    .join("");
  return `<table class="grid power-grid">${head}${body}</table>`;
}

/** Prospective-allocation view: the attainable independent-design band over
 * all replication splits, with the shared-control point above it. */
export function renderCompareChart(res: CompareResult): string {
  const xs = res.splits.map((s) => s.n0p);
  const scale = linearScale([Math.min(...xs), Math.max(...xs)], [0, 1]);
  const aPts = res.splits.map(
    (s) => [scale.x(s.n0p), scale.y(s.power_A)] as [number, number],
  );
  const baseY = scale.y(0);
  const band =
    `<polygon class="a-band" points="` +
    [...aPts, [aPts[aPts.length - 1][0], baseY], [aPts[0][0], baseY]]
      .map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`)
      .join(" ") +
    `"/>`;
  const aLine = polyline(aPts, "curve method-A");
  let bPoint = "";
  if (res.chosen_B) {
    bPoint =
      `<circle class="b-point" cx="${scale.x(res.chosen_B.n0p).toFixed(2)}" ` +
      `cy="${scale.y(res.chosen_B.power).toFixed(2)}" r="5" ` +
      `data-power="${formatMeasure(res.chosen_B.power)}">` +
      `<title>B(${formatCount(res.chosen_B.n0p)}, ${formatCount(res.chosen_B.n1p)}) ` +
      `= ${formatMeasure(res.chosen_B.power)}</title></circle>`;
  }
  return (
    `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" class="compare-chart" role="img">` +
    band + aLine + bPoint + `</svg>`
  );
}

export function renderCompareTable(res: CompareResult): string {
  const head = `<tr><th>n0p</th><th>n1p</th><th>power_A</th><th>power_B</th></tr>`;
  const body = res.splits
    .map(
      (s) =>
        `<tr><td>${formatCount(s.n0p)}</td><td>${formatCount(s.n1p)}</td>` +
        `<td>${formatMeasure(s.power_A)}</td><td>${formatMeasure(s.power_B)}</td></tr>`,
    )
    .join("");
  const verdict = res.chosen_B
    ? `<p class="verdict" data-beats="${res.chosen_B_beats_all_A}">` +
      `B(${formatCount(res.chosen_B.n0p)}, ${formatCount(res.chosen_B.n1p)}) power ` +
      `${formatMeasure(res.chosen_B.power)} vs best independent split ` +
      `${formatMeasure(res.best_A.power)}</p>`
    : "";
  return `<table class="grid compare-grid">${head}${body}</table>${verdict}`;
}
