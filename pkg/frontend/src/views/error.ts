// Error view: the aberrance bound matrix and per-cohort profile curves.

import { formatMeasure } from "../format.js";
import type { ErrorProfileResult, ThresholdsResult } from "../types.js";
import { CHART_H, CHART_W, linearScale } from "./power.js";

export const UNBOUNDED_FLAG = "unbounded (→1)";

interface BoundCell {
  text: string;
  unbounded: boolean;
}

function value(x: number): BoundCell {
  return { text: formatMeasure(x), unbounded: false };
}

const UNBOUNDED: BoundCell = { text: UNBOUNDED_FLAG, unbounded: true };

/** Worst-case hit rate per (method, aberrant cohort), with the live solved
 * cutoffs plugged in.  Pooling sacrifices the bound exactly where the
 * pooled cohort can carry the bias through every stage. */
export function boundMatrix(res: ThresholdsResult): Record<string, BoundCell[]> {
  const t = res.thresholds;
  return {
    A: [value(res.p0), value(t.beta), value(t.alpha), value(t.beta), value(t.alpha)],
    B: [value(res.p0), UNBOUNDED, value(t.alpha), value(res.beta_star), value(t.alpha)],
    C: [value(res.p0), UNBOUNDED, UNBOUNDED, value(res.beta_perp), value(t.alpha)],
  };
}

export const BOUND_COLUMNS = ["None", "C0", "C0'", "C1", "C1'"];

export function renderBoundMatrix(
  res: ThresholdsResult,
  selectedCohort?: string,
): string {
  const matrix = boundMatrix(res);
  const selectedIdx = selectedCohort
    ? BOUND_COLUMNS.indexOf(selectedCohort.replace("p", "'"))
    : -1;
  const head =
    `<tr><th></th>` +
    BOUND_COLUMNS.map(
      (c, i) =>
        `<th class="${i === selectedIdx ? "selected" : ""}">${c}</th>`,
    ).join("") +
    `</tr>`;
  const rows = (["A", "B", "C"] as const)
    .map((m) => {
      const cells = matrix[m]
        .map(
          (cell, i) =>
            `<td class="${cell.unbounded ? "unbounded" : ""}` +
            `${i === selectedIdx ? " selected" : ""}" ` +
            `data-method="${m}" data-cohort="${BOUND_COLUMNS[i]}">${cell.text}</td>`,
        )
        .join("");
      return `<tr><th>Method ${m}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="bound-matrix">${head}${rows}</table>`;
}

export function renderErrorChart(res: ErrorProfileResult): string {
  const xs = res.grid.map((p) => p.zeta_driver);
  const ys = res.grid.flatMap((p) => [p.R_A, p.R_B, p.R_C]);
  const yMax = Math.max(...ys, res.p0) * 1.05 || 1;
  const scale = linearScale([Math.min(...xs), Math.max(...xs)], [0, yMax]);
  const lines = (["R_A", "R_B", "R_C"] as const)
    .map((key, i) => {
      const pts = res.grid
        .map((p) => `${scale.x(p.zeta_driver).toFixed(2)},${scale.y(p[key]).toFixed(2)}`)
        .join(" ");
      return `<polyline class="curve method-${"ABC"[i]}" fill="none" points="${pts}"/>`;
    })
    .join("");
  const p0y = scale.y(res.p0).toFixed(2);
  const p0line =
    `<line class="p0-line" x1="${scale.x(Math.min(...xs)).toFixed(2)}" ` +
    `x2="${scale.x(Math.max(...xs)).toFixed(2)}" y1="${p0y}" y2="${p0y}" ` +
    `data-p0="${formatMeasure(res.p0)}"/>`;
  return (
    `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" class="error-chart" role="img">` +
    lines + p0line + `</svg>`
  );
}

export function renderErrorTable(res: ErrorProfileResult): string {
  const head = `<tr>${res.columns.map((c) => `<th>${c}</th>`).join("")}</tr>`;
  const body = res.grid
    .map(
      (p) =>
        `<tr>` +
        `<td>${formatMeasure(p.zeta_driver)}</td>` +
        `<td>${formatMeasure(p.R_A)}</td>` +
        `<td>${formatMeasure(p.R_B)}</td>` +
        `<td>${formatMeasure(p.R_C)}</td>` +
        `</tr>`,
    )
    .join("");
  const limits = (["A", "B", "C"] as const)
    .map((m) => {
      const lim = res.limits[m];
      const sat =
        lim.at_pos_inf >= 0.999
          ? UNBOUNDED_FLAG
          : formatMeasure(lim.at_pos_inf);
      return `<tr><th>R_${m} saturation</th><td data-method="${m}">${sat}</td></tr>`;
    })
    .join("");
  return (
    `<table class="grid error-grid">${head}${body}</table>` +
    `<table class="limits">${limits}</table>`
  );
}
