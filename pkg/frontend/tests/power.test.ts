import { describe, expect, it } from "vitest";
import {
  renderCompareChart,
  renderPowerChart,
  renderThresholdSummary,
} from "../src/views/power.js";
import type { CompareResult, PowerCurveResult, ThresholdsResult } from "../src/types.js";
import { fixture } from "./helpers.js";

describe("power chart", () => {
  it("null edit: all three curves meet at the P0 marker", () => {
    const curve = fixture<PowerCurveResult>("demo.power.json");
    const svg = renderPowerChart(curve);
    const marker = /class="p0-marker" cx="([\d.]+)" cy="([\d.]+)"/.exec(svg);
    expect(marker).not.toBeNull();
    const [, cx, cy] = marker!;
    // the OR=1 grid point of each curve coincides with the marker
    for (const m of ["A", "B", "C"]) {
      const line = new RegExp(`class="curve method-${m}"[^>]*points="([^"]+)"`).exec(svg)!;
      const points = line[1].split(" ").map((p) => p.split(",").map(Number));
      const hit = points.some(
        ([x, y]) => Math.abs(x - Number(cx)) < 0.01 && Math.abs(y - Number(cy)) < 0.01,
      );
      expect(hit).toBe(true);
    }
  });

  it("annotates the Stahl B-A gap near OR 1.3 at about 4%", () => {
    const curve = fixture<PowerCurveResult>("stahl.power.json");
    const svg = renderPowerChart(curve, { annotateAtLogOr: Math.log(1.3) });
    const m = /data-gap="([^"]+)"/.exec(svg);
    expect(m).not.toBeNull();
    const gap = Number(m![1]);
    expect(gap).toBeGreaterThan(0.025);
    expect(gap).toBeLessThan(0.055);
    expect(svg).toContain("B-A = ");
  });

  it("rendering is deterministic for a cached response", () => {
    const curve = fixture<PowerCurveResult>("stahl.power.json");
    expect(renderPowerChart(curve)).toBe(renderPowerChart(curve));
  });
});

describe("compare chart", () => {
  it("draws the shared-control point above the attainable band", () => {
    const cmp = fixture<CompareResult>("prospective.compare.json");
    const svg = renderCompareChart(cmp);
    const b = /class="b-point" cx="[\d.]+" cy="([\d.]+)"/.exec(svg);
    expect(b).not.toBeNull();
    const bandPoints = /class="a-band" points="([^"]+)"/
      .exec(svg)![1]
      .split(" ")
      .map((p) => Number(p.split(",")[1]));
    // SVG y grows downward: above the band means smaller y than any band vertex
    expect(Number(b![1])).toBeLessThan(Math.min(...bandPoints));
  });
});

describe("threshold summary", () => {
  it("orders beta_perp < beta_star < beta in the displayed values", () => {
    const thr = fixture<ThresholdsResult>("stahl.thresholds.json");
    const html = renderThresholdSummary(thr);
    expect(html).toContain("beta_star");
    expect(thr.beta_perp).toBeLessThan(thr.beta_star);
    expect(thr.beta_star).toBeLessThan(thr.thresholds.beta);
  });
});
