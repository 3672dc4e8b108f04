// Acceptance: each bundled preset renders values byte-equal to the
// corresponding CLI invocation's JSON (the fixtures are committed CLI
// output), and the bound matrix flags exactly the cells marked unbounded.

import { describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { presetById, PRESETS } from "../src/presets.js";
import { DesignFormState } from "../src/state.js";
import type {
  CompareResult,
  PowerCurveResult,
  ThresholdsResult,
} from "../src/types.js";
import {
  renderCompareTable,
  renderPowerTable,
  renderThresholdSummary,
} from "../src/views/power.js";
import { envelope, fixture, fixtureText, jsonResponse, rawLiteral } from "./helpers.js";

const THRESHOLD_FIXTURES: Record<string, string> = {
  stahl: "stahl.thresholds.json",
  demo: "demo.thresholds.json",
  ferrari: "ferrari.thresholds.json",
};

describe("preset definitions", () => {
  it("bundles the four case studies", () => {
    expect(PRESETS.map((p) => p.id)).toEqual([
      "stahl", "demo", "ferrari", "prospective",
    ]);
    expect(presetById("prospective").compare?.new_samples).toBe(10000);
    expect(presetById("ferrari").values.kappa0).toBe(0.1);
  });
});

describe("threshold presets render byte-equal to the CLI JSON", () => {
  it.each(Object.keys(THRESHOLD_FIXTURES))("%s", (id) => {
    const name = THRESHOLD_FIXTURES[id];
    const text = fixtureText(name);
    const thr = fixture<ThresholdsResult>(name);
    const preset = presetById(id);
    // the preset must describe the same design/thresholds the CLI was given
    expect(thr.design).toEqual({
      n0: preset.values.n0, n1: preset.values.n1,
      n0p: preset.values.n0p, n1p: preset.values.n1p,
    });
    const html = renderThresholdSummary(thr);
    for (const key of ["beta_star", "beta_perp", "p0"] as const) {
      const literal = rawLiteral(text, key);
      expect(html).toContain(`data-field="${key}">${literal}</td>`);
    }
  });
});

describe("power grids render byte-equal to the CLI JSON", () => {
  it.each(["stahl", "demo", "ferrari"])("%s", (id) => {
    const name = `${id}.power.json`;
    const text = fixtureText(name);
    const curve = fixture<PowerCurveResult>(name);
    const html = renderPowerTable(curve);
    // every grid literal of the CLI file appears verbatim as a cell
    const literalRe = /"(log_or|power_A|power_B|power_C)": ([^,\n}]+)/g;
    let m: RegExpExecArray | null;
    let seen = 0;
    while ((m = literalRe.exec(text)) !== null) {
      expect(html).toContain(`<td>${m[2].trim()}</td>`);
      seen += 1;
    }
    expect(seen).toBe(curve.grid.length * 4);
  });
});

describe("prospective preset renders byte-equal to the CLI compare JSON", () => {
  it("splits table and verdict", () => {
    const text = fixtureText("prospective.compare.json");
    const cmp = fixture<CompareResult>("prospective.compare.json");
    const html = renderCompareTable(cmp);
    const literalRe = /"(power_A|power_B|power)": ([^,\n}]+)/g;
    let m: RegExpExecArray | null;
    while ((m = literalRe.exec(text)) !== null) {
      expect(html).toContain(m[2].trim());
    }
    expect(html).toContain('data-beats="true"');
  });
});

describe("end-to-end through the client and cache", () => {
  it("cached responses feed the renderer unchanged", async () => {
    const result = fixture<ThresholdsResult>("stahl.thresholds.json");
    const fetchImpl = vi.fn(async () => jsonResponse(envelope(result)));
    const client = new ApiClient("http://api", fetchImpl as unknown as typeof fetch);
    const state = new DesignFormState();
    const body = {
      design: result.design,
      thresholds: result.thresholds,
    };
    const fetchOnce = () =>
      state.fetchCached<ThresholdsResult>("/v1/thresholds", body, async () =>
        (await client.thresholds(body)).result,
      );
    const first = await fetchOnce();
    const second = await fetchOnce();
    expect(fetchImpl).toHaveBeenCalledTimes(1);
    expect(renderThresholdSummary(second)).toBe(renderThresholdSummary(first));
    expect(renderThresholdSummary(first)).toContain(
      rawLiteral(fixtureText("stahl.thresholds.json"), "beta_star"),
    );
  });
});
