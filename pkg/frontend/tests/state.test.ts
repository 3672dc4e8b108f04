import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import {
  DEFAULT_VALUES,
  DesignFormState,
  RECOMPUTE_DEBOUNCE_MS,
  debounce,
  requestHash,
  validate,
} from "../src/state.js";

describe("validation", () => {
  it("accepts the defaults", () => {
    expect(validate(DEFAULT_VALUES)).toEqual([]);
  });

  it("flags invalid designs and disables submission", () => {
    const state = new DesignFormState();
    expect(state.canSubmit).toBe(true);
    state.update({ n1: 0 });
    expect(state.errors.some((e) => e.includes("n1"))).toBe(true);
    expect(state.canSubmit).toBe(false);
    state.update({ n1: 5000 });
    expect(state.canSubmit).toBe(true);
  });

  it("flags threshold and scenario domain errors", () => {
    expect(validate({ ...DEFAULT_VALUES, alpha: 0 })).toContain(
      "alpha must lie in (0,1]",
    );
    expect(validate({ ...DEFAULT_VALUES, maf: 1.2 })).toContain(
      "maf must lie in (0,1)",
    );
    expect(validate({ ...DEFAULT_VALUES, kappa0: -0.1 })).toContain(
      "kappa0 must lie in [0,1]",
    );
  });
});

describe("request cache", () => {
  it("is keyed by canonical body (order independent)", () => {
    const a = requestHash("/v1/thresholds", { x: 1, y: { b: 2, a: 3 } });
    const b = requestHash("/v1/thresholds", { y: { a: 3, b: 2 }, x: 1 });
    expect(a).toBe(b);
    expect(a).not.toBe(requestHash("/v1/power-curve", { x: 1, y: { a: 3, b: 2 } }));
  });

  it("returns the identical cached object without refetching", async () => {
    const state = new DesignFormState();
    const fetcher = vi.fn(async () => ({ p0: 0.25 }));
    const body = { design: { n0: 1 } };
    const first = await state.fetchCached("/v1/thresholds", body, fetcher);
    const second = await state.fetchCached("/v1/thresholds", body, fetcher);
    expect(fetcher).toHaveBeenCalledTimes(1);
    expect(second).toBe(first); // same response object => same rendered DOM
  });
});

describe("debounce", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("fires once after the trailing edge", () => {
    const fn = vi.fn();
    const run = debounce(fn, RECOMPUTE_DEBOUNCE_MS);
    run();
    run();
    vi.advanceTimersByTime(RECOMPUTE_DEBOUNCE_MS - 1);
    expect(fn).not.toHaveBeenCalled();
    run();
    vi.advanceTimersByTime(RECOMPUTE_DEBOUNCE_MS);
    expect(fn).toHaveBeenCalledTimes(1);
  });
});
