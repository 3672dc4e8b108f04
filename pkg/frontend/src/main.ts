// Browser bootstrap: wires the form to the API client and the renderers.
// Analytic views recompute on a 300 ms debounce after edits; Monte Carlo
// validation runs only from its button.

import { ApiClient } from "./api.js";
import { PRESETS, presetById } from "./presets.js";
import {
  DesignFormState,
  RECOMPUTE_DEBOUNCE_MS,
  debounce,
  type FormValues,
} from "./state.js";
import type {
  CompareResult,
  ErrorProfileResult,
  PowerCurveResult,
  ThresholdsResult,
} from "./types.js";
import {
  renderCompareChart,
  renderCompareTable,
  renderPowerChart,
  renderPowerTable,
  renderThresholdSummary,
} from "./views/power.js";
import { renderBoundMatrix, renderErrorChart, renderErrorTable } from "./views/error.js";

const NUMERIC_FIELDS: Array<keyof FormValues> = [
  "n0", "n1", "n0p", "n1p", "alpha", "beta", "gamma", "maf",
  "odds_ratio", "kappa0", "kappa1", "grid_points", "log_or_min", "log_or_max",
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function requestsFor(state: DesignFormState) {
  const v = state.values;
  const design = { n0: v.n0, n1: v.n1, n0p: v.n0p, n1p: v.n1p };
  const thresholds = { alpha: v.alpha, beta: v.beta, gamma: v.gamma };
  const scenario = {
    odds_ratio: v.odds_ratio, maf: v.maf, kappa0: v.kappa0, kappa1: v.kappa1,
  };
  const grid = {
    grid_points: v.grid_points, log_or_min: v.log_or_min, log_or_max: v.log_or_max,
  };
  return { design, thresholds, scenario, grid };
}

export function start(): void {
  const api = new ApiClient(
    localStorage.getItem("sharedctrl.apiBase") ?? "http://127.0.0.1:8710",
  );
  const state = new DesignFormState();
  let compareTotal: number | undefined;
  let errorCohort = "C1";

  const presetBar = el<HTMLDivElement>("presets");
  for (const preset of PRESETS) {
    const btn = document.createElement("button");
    btn.textContent = preset.label;
    btn.title = preset.note;
    btn.addEventListener("click", () => {
      state.update(presetById(preset.id).values);
      compareTotal = preset.compare?.new_samples;
      syncInputs();
      recompute();
    });
    presetBar.appendChild(btn);
  }

  function syncInputs(): void {
    for (const field of NUMERIC_FIELDS) {
      el<HTMLInputElement>(`f-${field}`).value = String(state.values[field]);
    }
  }

  function readInputs(): void {
    const patch: Partial<FormValues> = {};
    for (const field of NUMERIC_FIELDS) {
      patch[field] = Number(el<HTMLInputElement>(`f-${field}`).value) as never;
    }
    state.update(patch);
  }

  async function recompute(): Promise<void> {
    el("validation").textContent = state.errors.join("; ");
    el<HTMLButtonElement>("run-mc").disabled = !state.canSubmit;
    if (!state.canSubmit) return;
    const { design, thresholds, scenario, grid } = requestsFor(state);
    try {
      const thr = await state.fetchCached<ThresholdsResult>(
        "/v1/thresholds", { design, thresholds },
        async () => (await api.thresholds({ design, thresholds })).result,
      );
      el("summary").innerHTML = renderThresholdSummary(thr);
      el("bound-matrix").innerHTML = renderBoundMatrix(thr, errorCohort);

      if (compareTotal !== undefined) {
        const body = { design, thresholds, scenario, new_samples: compareTotal };
        const cmp = await state.fetchCached<CompareResult>(
          "/v1/compare", body, async () => (await api.compare(body)).result,
        );
        el("power-chart").innerHTML = renderCompareChart(cmp);
        el("power-table").innerHTML = renderCompareTable(cmp);
      } else {
        const body = { design, thresholds, scenario, grid };
        const curve = await state.fetchCached<PowerCurveResult>(
          "/v1/power-curve", body, async () => (await api.powerCurve(body)).result,
        );
        el("power-chart").innerHTML = renderPowerChart(curve, {
          annotateAtLogOr: Math.log(state.values.odds_ratio),
        });
        el("power-table").innerHTML = renderPowerTable(curve);
      }

      const errBody = {
        design, thresholds, cohorts: [errorCohort], base_maf: state.values.maf,
        grid: { grid_points: 17, log_or_min: -3, log_or_max: 3 },
      };
      const prof = await state.fetchCached<ErrorProfileResult>(
        "/v1/error-profile", errBody,
        async () => (await api.errorProfile(errBody)).result,
      );
      el("error-chart").innerHTML = renderErrorChart(prof);
      el("error-table").innerHTML = renderErrorTable(prof);
      el("status").textContent = "";
    } catch (err) {
      if ((err as Error).name === "AbortError") return; // superseded edit
      el("status").innerHTML =
        `<span class="error">${String(err)}</span> <button id="retry">retry</button>`;
      el("retry").addEventListener("click", recompute);
    }
  }

  const debouncedRecompute = debounce(recompute, RECOMPUTE_DEBOUNCE_MS);
  for (const field of NUMERIC_FIELDS) {
    el<HTMLInputElement>(`f-${field}`).addEventListener("input", () => {
      compareTotal = undefined; // manual edits leave compare mode
      readInputs();
      debouncedRecompute();
    });
  }
  el<HTMLSelectElement>("f-cohort").addEventListener("change", (ev) => {
    errorCohort = (ev.target as HTMLSelectElement).value;
    debouncedRecompute();
  });

  el<HTMLButtonElement>("run-mc").addEventListener("click", async () => {
    const { design, thresholds, scenario } = requestsFor(state);
    const reps = Number(el<HTMLInputElement>("f-reps").value) || 100000;
    const seed = Number(el<HTMLInputElement>("f-seed").value) || 1;
    el("mc-result").textContent = "running…";
    try {
      const res = await api.mcValidate({ design, thresholds, scenario, reps, seed });
      const body = "result" in res ? res.result : res;
      el("mc-result").textContent =
        `${body.all_pass ? "all checks pass" : "DISAGREEMENT"} ` +
        `(${body.checks.length} checks, ${body.replicates} replicates)`;
    } catch (err) {
      el("mc-result").textContent = String(err);
    }
  });

  syncInputs();
  void recompute();
}

if (typeof document !== "undefined" && document.getElementById("presets")) {
  start();
}
