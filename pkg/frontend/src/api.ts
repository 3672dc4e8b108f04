// Thin typed client for the sharedctrl HTTP service.
//
// At most one request is in flight per endpoint: firing a new one aborts
// the previous (slider edits supersede stale work).  All numbers displayed
// in the UI come from these responses; nothing is computed client-side.

import type {
  ApiEnvelope,
  CompareResult,
  Design,
  ErrorProfileResult,
  GridSpec,
  McValidateResult,
  PowerCurveResult,
  Scenario,
  ThresholdSet,
  ThresholdsResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }
}

export interface ThresholdsRequest {
  design: Design;
  thresholds: ThresholdSet;
}

export interface PowerCurveRequest {
  design: Design;
  thresholds: ThresholdSet;
  scenario: Scenario;
  grid: GridSpec;
}

export interface ErrorProfileRequest {
  design: Design;
  thresholds: ThresholdSet;
  cohorts: string[];
  base_maf: number;
  grid: GridSpec;
}

export interface CompareRequest {
  design: Design;
  thresholds: ThresholdSet;
  scenario: Scenario;
  new_samples: number;
}

export interface McValidateRequest {
  design: Design;
  thresholds: ThresholdSet;
  scenario: Scenario;
  reps: number;
  seed: number;
}

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(
    public baseUrl: string = "http://127.0.0.1:8710",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async post<T>(endpoint: string, body: unknown): Promise<ApiEnvelope<T>> {
    this.inflight.get(endpoint)?.abort();
    const controller = new AbortController();
    this.inflight.set(endpoint, controller);
    try {
      const res = await this.fetchImpl(`${this.baseUrl}${endpoint}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
      const payload = await res.json();
      if (!res.ok && res.status !== 202) {
        throw new ApiError(res.status, payload.detail ?? payload);
      }
      return payload as ApiEnvelope<T>;
    } finally {
      if (this.inflight.get(endpoint) === controller) {
        this.inflight.delete(endpoint);
      }
    }
  }

  thresholds(req: ThresholdsRequest) {
    return this.post<ThresholdsResult>("/v1/thresholds", req);
  }

  powerCurve(req: PowerCurveRequest) {
    return this.post<PowerCurveResult>("/v1/power-curve", req);
  }

  errorProfile(req: ErrorProfileRequest) {
    return this.post<ErrorProfileResult>("/v1/error-profile", req);
  }

  compare(req: CompareRequest) {
    return this.post<CompareResult>("/v1/compare", req);
  }

  /** Synchronous for small runs; transparently polls the job endpoint when
   * the service answers 202. */
  async mcValidate(
    req: McValidateRequest,
    pollMs = 500,
  ): Promise<ApiEnvelope<McValidateResult> | McValidateResult> {
    const res = await this.fetchImpl(`${this.baseUrl}/v1/mc-validate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    const payload = await res.json();
    if (res.status === 200) return payload as ApiEnvelope<McValidateResult>;
    if (res.status !== 202) throw new ApiError(res.status, payload.detail ?? payload);
    const statusUrl: string = payload.status_url;
    for (;;) {
      await new Promise((r) => setTimeout(r, pollMs));
      const job = await this.fetchImpl(`${this.baseUrl}${statusUrl}`);
      const doc = await job.json();
      if (doc.status === "done") return doc.result as McValidateResult;
      if (doc.status === "failed") throw new ApiError(500, doc.detail);
    }
  }
}
