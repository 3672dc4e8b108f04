// Form state: validation, response caching and debounced recompute.
//
// The cache is keyed by a canonical hash of (endpoint, request body), so a
// what-if edit that returns to previous values re-renders instantly from
// the same response object - displayed numbers are always traceable to
// exactly one API payload.

export interface FormValues {
  n0: number;
  n1: number;
  n0p: number;
  n1p: number;
  alpha: number;
  beta: number;
  gamma: number;
  maf: number;
  odds_ratio: number;
  kappa0: number;
  kappa1: number;
  grid_points: number;
  log_or_min: number;
  log_or_max: number;
}

export const DEFAULT_VALUES: FormValues = {
  n0: 15000,
  n1: 5000,
  n0p: 5000,
  n1p: 5000,
  alpha: 5e-6,
  beta: 5e-4,
  gamma: 5e-8,
  maf: 0.1,
  odds_ratio: 1.3,
  kappa0: 0,
  kappa1: 0,
  grid_points: 41,
  log_or_min: -1,
  log_or_max: 1,
};

export function validate(v: FormValues): string[] {
  const errors: string[] = [];
  const counts: Array<[string, number]> = [
    ["n0", v.n0], ["n1", v.n1], ["n0p", v.n0p], ["n1p", v.n1p],
  ];
  for (const [name, value] of counts) {
    if (!Number.isInteger(value) || value < 0) {
      errors.push(`${name} must be a non-negative integer`);
    }
  }
  if (v.n1 <= 0) errors.push("n1 must be positive");
  if (v.n1p <= 0) errors.push("n1p must be positive");
  if (v.n0 + v.n0p <= 0) errors.push("n0 + n0p must be positive");
  for (const [name, value] of [
    ["alpha", v.alpha], ["beta", v.beta], ["gamma", v.gamma],
  ] as Array<[string, number]>) {
    if (!(value > 0 && value <= 1)) errors.push(`${name} must lie in (0,1]`);
  }
  if (!(v.maf > 0 && v.maf < 1)) errors.push("maf must lie in (0,1)");
  if (!(v.odds_ratio > 0)) errors.push("odds ratio must be positive");
  for (const [name, value] of [
    ["kappa0", v.kappa0], ["kappa1", v.kappa1],
  ] as Array<[string, number]>) {
    if (!(value >= 0 && value <= 1)) errors.push(`${name} must lie in [0,1]`);
  }
  if (!(v.grid_points >= 3)) errors.push("grid needs at least 3 points");
  if (!(v.log_or_min <= v.log_or_max)) errors.push("log-OR range is inverted");
  return errors;
}

function canonical(obj: unknown): string {
  if (obj === null || typeof obj !== "object") return JSON.stringify(obj);
  if (Array.isArray(obj)) return `[${obj.map(canonical).join(",")}]`;
  const entries = Object.entries(obj as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([k, v]) => `${JSON.stringify(k)}:${canonical(v)}`);
  return `{${entries.join(",")}}`;
}

export function requestHash(endpoint: string, body: unknown): string {
  return `${endpoint}|${canonical(body)}`;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

/** Analytic endpoints recompute automatically this long after the last
 * slider edit; Monte Carlo runs only on an explicit button press. */
export const RECOMPUTE_DEBOUNCE_MS = 300;

export class DesignFormState {
  values: FormValues;
  errors: string[];
  private cache = new Map<string, unknown>();

  constructor(values: FormValues = DEFAULT_VALUES) {
    this.values = { ...values };
    this.errors = validate(this.values);
  }

  update(patch: Partial<FormValues>): void {
    this.values = { ...this.values, ...patch };
    this.errors = validate(this.values);
  }

  get canSubmit(): boolean {
    return this.errors.length === 0;
  }

  cached<T>(endpoint: string, body: unknown): T | undefined {
    return this.cache.get(requestHash(endpoint, body)) as T | undefined;
  }

  /** Fetch through the cache; concurrent duplicates share one promise. */
  async fetchCached<T>(
    endpoint: string,
    body: unknown,
    fetcher: () => Promise<T>,
  ): Promise<T> {
    const key = requestHash(endpoint, body);
    if (this.cache.has(key)) return this.cache.get(key) as T;
    const result = await fetcher();
    this.cache.set(key, result);
    return result;
  }

  clearCache(): void {
    this.cache.clear();
  }
}
