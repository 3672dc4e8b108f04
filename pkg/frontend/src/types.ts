// Payload shapes of the sharedctrl HTTP API (mirrors the CLI JSON).

export interface Design {
  n0: number;
  n1: number;
  n0p: number;
  n1p: number;
}

export interface ThresholdSet {
  alpha: number;
  beta: number;
  gamma: number;
}

export interface Scenario {
  odds_ratio: number;
  maf: number;
  kappa0: number;
  kappa1: number;
}

export interface GridSpec {
  grid_points: number;
  log_or_min: number;
  log_or_max: number;
}

export interface ThresholdsResult {
  design: Design;
  thresholds: ThresholdSet;
  beta_star: number;
  beta_perp: number;
  p0: number;
  diagnostics: Record<string, unknown>;
}

export interface PowerPoint {
  log_or: number;
  power_A: number;
  power_B: number;
  power_C: number;
}

export interface PowerCurveResult {
  design: Design;
  thresholds: ThresholdSet;
  maf: number;
  kappa0: number;
  kappa1: number;
  beta_star: number;
  beta_perp: number;
  p0: number;
  columns: string[];
  grid: PowerPoint[];
}

export interface ErrorPoint {
  zeta_driver: number;
  R_A: number;
  R_B: number;
  R_C: number;
}

export interface MethodLimits {
  at_zero: number;
  at_pos_inf: number;
  at_neg_inf: number;
}

export interface ErrorProfileResult {
  design: Design;
  thresholds: ThresholdSet;
  aberrant_cohorts: string[];
  base_maf: number;
  beta_star: number;
  beta_perp: number;
  p0: number;
  limits: Record<"A" | "B" | "C", MethodLimits>;
  columns: string[];
  grid: ErrorPoint[];
}

export interface CompareSplit {
  n0p: number;
  n1p: number;
  power_A: number;
  power_B: number;
}

export interface CompareResult {
  design: { n0: number; n1: number };
  new_samples: number;
  thresholds: ThresholdSet;
  odds_ratio: number;
  maf: number;
  splits: CompareSplit[];
  best_A: { n0p: number; n1p: number; power: number };
  best_B: { n0p: number; n1p: number; power: number };
  chosen_B?: { n0p: number; n1p: number; power: number };
  chosen_B_beats_all_A?: boolean;
}

export interface McCheck {
  check: string;
  value: number;
  target: number;
  se: number;
  sigmas: number | null;
  pass: boolean;
}

export interface McValidateResult {
  design: Design;
  thresholds: ThresholdSet;
  replicates: number;
  seed: number;
  p0: number;
  warnings: string[];
  checks: McCheck[];
  all_pass: boolean;
}

export interface ApiEnvelope<T> {
  engine_version: string;
  elapsed_ms: number;
  warnings: string[];
  result: T;
}
