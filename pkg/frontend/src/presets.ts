// One-click presets for the bundled case studies.

import type { FormValues } from "./state.js";
import { DEFAULT_VALUES } from "./state.js";

export interface Preset {
  id: string;
  label: string;
  note: string;
  values: FormValues;
  /** prospective presets drive the compare view instead of the power view */
  compare?: { new_samples: number };
}

export const PRESETS: Preset[] = [
  {
    id: "stahl",
    label: "Typical GWAS (RA)",
    note: "Pooled replication controls gain ~4% power at OR 1.3",
    values: {
      ...DEFAULT_VALUES,
      n0: 20169, n1: 5539, n0p: 8806, n1p: 6768,
      alpha: 5e-6, beta: 5e-4, gamma: 5e-8,
      maf: 0.1, odds_ratio: 1.3, kappa0: 0, kappa1: 0,
    },
  },
  {
    id: "demo",
    label: "Control-rich discovery",
    note: "n0 >> n0': pooling gains up to ~8-10%",
    values: {
      ...DEFAULT_VALUES,
      n0: 15000, n1: 5000, n0p: 5000, n1p: 5000,
      alpha: 5e-6, beta: 5e-4, gamma: 5e-8,
      maf: 0.1, odds_ratio: 1.3, kappa0: 0, kappa1: 0,
    },
  },
  {
    id: "ferrari",
    label: "Weak control ascertainment",
    note: "10% of replication controls drawn from cases: pooling shields power",
    values: {
      ...DEFAULT_VALUES,
      n0: 4308, n1: 2154, n0p: 5094, n1p: 1372,
      alpha: 1e-4, beta: 1e-3, gamma: 5e-8,
      maf: 0.1, odds_ratio: 1.3, kappa0: 0.1, kappa1: 0,
    },
  },
  {
    id: "prospective",
    label: "Prospective allocation",
    note: "10000 new samples: shared 4000/6000 beats every independent split",
    values: {
      ...DEFAULT_VALUES,
      n0: 10000, n1: 5000, n0p: 4000, n1p: 6000,
      alpha: 5e-6, beta: 5e-4, gamma: 5e-8,
      maf: 0.1, odds_ratio: 1.3, kappa0: 0, kappa1: 0,
    },
    compare: { new_samples: 10000 },
  },
];

export function presetById(id: string): Preset {
  const preset = PRESETS.find((p) => p.id === id);
  if (!preset) throw new Error(`unknown preset ${id}`);
  return preset;
}
