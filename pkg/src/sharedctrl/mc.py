"""Ground-truth Monte Carlo for the two-stage hit rules.

Each replicate draws one binomial allele-frequency estimate per cohort
(one observation per sample, matching the analytic convention in
``design``), forms the five signed z statistics as pooled-variance
two-proportion tests, and applies each method's full hit rule including the
common-direction requirement.

Streams are counter-based: batch ``b`` of a run seeded with ``s`` uses
Philox key (s, b) over a fixed batch width, so serial and parallel
executions, and executions split across processes, produce bit-identical
results for the same seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import (
    STAT_GROUPS,
    STATISTICS,
    EffectScenario,
    StratifiedDesign,
    StudyDesign,
    covariance,
)
from .thresholds import DerivedThresholds, Thresholds, z_of_cutoff

BATCH = 1 << 16          # stream width; part of the determinism contract
MAX_REPLICATES = 10**10  # guard against accidental astronomically long runs
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class MCConfig:
    replicates: int
    seed: int
    thresholds: Thresholds
    derived: Optional[DerivedThresholds] = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("invalid argument: replicates must be >= 1")
        if self.replicates > MAX_REPLICATES:
            raise ValueError("replicates too large")


@dataclass(frozen=True)
class MCResult:
    replicates: int
    hit_rate: dict[str, float]
    hit_se: dict[str, float]
    rho: dict[tuple[str, str], float]
    rho_se: dict[tuple[str, str], float]
    mean_z: dict[str, float]
    mean_z_se: dict[str, float]
    resampled: int
    derived: DerivedThresholds

    def rate_gap_sigmas(self, method: str, target: float) -> float:
        se = self.hit_se[method]
        if se == 0.0:
            return math.inf if self.hit_rate[method] != target else 0.0
        return abs(self.hit_rate[method] - target) / se


def _stat_group_indices() -> dict[str, tuple[list[int], list[int]]]:
    order = {"C0": 0, "C1": 1, "C0p": 2, "C1p": 3}
    out = {}
    for stat, (ctrl, case) in STAT_GROUPS.items():
        out[stat] = ([order[c] for c in ctrl], [order[c] for c in case])
    return out


_GROUPS_IDX = _stat_group_indices()


class _Accumulator:
    """Associative aggregation of hit counts and z moments across batches."""

    def __init__(self, stats: list[str]):
        self.stats = stats
        self.n = 0
        self.hits = {"A": 0, "B": 0, "C": 0}
        self.method_defined = {"A": True, "B": True, "C": True}
        k = len(stats)
        self.sum_z = np.zeros(k)
        self.sum_zz = np.zeros((k, k))
        self.resampled = 0

    def add(self, z: dict[str, np.ndarray], hits: dict[str, Optional[np.ndarray]],
            resampled: int):
        rows = len(next(iter(z.values())))
        self.n += rows
        self.resampled += resampled
        zmat = np.vstack([z[s] for s in self.stats])
        self.sum_z += zmat.sum(axis=1)
        self.sum_zz += zmat @ zmat.T
        for m, h in hits.items():
            if h is None:
                self.method_defined[m] = False
            else:
                self.hits[m] += int(h.sum())


def _draw_batch(rng, design: StudyDesign, scenario: EffectScenario, rows: int):
    sizes = np.array([design.n0, design.n1, design.n0p, design.n1p])
    mus = np.array([scenario.mu0, scenario.mu1, scenario.mu0p, scenario.mu1p])
    freqs = np.empty((rows, 4))
    for i in range(4):
        if sizes[i] == 0:
            freqs[:, i] = np.nan
        else:
            freqs[:, i] = rng.binomial(int(sizes[i]), mus[i], size=rows) / sizes[i]
    return freqs


def _pooled(freqs: np.ndarray, sizes: np.ndarray, idx: list[int]):
    n = sizes[idx].sum()
    f = freqs[:, idx] @ sizes[idx] / n
    return n, f


def _batch_stats(design: StudyDesign, scenario: EffectScenario, rng, rows: int):
    """Draw one batch, redrawing replicates whose pooled frequency estimate
    for any defined statistic is 0 or 1 (the z statistic is undefined there)."""
    sizes = np.array([design.n0, design.n1, design.n0p, design.n1p], dtype=float)
    defined = [s for s in STATISTICS
               if all(sizes[i] > 0 for g in _GROUPS_IDX[s] for i in g)]
    freqs = _draw_batch(rng, design, scenario, rows)
    resampled = 0
    for _ in range(_MAX_REDRAWS):
        bad = np.zeros(rows, dtype=bool)
        for s in defined:
            ctrl_idx, case_idx = _GROUPS_IDX[s]
            nc, fc = _pooled(freqs, sizes, ctrl_idx)
            nk, fk = _pooled(freqs, sizes, case_idx)
            pooled = (nc * fc + nk * fk) / (nc + nk)
            bad |= (pooled <= 0.0) | (pooled >= 1.0)
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        resampled += n_bad
        freqs[bad] = _draw_batch(rng, design, scenario, n_bad)
    else:
        raise RuntimeError("replicate resampling failed to converge")

    z = {}
    for s in defined:
        ctrl_idx, case_idx = _GROUPS_IDX[s]
        nc, fc = _pooled(freqs, sizes, ctrl_idx)
        nk, fk = _pooled(freqs, sizes, case_idx)
        pooled = (nc * fc + nk * fk) / (nc + nk)
        se = np.sqrt(pooled * (1.0 - pooled) * (1.0 / nc + 1.0 / nk))
        z[s] = (fk - fc) / se
    return z, defined, resampled


def _method_hits(z: dict[str, np.ndarray], t: Thresholds, dt: DerivedThresholds):
    cuts = {
        "A": (t.alpha, t.beta, t.gamma),
        "B": (t.alpha, dt.beta_star, t.gamma),
        "C": (t.alpha, dt.beta_perp, t.gamma),
    }
    triples = {"A": ("d", "r", "m"), "B": ("d", "s", "m"), "C": ("c", "s", "m")}
    hits = {}
    for m, trip in triples.items():
        if any(s not in z for s in trip):
            hits[m] = None
            continue
        up = None
        down = None
        for stat, cut in zip(trip, cuts[m]):
            if cut == 1.0:
                continue  # no test at this stage, no direction constraint
            zb = z_of_cutoff(cut)
            u = z[stat] > zb
            d_ = z[stat] < -zb
            up = u if up is None else (up & u)
            down = d_ if down is None else (down & d_)
        if up is None:
            hits[m] = np.ones(len(next(iter(z.values()))), dtype=bool)
        else:
            hits[m] = up | down
    return hits


def simulate(design: StudyDesign, scenario: EffectScenario, cfg: MCConfig) -> MCResult:
    """Monte Carlo hit rates, empirical correlations and mean z-scores."""
    dt = cfg.derived
    if dt is None:
        from .thresholds import solve_beta_star

        dt = solve_beta_star(covariance(design), cfg.thresholds)

    sizes = np.array([design.n0, design.n1, design.n0p, design.n1p], dtype=float)
    defined = [s for s in STATISTICS
               if all(sizes[i] > 0 for g in _GROUPS_IDX[s] for i in g)]
    acc = _Accumulator(defined)

    n_batches = (cfg.replicates + BATCH - 1) // BATCH

    def run_batch(b: int):
        rows = min(BATCH, cfg.replicates - b * BATCH)
        rng = np.random.Generator(np.random.Philox(key=[cfg.seed, b]))
        z, _, resampled = _batch_stats(design, scenario, rng, rows)
        hits = _method_hits(z, cfg.thresholds, dt)
        return z, hits, resampled

    from .analysis import worker_count

    workers = min(worker_count(), n_batches)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for z, hits, resampled in pool.map(run_batch, range(n_batches)):
                acc.add(z, hits, resampled)
    else:
        for b in range(n_batches):
            acc.add(*run_batch(b))

    n = acc.n
    rate, rate_se = {}, {}
    for m in ("A", "B", "C"):
        if not acc.method_defined[m]:
            continue
        p = acc.hits[m] / n
        rate[m] = p
        rate_se[m] = math.sqrt(p * (1.0 - p) / n)
    mean = acc.sum_z / n
    cov_z = acc.sum_zz / n - np.outer(mean, mean)
    sd = np.sqrt(np.clip(np.diag(cov_z), 0.0, None))
    rho, rho_se = {}, {}
    for i, x in enumerate(defined):
        for j in range(i + 1, len(defined)):
            y = defined[j]
            if n < 2 or sd[i] == 0.0 or sd[j] == 0.0:
                continue
            r = float(cov_z[i, j] / (sd[i] * sd[j]))
            rho[(x, y)] = r
            rho_se[(x, y)] = (1.0 - r * r) / math.sqrt(n)
    mean_z = {s: float(mean[i]) for i, s in enumerate(defined)}
    mean_z_se = {s: float(sd[i] / math.sqrt(n)) for i, s in enumerate(defined)}
    return MCResult(
        replicates=n,
        hit_rate=rate,
        hit_se=rate_se,
        rho=rho,
        rho_se=rho_se,
        mean_z=mean_z,
        mean_z_se=mean_z_se,
        resampled=acc.resampled,
        derived=dt,
    )


def empirical_correlation(design: StudyDesign, cfg: MCConfig,
                          maf: float = 0.3) -> MCResult:
    """Null-scenario run; the correlation map is the quantity of interest
    (it is invariant to the MAF used)."""
    return simulate(design, EffectScenario.null(maf), cfg)


def stratified_correlation_mc(
    sd: StratifiedDesign, n_reps: int, seed: int, maf: float = 0.3
) -> tuple[float, float]:
    """Empirical correlation of CMH-weighted stratified z-scores for two
    studies with shared samples, plus its standard error."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    z_i = np.zeros(n_reps)
    z_j = np.zeros(n_reps)
    for st in sd.strata:
        a_i = st.n0_i * st.n1_i / (st.n0_i + st.n1_i) if st.n0_i and st.n1_i else 0.0
        a_j = st.n0_j * st.n1_j / (st.n0_j + st.n1_j) if st.n0_j and st.n1_j else 0.0
        if a_i == 0.0 and a_j == 0.0:
            continue

        def split_freqs(total_i: int, total_j: int, shared: int):
            xs = rng.binomial(shared, maf, size=n_reps) if shared else 0
            xi = rng.binomial(total_i - shared, maf, size=n_reps) if total_i > shared else 0
            xj = rng.binomial(total_j - shared, maf, size=n_reps) if total_j > shared else 0
            fi = (xs + xi) / total_i if total_i else None
            fj = (xs + xj) / total_j if total_j else None
            return fi, fj

        f0i, f0j = split_freqs(st.n0_i, st.n0_j, st.n0_shared)
        f1i, f1j = split_freqs(st.n1_i, st.n1_j, st.n1_shared)
        if a_i > 0.0:
            z_i += a_i * (f1i - f0i)
        if a_j > 0.0:
            z_j += a_j * (f1j - f0j)
    if z_i.std() == 0.0 or z_j.std() == 0.0:
        raise ValueError("no informative strata")
    r = float(np.corrcoef(z_i, z_j)[0, 1])
    return r, (1.0 - r * r) / math.sqrt(n_reps)
