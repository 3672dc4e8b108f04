"""Study designs, effect scenarios and the induced z-score structure.

Five signed z-scores are tracked throughout the package, each a two-sample
proportion comparison between a case group and a control group:

    d : discovery cases C1 vs discovery controls C0
    r : replication cases C1' vs replication controls C0'
    s : replication cases C1' vs pooled controls C0 u C0'
    c : discovery cases C1 vs pooled controls C0 u C0'
    m : pooled cases C1 u C1' vs pooled controls C0 u C0'

Counting convention: every sample contributes one observation, so a group of
n samples has frequency variance mu(1-mu)/n.  This fixes the absolute scale
of expected z-scores; correlations, determinants and every derived threshold
are invariant to it.  The Monte Carlo oracle draws Binomial(n, mu) counts per
cohort under the same convention, so the two sides stay comparable.

Correlations between the five scores are derived from first principles via
shared-sample variance bookkeeping rather than transcribed from a closed
form: each score is a normalized difference of group frequency means, and
two scores covary exactly through the samples their groups share.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .gaussian import EPS_SING, CorrMatrix3

COHORTS = ("C0", "C1", "C0p", "C1p")
STATISTICS = ("d", "r", "s", "c", "m")

# statistic -> (control cohorts, case cohorts)
STAT_GROUPS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "d": (("C0",), ("C1",)),
    "r": (("C0p",), ("C1p",)),
    "s": (("C0", "C0p"), ("C1p",)),
    "c": (("C0", "C0p"), ("C1",)),
    "m": (("C0", "C0p"), ("C1", "C1p")),
}

# score triple entering each method's hit rule, in (discovery,
# replication, meta) coordinate order
METHOD_TRIPLES = {"A": ("d", "r", "m"), "B": ("d", "s", "m"), "C": ("c", "s", "m")}


@dataclass(frozen=True)
class StudyDesign:
    """Cohort sizes of a two-stage design (samples, not alleles)."""

    n0: int
    n1: int
    n0p: int
    n1p: int

    def __post_init__(self):
        for name in ("n0", "n1", "n0p", "n1p"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
                raise ValueError(f"invalid design: {name} must be a non-negative integer")
        if self.n1 <= 0 or self.n1p <= 0:
            raise ValueError("invalid design: n1 and n1p must be positive")
        if self.n0 + self.n0p <= 0:
            raise ValueError("invalid design: n0 + n0p must be positive")

    @property
    def sizes(self) -> dict[str, int]:
        return {"C0": self.n0, "C1": self.n1, "C0p": self.n0p, "C1p": self.n1p}

    @property
    def supports_method_a(self) -> bool:
        return self.n0 > 0 and self.n0p > 0

    def group_size(self, cohorts: Iterable[str]) -> int:
        sizes = self.sizes
        return sum(sizes[c] for c in cohorts)

    def scaled(self, factor: int) -> "StudyDesign":
        return StudyDesign(self.n0 * factor, self.n1 * factor,
                           self.n0p * factor, self.n1p * factor)

    def to_dict(self) -> dict:
        return {"n0": self.n0, "n1": self.n1, "n0p": self.n0p, "n1p": self.n1p}

    @classmethod
    def from_dict(cls, d: Mapping) -> "StudyDesign":
        try:
            return cls(int(d["n0"]), int(d["n1"]), int(d["n0p"]), int(d["n1p"]))
        except KeyError as e:
            raise ValueError(f"invalid design: missing field {e.args[0]!r}") from None


@dataclass(frozen=True)
class EffectScenario:
    """Expected minor allele frequency per cohort."""

    mu0: float
    mu1: float
    mu0p: float
    mu1p: float

    def __post_init__(self):
        for name in ("mu0", "mu1", "mu0p", "mu1p"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"invalid scenario: {name} must lie strictly in (0,1)")

    @classmethod
    def null(cls, maf: float) -> "EffectScenario":
        return cls(maf, maf, maf, maf)

    @property
    def is_null(self) -> bool:
        return self.mu0 == self.mu1 == self.mu0p == self.mu1p

    def mu(self, cohort: str) -> float:
        return {"C0": self.mu0, "C1": self.mu1, "C0p": self.mu0p, "C1p": self.mu1p}[cohort]

    def to_dict(self) -> dict:
        return {"mu0": self.mu0, "mu1": self.mu1, "mu0p": self.mu0p, "mu1p": self.mu1p}

    @classmethod
    def from_dict(cls, d: Mapping) -> "EffectScenario":
        try:
            return cls(float(d["mu0"]), float(d["mu1"]), float(d["mu0p"]), float(d["mu1p"]))
        except KeyError as e:
            raise ValueError(f"invalid scenario: missing field {e.args[0]!r}") from None


@dataclass(frozen=True)
class ZetaVector:
    """Expected z-scores; a component is None when its statistic has an
    empty group (reported as absent, never as zero)."""

    zeta_d: Optional[float]
    zeta_r: Optional[float]
    zeta_s: Optional[float]
    zeta_c: Optional[float]
    zeta_m: Optional[float]

    def get(self, stat: str) -> Optional[float]:
        return getattr(self, f"zeta_{stat}")

    def as_dict(self) -> dict:
        return {s: self.get(s) for s in STATISTICS}


def scenario_from_or_maf(
    odds_ratio: float,
    maf: float,
    fa_ctrl_repl: float = 0.0,
    fa_case_repl: float = 0.0,
) -> EffectScenario:
    """Build a scenario from an allelic odds ratio and the unweighted mean
    MAF mu = (mu0 + mu1)/2, then mix in replication-stage misascertainment.

    fa_ctrl_repl (kappa0) is the fraction of C0' actually drawn from the case
    population; fa_case_repl (kappa1) the fraction of C1' drawn from the
    control population.
    """
    if not (0.0 < maf < 1.0):
        raise ValueError("infeasible OR/MAF pair: maf must lie in (0,1)")
    if odds_ratio <= 0.0 or math.isnan(odds_ratio):
        raise ValueError("infeasible OR/MAF pair: odds ratio must be positive")
    for k in (fa_ctrl_repl, fa_case_repl):
        if not (0.0 <= k <= 1.0):
            raise ValueError("invalid scenario: misascertainment fractions must lie in [0,1]")

    if odds_ratio == 1.0:
        mu0 = mu1 = maf
    else:
        # R*mu0*(1-mu1) = mu1*(1-mu0) with mu1 = 2*maf - mu0 reduces to
        # (R-1)*mu0^2 + (R+1 - 2*maf*(R-1))*mu0 - 2*maf = 0
        qa = odds_ratio - 1.0
        qb = odds_ratio + 1.0 - 2.0 * maf * qa
        qc = -2.0 * maf
        disc = qb * qb - 4.0 * qa * qc
        if disc <= 0.0:
            raise ValueError("infeasible OR/MAF pair")
        qq = -(qb + math.copysign(math.sqrt(disc), qb)) / 2.0
        roots = [r for r in (qq / qa, qc / qq) if 0.0 < r < min(1.0, 2.0 * maf)]
        roots = [r for r in roots if 0.0 < 2.0 * maf - r < 1.0]
        if not roots:
            raise ValueError("infeasible OR/MAF pair")
        mu0 = roots[0]
        mu1 = 2.0 * maf - mu0
        implied = mu1 * (1.0 - mu0) / (mu0 * (1.0 - mu1))
        if abs(implied - odds_ratio) > 1e-9 * odds_ratio:
            raise ValueError("infeasible OR/MAF pair")

    mu0p = (1.0 - fa_ctrl_repl) * mu0 + fa_ctrl_repl * mu1
    mu1p = (1.0 - fa_case_repl) * mu1 + fa_case_repl * mu0
    return EffectScenario(mu0=mu0, mu1=mu1, mu0p=mu0p, mu1p=mu1p)


def aberrant_scenario(base: EffectScenario, cohort: str, shifted_mu: float) -> EffectScenario:
    """Copy of ``base`` with one cohort's expected MAF replaced.  Compose for
    aberrance in two or more cohorts."""
    if cohort not in COHORTS:
        raise ValueError(f"invalid scenario: unknown cohort {cohort!r}")
    field = {"C0": "mu0", "C1": "mu1", "C0p": "mu0p", "C1p": "mu1p"}[cohort]
    return dataclasses.replace(base, **{field: shifted_mu})


def _group_mean(design: StudyDesign, scenario: EffectScenario,
                cohorts: tuple[str, ...]) -> tuple[int, float]:
    sizes = design.sizes
    n = sum(sizes[c] for c in cohorts)
    if n == 0:
        return 0, float("nan")
    mu = sum(sizes[c] * scenario.mu(c) for c in cohorts) / n
    return n, mu


def expected_z(design: StudyDesign, scenario: EffectScenario, stat: str) -> Optional[float]:
    """Expected value of one statistic; None when a compared group is empty.

    The pooled mean in the variance term is the count-weighted mean of
    exactly the two groups compared by the statistic.
    """
    ctrl, case = STAT_GROUPS[stat]
    n_c, f_c = _group_mean(design, scenario, ctrl)
    n_k, f_k = _group_mean(design, scenario, case)
    if n_c == 0 or n_k == 0:
        return None
    mubar = (n_c * f_c + n_k * f_k) / (n_c + n_k)
    se = math.sqrt(mubar * (1.0 - mubar) * (1.0 / n_c + 1.0 / n_k))
    return (f_k - f_c) / se


def zeta(design: StudyDesign, scenario: EffectScenario) -> ZetaVector:
    """Expected z-scores of all five statistics under the scenario."""
    vals = {s: expected_z(design, scenario, s) for s in STATISTICS}
    return ZetaVector(
        zeta_d=vals["d"], zeta_r=vals["r"], zeta_s=vals["s"],
        zeta_c=vals["c"], zeta_m=vals["m"],
    )


def pairwise_rho(design: StudyDesign, x: str, y: str) -> Optional[float]:
    """Null correlation of two statistics from shared-sample bookkeeping.

    Each statistic is (case mean - control mean) with var(mean) = s^2/n per
    group; two statistics covary through the samples common to both control
    groups and both case groups.
    """
    if x == y:
        return 1.0
    sizes = design.sizes
    (c0x, c1x), (c0y, c1y) = STAT_GROUPS[x], STAT_GROUPS[y]
    u0x, u1x = design.group_size(c0x), design.group_size(c1x)
    u0y, u1y = design.group_size(c0y), design.group_size(c1y)
    if 0 in (u0x, u1x, u0y, u1y):
        return None
    shared0 = sum(sizes[c] for c in set(c0x) & set(c0y))
    shared1 = sum(sizes[c] for c in set(c1x) & set(c1y))
    num = shared0 / (u0x * u0y) + shared1 / (u1x * u1y)
    return num / math.sqrt((1.0 / u0x + 1.0 / u1x) * (1.0 / u0y + 1.0 / u1y))


def det_sigma_a_closed_form(design: StudyDesign) -> float:
    n0, n1, n0p, n1p = (float(design.n0), float(design.n1),
                        float(design.n0p), float(design.n1p))
    return (n0 * n1p - n0p * n1) ** 2 / (
        (n0 + n0p) * (n1 + n1p) * (n0 + n1) * (n0p + n1p)
    )


def det_sigma_b_closed_form(design: StudyDesign) -> float:
    n0, n1, n0p, n1p = (float(design.n0), float(design.n1),
                        float(design.n0p), float(design.n1p))
    return n0p * n1 * n1 / ((n0 + n1) * (n0 + n0p + n1p) * (n1 + n1p))


@dataclass(frozen=True)
class CovarianceSet:
    """Correlation matrices of the three method score triples plus the full
    pairwise map.  A matrix is None when the design leaves one of its scores
    undefined (e.g. n0 = 0 kills d)."""

    sigma_A: Optional[CorrMatrix3]
    sigma_B: Optional[CorrMatrix3]
    sigma_C: Optional[CorrMatrix3]
    rho: dict[tuple[str, str], float]
    singular: dict[str, bool]

    def matrix(self, method: str) -> Optional[CorrMatrix3]:
        return {"A": self.sigma_A, "B": self.sigma_B, "C": self.sigma_C}[method]

    def pair(self, x: str, y: str) -> Optional[float]:
        if x == y:
            return 1.0
        return self.rho.get((x, y), self.rho.get((y, x)))


def covariance(design: StudyDesign) -> CovarianceSet:
    """Correlation structure of (d, r, s, c, m) for the design.

    Cross-checked at construction time against the closed-form determinant
    identities for the method A and B triples.
    """
    rho_map: dict[tuple[str, str], float] = {}
    for i, x in enumerate(STATISTICS):
        for y in STATISTICS[i + 1:]:
            r = pairwise_rho(design, x, y)
            if r is not None:
                rho_map[(x, y)] = r

    def build(trip: tuple[str, str, str]) -> Optional[CorrMatrix3]:
        pairs = [(trip[0], trip[1]), (trip[0], trip[2]), (trip[1], trip[2])]
        vals = []
        for x, y in pairs:
            r = rho_map.get((x, y), rho_map.get((y, x)))
            if r is None:
                return None
            vals.append(r)
        return CorrMatrix3(rho_12=vals[0], rho_13=vals[1], rho_23=vals[2], labels=trip)

    sigma_a = build(METHOD_TRIPLES["A"])
    sigma_b = build(METHOD_TRIPLES["B"])
    sigma_c = build(METHOD_TRIPLES["C"])

    if sigma_a is not None:
        if abs(sigma_a.rho_12) > 1e-15:
            raise AssertionError("rho_dr must vanish for disjoint stage cohorts")
        if abs(sigma_a.det() - det_sigma_a_closed_form(design)) > 1e-12:
            raise AssertionError("sigma_A determinant identity violated")
    if sigma_b is not None:
        if abs(sigma_b.det() - det_sigma_b_closed_form(design)) > 1e-12:
            raise AssertionError("sigma_B determinant identity violated")

    singular = {
        m: (mat.is_singular(EPS_SING) if mat is not None else False)
        for m, mat in (("A", sigma_a), ("B", sigma_b), ("C", sigma_c))
    }
    return CovarianceSet(sigma_A=sigma_a, sigma_B=sigma_b, sigma_C=sigma_c,
                         rho=rho_map, singular=singular)


# ---------------------------------------------------------------------------
# Stratified designs (CMH weights)


@dataclass(frozen=True)
class Stratum:
    """Per-stratum counts for two studies i and j with shared samples."""

    n0_i: int
    n1_i: int
    n0_j: int
    n1_j: int
    n0_shared: int
    n1_shared: int

    def __post_init__(self):
        for name in ("n0_i", "n1_i", "n0_j", "n1_j", "n0_shared", "n1_shared"):
            if getattr(self, name) < 0:
                raise ValueError(f"invalid design: stratum count {name} negative")
        if self.n0_shared > min(self.n0_i, self.n0_j):
            raise ValueError("invalid design: shared controls exceed per-study counts")
        if self.n1_shared > min(self.n1_i, self.n1_j):
            raise ValueError("invalid design: shared cases exceed per-study counts")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class StratifiedDesign:
    strata: tuple[Stratum, ...]

    def __post_init__(self):
        if not self.strata:
            raise ValueError("invalid design: no strata")

    def to_dict(self) -> dict:
        return {"strata": [s.to_dict() for s in self.strata]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "StratifiedDesign":
        return cls(tuple(Stratum(**s) for s in d["strata"]))


def _cmh_weight(n0: int, n1: int) -> float:
    if n0 <= 0 or n1 <= 0:
        return 0.0
    return n0 * n1 / (n0 + n1)


def covariance_stratified(sd: StratifiedDesign, weights: str = "CMH") -> float:
    """Null correlation of the two studies' stratified z-scores.

    With a single stratum this reduces exactly to the unstratified pairwise
    correlation.  Strata degenerate for a study contribute zero weight there.
    """
    if weights != "CMH":
        raise ValueError(f"invalid design: unsupported weighting {weights!r}")
    num = 0.0
    var_i = 0.0
    var_j = 0.0
    for st in sd.strata:
        a_i = _cmh_weight(st.n0_i, st.n1_i)
        a_j = _cmh_weight(st.n0_j, st.n1_j)
        if a_i > 0.0:
            var_i += a_i * a_i * (1.0 / st.n0_i + 1.0 / st.n1_i)
        if a_j > 0.0:
            var_j += a_j * a_j * (1.0 / st.n0_j + 1.0 / st.n1_j)
        if a_i > 0.0 and a_j > 0.0:
            num += a_i * a_j * (
                st.n0_shared / (st.n0_i * st.n0_j)
                + st.n1_shared / (st.n1_i * st.n1_j)
            )
    if var_i <= 0.0 or var_j <= 0.0:
        raise ValueError("no informative strata")
    return num / math.sqrt(var_i * var_j)


# ---------------------------------------------------------------------------
# Covariate-weighted scores: closed-form and simulation-based correlation


@dataclass(frozen=True)
class WeightTable:
    """Per-sample score coefficients for two studies over a common sample
    registry.  A zero weight means the sample is not in that study."""

    is_case: np.ndarray
    w_i: np.ndarray
    w_j: np.ndarray
    maf: float = 0.25

    def __post_init__(self):
        n = len(self.is_case)
        if len(self.w_i) != n or len(self.w_j) != n:
            raise ValueError("degenerate weights: tables must share one registry")
        if np.any(self.w_i < 0) or np.any(self.w_j < 0):
            raise ValueError("degenerate weights: coefficients must be non-negative")


@dataclass(frozen=True)
class SimulatedCorrelation:
    rho: float
    stderr: float
    closed_form: float
    n_reps: int


def _weighted_score(w: np.ndarray, is_case: np.ndarray, genotypes: np.ndarray) -> np.ndarray:
    case = (w > 0) & is_case
    ctrl = (w > 0) & ~is_case
    n1, n0 = int(case.sum()), int(ctrl.sum())
    if n1 == 0 or n0 == 0:
        raise ValueError("degenerate weights: a study is missing cases or controls")
    return (genotypes[:, case] @ w[case]) / n1 - (genotypes[:, ctrl] @ w[ctrl]) / n0


def correlation_closed_form(table: WeightTable) -> float:
    """Finite-sample correlation of the two weighted scores from the
    coefficient tables alone (no simulation)."""
    in_i, in_j = table.w_i > 0, table.w_j > 0
    is_case = table.is_case
    n1i = int((in_i & is_case).sum())
    n0i = int((in_i & ~is_case).sum())
    n1j = int((in_j & is_case).sum())
    n0j = int((in_j & ~is_case).sum())
    if 0 in (n1i, n0i, n1j, n0j):
        raise ValueError("degenerate weights: a study is missing cases or controls")
    shared = in_i & in_j
    num = (
        float((table.w_i * table.w_j)[shared & ~is_case].sum()) / (n0i * n0j)
        + float((table.w_i * table.w_j)[shared & is_case].sum()) / (n1i * n1j)
    )
    var_i = (
        float((table.w_i[in_i & is_case] ** 2).sum()) / n1i**2
        + float((table.w_i[in_i & ~is_case] ** 2).sum()) / n0i**2
    )
    var_j = (
        float((table.w_j[in_j & is_case] ** 2).sum()) / n1j**2
        + float((table.w_j[in_j & ~is_case] ** 2).sum()) / n0j**2
    )
    if var_i <= 0.0 or var_j <= 0.0:
        raise ValueError("degenerate weights: zero-variance score")
    return num / math.sqrt(var_i * var_j)


def covariance_simulated(table: WeightTable, n_reps: int, seed: int) -> SimulatedCorrelation:
    """Sample correlation of the weighted scores over simulated null
    genotypes (diploid Binomial(2, maf) per sample), with its standard error
    and the closed-form finite-sample value."""
    if n_reps < 1000:
        raise ValueError("invalid argument: n_reps must be >= 1000")
    closed = correlation_closed_form(table)
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    n_samples = len(table.is_case)
    z_i = np.empty(n_reps)
    z_j = np.empty(n_reps)
    batch = 4096
    for start in range(0, n_reps, batch):
        stop = min(start + batch, n_reps)
        g = rng.binomial(2, table.maf, size=(stop - start, n_samples)).astype(float)
        z_i[start:stop] = _weighted_score(table.w_i, table.is_case, g)
        z_j[start:stop] = _weighted_score(table.w_j, table.is_case, g)
    if z_i.std() == 0.0 or z_j.std() == 0.0:
        raise ValueError("degenerate weights: zero-variance score")
    r = float(np.corrcoef(z_i, z_j)[0, 1])
    se = (1.0 - r * r) / math.sqrt(n_reps)
    return SimulatedCorrelation(rho=r, stderr=se, closed_form=closed, n_reps=n_reps)


def flat_weight_table(design: StudyDesign, study_i: str, study_j: str,
                      maf: float = 0.25) -> WeightTable:
    """Uniform-weight table for two of the five statistics on a design's
    sample registry; reproduces the unweighted tests exactly."""
    sizes = design.sizes
    offsets = {}
    total = 0
    for c in COHORTS:
        offsets[c] = (total, total + sizes[c])
        total += sizes[c]
    is_case = np.zeros(total, dtype=bool)
    for c in ("C1", "C1p"):
        lo, hi = offsets[c]
        is_case[lo:hi] = True

    def weights(stat: str) -> np.ndarray:
        w = np.zeros(total)
        ctrl, case = STAT_GROUPS[stat]
        for c in ctrl + case:
            lo, hi = offsets[c]
            w[lo:hi] = 1.0
        return w

    return WeightTable(is_case=is_case, w_i=weights(study_i), w_j=weights(study_j), maf=maf)
