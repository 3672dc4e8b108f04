"""Hit probabilities, power curves and aberrance error-rate profiles.

The probability that a SNP is declared a hit is the sum of two mirrored
shifted orthants: the all-positive orthant with bounds z_threshold - zeta and
the all-negative one, which after reflection has bounds z_threshold + zeta.
Under the full null both collapse to the conserved P0; under an alternative
or a confounded (aberrant) scenario the expected z-scores shift the bounds.

Aberrance grids are parametrised by cohort expected-MAF replacements (design
independent), with the driving expected z-score reported alongside for
plotting.  Closed-form limit values and upper bounds are attached where the
saturation behaviour is known.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .design import (
    METHOD_TRIPLES,
    CovarianceSet,
    EffectScenario,
    StudyDesign,
    ZetaVector,
    aberrant_scenario,
    covariance,
    pairwise_rho,
    scenario_from_or_maf,
    zeta,
)
from .gaussian import INF, Orthant3Query, norm_cdf, orthant2, orthant3
from .thresholds import DerivedThresholds, Thresholds, z_of_cutoff

_trapz = getattr(np, "trapezoid", None) or np.trapz

THREADS_ENV = "SHARED_CTRL_THREADS"

_DIFF_FLOOR = 1e-6   # |power diff| below this at both ends stops range growth
_LOG_OR_CAP = 5.0


class Method(str, Enum):
    A = "A"
    B = "B"
    C = "C"

    @property
    def triple(self) -> tuple[str, str, str]:
        return METHOD_TRIPLES[self.value]


MethodId = Method


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def _require_dt(dt: Optional[DerivedThresholds]) -> DerivedThresholds:
    if dt is None:
        raise ValueError("thresholds not derived")
    return dt


def hit_probability(
    method: Method | str,
    design: StudyDesign,
    scenario: EffectScenario,
    t: Thresholds,
    dt: DerivedThresholds,
    cov: Optional[CovarianceSet] = None,
    zv: Optional[ZetaVector] = None,
) -> float:
    """Probability that the method declares the SNP a hit under the scenario.

    ``cov``/``zv`` may be supplied to amortise repeated grid evaluation.
    """
    method = Method(method)
    dt = _require_dt(dt)
    cov = cov if cov is not None else covariance(design)
    corr = cov.matrix(method.value)
    if corr is None:
        raise ValueError(f"invalid design: method {method.value} scores undefined")
    zv = zv if zv is not None else zeta(design, scenario)
    shifts = []
    for stat in method.triple:
        z = zv.get(stat)
        if z is None:
            raise ValueError(f"invalid design: zeta_{stat} undefined")
        shifts.append(z)
    cuts = (t.alpha, dt.cutoff(method.value, t), t.gamma)
    z_bounds = [None if p == 1.0 else z_of_cutoff(p) for p in cuts]
    total = 0.0
    for sign in (1.0, -1.0):
        b = [
            -INF if zb is None else zb - sign * dz
            for zb, dz in zip(z_bounds, shifts)
        ]
        total += orthant3(Orthant3Query(b[0], b[1], b[2], corr))
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class PowerPoint:
    log_or: float
    power_A: float
    power_B: float
    power_C: float


@dataclass(frozen=True)
class PowerCurve:
    grid: tuple[PowerPoint, ...]
    maf: float
    design: StudyDesign
    thresholds: Thresholds
    derived: DerivedThresholds
    fa_ctrl_repl: float = 0.0
    fa_case_repl: float = 0.0

    def column(self, method: Method | str) -> np.ndarray:
        m = Method(method).value
        return np.array([getattr(p, f"power_{m}") for p in self.grid])

    @property
    def log_or(self) -> np.ndarray:
        return np.array([p.log_or for p in self.grid])


def power_curve(
    design: StudyDesign,
    t: Thresholds,
    maf: float,
    log_or_range: tuple[float, float],
    n_points: int,
    fa_ctrl_repl: float = 0.0,
    fa_case_repl: float = 0.0,
    dt: Optional[DerivedThresholds] = None,
) -> PowerCurve:
    """Hit probability of all three methods on a uniform log-OR grid.

    One DerivedThresholds is solved per design and reused across the grid.
    """
    if n_points < 3:
        raise ValueError("invalid argument: n_points must be >= 3")
    if dt is None:
        from .thresholds import solve_beta_star

        dt = solve_beta_star(covariance(design), t)
    cov = covariance(design)
    lo, hi = log_or_range
    grid = np.linspace(lo, hi, n_points)

    def point(g: float) -> PowerPoint:
        scen = scenario_from_or_maf(math.exp(g), maf, fa_ctrl_repl, fa_case_repl)
        zv = zeta(design, scen)
        return PowerPoint(
            log_or=float(g),
            power_A=hit_probability(Method.A, design, scen, t, dt, cov, zv),
            power_B=hit_probability(Method.B, design, scen, t, dt, cov, zv),
            power_C=hit_probability(Method.C, design, scen, t, dt, cov, zv),
        )

    workers = worker_count()
    if workers > 1 and n_points >= 16:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(point, grid))
    else:
        points = tuple(point(g) for g in grid)
    return PowerCurve(
        grid=points, maf=maf, design=design, thresholds=t, derived=dt,
        fa_ctrl_repl=fa_ctrl_repl, fa_case_repl=fa_case_repl,
    )


def power_summary(curve: PowerCurve, pair: tuple[Method | str, Method | str]) -> dict:
    """Trapezoid integral and grid maximum of (power_second - power_first)
    over log-OR.  The range is widened by doubling (up to |logOR| <= 5)
    until the difference falls below 1e-6 at both ends."""
    first, second = (Method(p) for p in pair)
    cur = curve
    for _ in range(8):
        diff = cur.column(second) - cur.column(first)
        lo, hi = cur.grid[0].log_or, cur.grid[-1].log_or
        ends_small = abs(diff[0]) < _DIFF_FLOOR and abs(diff[-1]) < _DIFF_FLOOR
        at_cap = lo <= -_LOG_OR_CAP and hi >= _LOG_OR_CAP
        if ends_small or at_cap:
            break
        lo2 = max(-_LOG_OR_CAP, lo - (hi - lo) / 2.0)
        hi2 = min(_LOG_OR_CAP, hi + (hi - lo) / 2.0)
        cur = power_curve(
            cur.design, cur.thresholds, cur.maf, (lo2, hi2),
            max(len(cur.grid), 2 * len(cur.grid) - 1),
            cur.fa_ctrl_repl, cur.fa_case_repl, dt=cur.derived,
        )
    diff = cur.column(second) - cur.column(first)
    return {
        "mean_diff": float(_trapz(diff, cur.log_or)),
        "max_diff": float(diff.max()),
    }


@dataclass(frozen=True)
class ErrorPoint:
    zeta_driver: float
    R_A: float
    R_B: float
    R_C: float
    scenario: EffectScenario


@dataclass(frozen=True)
class MethodLimits:
    at_zero: float
    at_pos_inf: float
    at_neg_inf: float


@dataclass(frozen=True)
class ErrorProfile:
    aberrant_cohorts: tuple[str, ...]
    grid: tuple[ErrorPoint, ...]
    limits: dict[str, MethodLimits]

    def column(self, method: Method | str) -> np.ndarray:
        m = Method(method).value
        return np.array([getattr(p, f"R_{m}") for p in self.grid])


def _subset_orthant(corr, z_bounds: list[Optional[float]], keep: list[int]) -> float:
    """Orthant probability over the kept coordinates at their bounds."""
    if not keep:
        return 1.0
    if len(keep) == 1:
        return norm_cdf(-z_bounds[keep[0]])
    if len(keep) == 2:
        i, j = keep
        return orthant2(z_bounds[i], z_bounds[j], corr.rho(i, j))
    return orthant3(Orthant3Query(z_bounds[0], z_bounds[1], z_bounds[2], corr))


def _method_limits(
    method: Method,
    cov: CovarianceSet,
    t: Thresholds,
    dt: DerivedThresholds,
    drift_signs: Mapping[str, int],
    dir_pos: int = 1,
) -> MethodLimits:
    """Saturation values of the hit rate as the aberrance grows without
    bound in either direction.

    Scores with drift leave the picture (their constraints are met or missed
    almost surely); what remains is the orthant over the undrifted scores.
    Mixed drift directions kill both mirrored orthants.
    """
    corr = cov.matrix(method.value)
    cuts = (t.alpha, dt.cutoff(method.value, t), t.gamma)
    z_bounds: list[Optional[float]] = [
        None if p == 1.0 else z_of_cutoff(p) for p in cuts
    ]
    active = [i for i, z in enumerate(z_bounds) if z is not None]
    signs = [drift_signs.get(stat, 0) for stat in method.triple]

    def one_sided(direction: int) -> float:
        drifters = [signs[i] * direction for i in active if signs[i] != 0]
        keep = [i for i in active if signs[i] == 0]
        if not drifters:
            return dt.p0
        total = 0.0
        if all(s > 0 for s in drifters):
            total += _subset_orthant(corr, z_bounds, keep)
        if all(s < 0 for s in drifters):
            total += _subset_orthant(corr, z_bounds, keep)
        return total

    return MethodLimits(
        at_zero=dt.p0, at_pos_inf=one_sided(dir_pos), at_neg_inf=one_sided(-dir_pos)
    )


def error_profile(
    design: StudyDesign,
    t: Thresholds,
    dt: DerivedThresholds,
    aberrant: Mapping[str, Sequence[float]],
    base_maf: float,
) -> ErrorProfile:
    """False-positive rates of methods A/B/C for a null SNP whose expected
    MAF is aberrant in the given cohorts.

    ``aberrant`` maps cohort names to equal-length grids of replacement MAFs
    (composable across cohorts).  The reported driver is zeta_d when a
    discovery cohort is aberrant, else zeta_r.
    """
    dt = _require_dt(dt)
    if not aberrant:
        raise ValueError("invalid argument: no aberrant cohorts given")
    lengths = {len(v) for v in aberrant.values()}
    if len(lengths) != 1:
        raise ValueError("invalid argument: aberrance grids must share one length")
    cohorts = tuple(aberrant.keys())
    n = lengths.pop()
    cov = covariance(design)
    base = EffectScenario.null(base_maf)
    driver_stat = "d" if any(c in ("C0", "C1") for c in cohorts) else "r"

    points = []
    for i in range(n):
        scen = base
        for c in cohorts:
            scen = aberrant_scenario(scen, c, float(aberrant[c][i]))
        zv = zeta(design, scen)
        points.append(
            ErrorPoint(
                zeta_driver=zv.get(driver_stat),
                R_A=hit_probability(Method.A, design, scen, t, dt, cov, zv),
                R_B=hit_probability(Method.B, design, scen, t, dt, cov, zv),
                R_C=hit_probability(Method.C, design, scen, t, dt, cov, zv),
                scenario=scen,
            )
        )

    # drift directions: probe each aberrant cohort slightly above base
    probe = base
    for c in cohorts:
        end = float(aberrant[c][-1])
        step = 0.01 if end >= base_maf else -0.01
        probe_mu = min(0.99, max(0.01, base_maf + step))
        probe = aberrant_scenario(probe, c, probe_mu)
    zp = zeta(design, probe)
    drift = {
        s: (0 if zp.get(s) is None or abs(zp.get(s)) < 1e-12
            else (1 if zp.get(s) > 0 else -1))
        for s in ("d", "r", "s", "c", "m")
    }
    # orient limits so "pos" means the reported driver tends to +inf
    dir_pos = drift.get(driver_stat) or 1
    limits = {
        m.value: _method_limits(m, cov, t, dt, drift, dir_pos)
        for m in (Method.A, Method.B, Method.C)
    }
    return ErrorProfile(aberrant_cohorts=cohorts, grid=tuple(points), limits=limits)


@dataclass(frozen=True)
class AberranceBounds:
    """Closed-form summaries of replication-cohort aberrance (gamma = 1
    regime; advisory elsewhere)."""

    k: float
    k1: float
    rho_ds: float
    max_rb_minus_ra: float
    integral_ratio: float

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "k1": self.k1,
            "rho_ds": self.rho_ds,
            "max_rb_minus_ra": self.max_rb_minus_ra,
            "integral_ratio": self.integral_ratio,
        }


def aberrance_bounds(design: StudyDesign, t: Thresholds) -> AberranceBounds:
    """Upper bound on the type-1-error increase under replication-case
    aberrance, plus the integral ratio of the C0'-aberrance improvement to
    the C1'-aberrance loss."""
    n0, n1, n0p, n1p = design.n0, design.n1, design.n0p, design.n1p
    if n0p == 0:
        raise ValueError("invalid design: k undefined without replication controls")
    k = math.sqrt((n0 + n0p) * (n0p + n1p) / (n0p * (n0 + n0p + n1p)))
    k1 = math.sqrt(n0p * (n0p + n1p) / ((n0 + n0p) * (n0 + n0p + n1p)))
    rho = pairwise_rho(design, "d", "s") if n0 > 0 else 0.0
    root = math.sqrt((1.0 - rho) * (1.0 + rho))
    bound = (t.alpha / (2.0 * math.sqrt(2.0 * math.pi))) * (k / root - 1.0) * t.z_beta
    denom = root / k - 1.0
    ratio = (1.0 - root / k1) / denom if denom != 0.0 else math.inf
    return AberranceBounds(
        k=k, k1=k1, rho_ds=rho, max_rb_minus_ra=bound, integral_ratio=ratio
    )
