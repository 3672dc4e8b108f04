"""Adjusted replication thresholds.

Pooling controls correlates the replication score with the discovery score,
so reusing the nominal replication cutoff would inflate the joint null
rejection rate.  This module solves for the adjusted two-sided cutoffs
(beta_star for the pooled-replication design, beta_perp for pooling at both
stages) that keep the joint type-1 error under the full null equal to the
independent-cohorts value P0.

A hit requires all stage p-values below their cutoffs *and* a common effect
direction, which the integrals encode as two mirrored all-positive /
all-negative orthants; under the null the two are equal, hence the factor 2.
A cutoff of exactly 1 means "no test at that stage": the coordinate is
marginalised entirely (direction included).  With every coordinate
marginalised the joint probability is 1, not 2 - the mirrored orthants are
disjoint only while at least one coordinate is constrained.

Root-finding runs on the z-scale, where the target is near-linear in the
solved threshold; convergence is measured relative to P0 so that solutions
remain meaningful when P0 itself is ~1e-18 (deep genome-wide regimes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .gaussian import (
    CorrMatrix3,
    Orthant3Query,
    norm_cdf,
    norm_quantile,
    orthant2_tail,
    orthant3,
)
from .design import CovarianceSet

_REL_FTOL = 1e-11   # relative-to-P0 residual target
_Z_WIDTH_TOL = 5e-13
_MAX_ITER = 200


class SolverFailure(RuntimeError):
    """Bracketing or convergence failure in the threshold solver."""


@dataclass(frozen=True)
class Thresholds:
    """Two-sided p-value cutoffs for the discovery, replication and meta
    stages.  A value of exactly 1 disables that stage's test."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if math.isnan(v) or not (0.0 < v <= 1.0):
                raise ValueError("thresholds must lie in (0,1]")

    @property
    def z_alpha(self) -> float:
        return z_of_cutoff(self.alpha)

    @property
    def z_beta(self) -> float:
        return z_of_cutoff(self.beta)

    @property
    def z_gamma(self) -> float:
        return z_of_cutoff(self.gamma)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d) -> "Thresholds":
        try:
            return cls(float(d["alpha"]), float(d["beta"]), float(d["gamma"]))
        except KeyError as e:
            raise ValueError(f"invalid thresholds: missing field {e.args[0]!r}") from None


def z_of_cutoff(p: float) -> float:
    """Positive z bound of a two-sided cutoff: z_p = -Phi^-1(p/2)."""
    return -norm_quantile(p / 2.0)


def cutoff_of_z(z: float) -> float:
    return 2.0 * norm_cdf(-z)


@dataclass(frozen=True)
class DerivedThresholds:
    """Solved replication cutoffs plus the conserved joint null rate."""

    beta_star: float
    beta_perp: float
    p0: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def z_beta_star(self) -> float:
        return z_of_cutoff(self.beta_star)

    @property
    def z_beta_perp(self) -> float:
        return z_of_cutoff(self.beta_perp)

    def cutoff(self, method: str, t: Thresholds) -> float:
        return {"A": t.beta, "B": self.beta_star, "C": self.beta_perp}[method]

    def to_dict(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "beta_perp": self.beta_perp,
            "p0": self.p0,
            "diagnostics": dict(self.diagnostics),
        }


def _joint_z(corr: CorrMatrix3, z1: Optional[float], z2: Optional[float],
             z3: Optional[float]) -> float:
    """2 x P(all constrained scores exceed their z bounds, same sign);
    None marks a marginalised coordinate."""
    bounds = [z1, z2, z3]
    idx = [i for i, b in enumerate(bounds) if b is not None]
    if not idx:
        return 1.0
    if len(idx) == 1:
        return min(1.0, 2.0 * norm_cdf(-bounds[idx[0]]))
    if len(idx) == 2:
        # the gamma = 1 regime is where extreme-threshold solving happens;
        # use the relatively-accurate tail path for the surviving pair
        i, j = idx
        return min(1.0, 2.0 * orthant2_tail(bounds[i], bounds[j], corr.rho(i, j)))
    q = Orthant3Query(a=bounds[0], b=bounds[1], c=bounds[2], corr=corr)
    return min(1.0, 2.0 * orthant3(q, abs_tol=0.0, rel_tol=1e-11))


def p_joint(corr: CorrMatrix3, t: Thresholds,
            beta_override: Optional[float] = None) -> float:
    """Joint null rejection probability for score triple ``corr`` at
    thresholds (alpha, beta_override or beta, gamma)."""
    mid = t.beta if beta_override is None else beta_override
    if math.isnan(mid) or not (0.0 < mid <= 1.0):
        raise ValueError("thresholds must lie in (0,1]")
    z1 = None if t.alpha == 1.0 else t.z_alpha
    z2 = None if mid == 1.0 else z_of_cutoff(mid)
    z3 = None if t.gamma == 1.0 else t.z_gamma
    return _joint_z(corr, z1, z2, z3)


def _solve_middle_z(corr: CorrMatrix3, z1: Optional[float], z3: Optional[float],
                    z_lo: float, p0: float, rho_guard: float) -> tuple[float, int, float]:
    """Find z with joint(corr, z1, z, z3) = p0; the joint is strictly
    decreasing in z.  Safeguarded secant with bisection fallback."""

    def f(z: float) -> float:
        return _joint_z(corr, z1, z, z3) - p0

    ftol = max(1e-300, _REL_FTOL * p0)
    lo = z_lo
    hi = z_lo + abs(rho_guard) * (abs(z1) if z1 is not None else 0.0) + 12.0
    flo = f(lo)
    if abs(flo) <= ftol:
        if flo <= 0.0:
            return lo, 1, abs(flo)
        # root is a hair above the bracket start (weak coupling: the joint
        # rate barely moves with the middle threshold).  Resolve it to first
        # order so the strict ordering beta* < beta survives in floats; the
        # two evaluations share quadrature structure, so their difference is
        # trustworthy far below the single-evaluation noise floor.
        h = 1e-4 * max(1.0, abs(lo))
        slope = (f(lo + h) - flo) / h
        step = flo / -slope if slope < 0.0 else 0.0
        z = lo + min(h, max(step, math.ulp(lo)))
        return z, 2, abs(flo)
    fhi = f(hi)
    if fhi > 0.0:
        raise SolverFailure(
            f"solver failure: bracket [{lo:.3f}, {hi:.3f}] does not enclose the root"
        )
    a, fa, b, fb = lo, flo, hi, fhi
    x_prev, f_prev = a, fa
    x_cur, f_cur = b, fb
    best_x, best_f = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    for it in range(2, _MAX_ITER + 1):
        # secant proposal, clipped into the open bracket
        if f_cur != f_prev:
            x_new = x_cur - f_cur * (x_cur - x_prev) / (f_cur - f_prev)
        else:
            x_new = 0.5 * (a + b)
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        f_new = f(x_new)
        if abs(f_new) < abs(best_f):
            best_x, best_f = x_new, f_new
        if abs(f_new) <= ftol or (b - a) <= _Z_WIDTH_TOL * max(1.0, abs(x_new)):
            return x_new, it, abs(f_new)
        if f_new > 0.0:
            a, fa = x_new, f_new
        else:
            b, fb = x_new, f_new
        x_prev, f_prev = x_cur, f_cur
        x_cur, f_cur = x_new, f_new
    return best_x, _MAX_ITER, abs(best_f)


def solve_beta_star(cov: CovarianceSet, t: Thresholds,
                    mode: str = "general") -> DerivedThresholds:
    """Solve for beta_star (pooled replication controls) and beta_perp
    (pooled controls at both stages) conserving the joint null rate P0.

    ``mode="gamma1"`` ignores the meta stage regardless of t.gamma, matching
    the simplified two-stage definition.
    """
    if mode not in ("general", "gamma1"):
        raise ValueError(f"invalid mode {mode!r}")
    if cov.sigma_A is None or cov.sigma_B is None or cov.sigma_C is None:
        raise ValueError(
            "invalid design: all three score triples must be defined to solve thresholds"
        )
    z1 = None if t.alpha == 1.0 else t.z_alpha
    z3 = None if (mode == "gamma1" or t.gamma == 1.0) else t.z_gamma
    z_beta = t.z_beta

    p0 = _joint_z(cov.sigma_A, z1, None if t.beta == 1.0 else z_beta, z3)
    if t.beta == 1.0:
        # no replication test to adjust; conserved trivially
        dt = DerivedThresholds(
            beta_star=1.0, beta_perp=1.0, p0=p0,
            diagnostics={"iterations": 0, "residual": 0.0, "mode": mode},
        )
        return dt

    z_star, it_b, res_b = _solve_middle_z(
        cov.sigma_B, z1, z3, z_beta, p0, cov.pair("d", "s") or 0.0
    )
    z_perp, it_c, res_c = _solve_middle_z(
        cov.sigma_C, z1, z3, z_beta, p0, cov.pair("c", "s") or 0.0
    )
    beta_star = cutoff_of_z(z_star)
    beta_perp = cutoff_of_z(z_perp)
    # In weak-coupling designs the replication constraint can be numerically
    # implied by the meta constraint, leaving a plateau where the solved
    # cutoff is within float resolution of beta (or of beta_star).  Every
    # point of the plateau conserves P0 to tolerance; report the one that
    # respects the proven strict ordering beta_perp < beta* < beta.
    if (cov.pair("d", "s") or 0.0) > 0.0 and beta_star >= t.beta:
        beta_star = math.nextafter(t.beta, 0.0)
    if (cov.pair("c", "s") or 0.0) > 0.0 and beta_perp >= beta_star:
        beta_perp = math.nextafter(beta_star, 0.0)
    residual = max(res_b, res_c)
    if residual > 1e-12:
        raise SolverFailure(f"solver failure: residual {residual:.3e} above 1e-12")
    if beta_star > t.beta * (1.0 + 1e-9) or beta_perp > beta_star * (1.0 + 1e-9):
        # beta_perp < beta_star < beta is a theorem for genuine designs;
        # equality can only arise from synthetic inputs with coinciding triples
        raise SolverFailure(
            f"solver failure: ordering violated "
            f"(beta={t.beta:.6e}, beta*={beta_star:.6e}, beta_perp={beta_perp:.6e})"
        )
    return DerivedThresholds(
        beta_star=beta_star,
        beta_perp=beta_perp,
        p0=p0,
        diagnostics={
            "iterations": it_b + it_c,
            "residual": residual,
            "mode": mode,
            "z_beta_star": z_star,
            "z_beta_perp": z_perp,
        },
    )


def beta_star_asymptotic(rho: float, t: Thresholds) -> float:
    """Large-z_alpha limit of the solved z bound in the gamma = 1 regime:
    sqrt(1-rho^2) z_beta + rho z_alpha (approached from above)."""
    if abs(rho) > 1.0:
        raise ValueError("invalid covariance: |rho| > 1")
    return math.sqrt((1.0 - rho) * (1.0 + rho)) * t.z_beta + rho * t.z_alpha
