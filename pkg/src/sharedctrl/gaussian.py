"""Gaussian numerical kernels.

Univariate CDF/quantile plus bivariate and trivariate orthant probabilities
P(X > a, Y > b[, Z > c]) for zero-mean, unit-variance correlated normals.
Rank-deficient correlation matrices are reduced to lower-dimensional
integrals instead of being rejected: the score triples used elsewhere in
this package are frequently singular by construction (the meta score is a
linear combination of the stage scores), so the degenerate path is a first
class citizen here, not an error.

All functions are pure; there is no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.special import ndtr, ndtri

INF = float("inf")

# PSD slack when validating correlation matrices.
EPS_PSD = 1e-9
# det(corr) at or below this routes to the rank-2 reduction; near-singular
# inputs must not hit the ill-conditioned 3-D conditional path.
EPS_SING = 1e-8
# Truncation for absolute-tolerance semi-infinite integrals.  The neglected
# normal mass beyond |z| = 8.5 is < 1e-17.
TAIL_CUTOFF = 8.5

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_QUAD_LIMIT = 200


class InvalidCovarianceError(ValueError):
    """Correlation matrix is not positive semidefinite (within tolerance)."""


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def norm_cdf(x: float) -> float:
    """Standard normal CDF. Accepts +-inf; rejects NaN."""
    if math.isnan(x):
        raise ValueError("invalid argument: NaN")
    if x == -INF:
        return 0.0
    if x == INF:
        return 1.0
    return float(ndtr(x))


def norm_quantile(p: float) -> float:
    """Inverse of norm_cdf on the open interval (0, 1)."""
    if math.isnan(p) or not 0.0 < p < 1.0:
        raise ValueError(f"domain error: quantile needs p in (0,1), got {p!r}")
    return float(ndtri(p))


@dataclass(frozen=True)
class CorrMatrix3:
    """Correlation matrix of three unit-variance scores.

    ``labels`` names the scores in coordinate order, e.g. ("d", "s", "m").
    """

    rho_12: float
    rho_13: float
    rho_23: float
    labels: tuple[str, str, str] = ("z1", "z2", "z3")

    def det(self) -> float:
        r12, r13, r23 = self.rho_12, self.rho_13, self.rho_23
        return 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23

    def rho(self, i: int, j: int) -> float:
        if i == j:
            return 1.0
        pair = (min(i, j), max(i, j))
        return {(0, 1): self.rho_12, (0, 2): self.rho_13, (1, 2): self.rho_23}[pair]

    def permuted(self, order: tuple[int, int, int]) -> "CorrMatrix3":
        i, j, k = order
        return CorrMatrix3(
            rho_12=self.rho(i, j),
            rho_13=self.rho(i, k),
            rho_23=self.rho(j, k),
            labels=(self.labels[i], self.labels[j], self.labels[k]),
        )

    def validate(self) -> None:
        for r in (self.rho_12, self.rho_13, self.rho_23):
            if math.isnan(r) or abs(r) > 1.0 + 1e-12:
                raise InvalidCovarianceError(f"invalid covariance: |rho| > 1 ({r!r})")
            # 2x2 principal minors are 1 - rho^2 >= -EPS_PSD, implied by the above.
        if self.det() < -EPS_PSD:
            raise InvalidCovarianceError(
                f"invalid covariance: det = {self.det():.3e} < -{EPS_PSD}"
            )

    def is_singular(self, eps: float = EPS_SING) -> bool:
        return self.det() <= eps


@dataclass(frozen=True)
class Orthant3Query:
    """Lower bounds (may be -inf, which marginalises the coordinate) plus
    the correlation structure of the three scores."""

    a: float
    b: float
    c: float
    corr: CorrMatrix3


def _clip_rho(r: float) -> float:
    return max(-1.0, min(1.0, r))


# Gauss-Legendre abscissae/weights used by the bivariate kernel
# (Drezner-Wesolowsky / Genz hybrid; max absolute error ~5e-16).
_GL_X = (
    (-0.9324695142031522, -0.6612093864662647, -0.2386191860831970),
    (-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
     -0.5873179542866171, -0.3678314989981802, -0.1252334085114692),
    (-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
     -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
     -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
     -0.0765265211334973),
)
_GL_W = (
    (0.1713244923791705, 0.3607615730481384, 0.4679139345726904),
    (0.0471753363865118, 0.1069393259953183, 0.1600783285433464,
     0.2031674267230659, 0.2334925365383547, 0.2491470458134029),
    (0.0176140071391521, 0.0406014298003869, 0.0626720483341091,
     0.0832767415767048, 0.1019301198172404, 0.1181945319615184,
     0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
     0.1527533871307259),
)


def orthant2(a: float, b: float, rho: float) -> float:
    """P(X > a, Y > b) for standard bivariate normal with correlation rho.

    Absolute error <= ~5e-16.  |rho| = 1 is handled as a hard degeneracy.
    """
    if math.isnan(a) or math.isnan(b) or math.isnan(rho):
        raise ValueError("invalid argument: NaN")
    if abs(rho) > 1.0 + 1e-12:
        raise InvalidCovarianceError(f"invalid covariance: |rho| > 1 ({rho!r})")
    rho = _clip_rho(rho)
    if a == INF or b == INF:
        return 0.0
    if a == -INF and b == -INF:
        return 1.0
    if a == -INF:
        return norm_cdf(-b)
    if b == -INF:
        return norm_cdf(-a)
    if rho == 1.0:
        return norm_cdf(-max(a, b))
    if rho == -1.0:
        # Y = -X: need a < X < -b
        return max(0.0, norm_cdf(-b) - norm_cdf(a))
    return _bvn_upper(a, b, rho)


def _bvn_upper(h: float, k: float, r: float) -> float:
    """Genz's BVND: P(X > h, Y > k), |r| < 1, finite bounds."""
    if abs(r) < 0.3:
        ng = 0
    elif abs(r) < 0.75:
        ng = 1
    else:
        ng = 2
    xs, ws = _GL_X[ng], _GL_W[ng]
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        for x, w in zip(xs, ws):
            sn = math.sin(asr * (x + 1.0) / 2.0)
            bvn += w * math.exp((sn * hk - hs) / (1.0 - sn * sn))
            sn = math.sin(asr * (-x + 1.0) / 2.0)
            bvn += w * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / (4.0 * math.pi) + norm_cdf(-h) * norm_cdf(-k)
    else:
        if r < 0.0:
            k = -k
            hk = -hk
        a_s = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a_s)
        bs = (h - k) ** 2
        cc = (4.0 - hk) / 8.0
        dd = (12.0 - hk) / 16.0
        asr = -(bs / a_s + hk) / 2.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (
                1.0 - cc * (bs - a_s) * (1.0 - dd * bs / 5.0) / 3.0
                + cc * dd * a_s * a_s / 5.0
            )
        if hk > -100.0:
            b = math.sqrt(bs)
            bvn -= (
                math.exp(-hk / 2.0) * _SQRT_2PI * norm_cdf(-b / a) * b
                * (1.0 - cc * bs * (1.0 - dd * bs / 5.0) / 3.0)
            )
        a /= 2.0
        for x, w in zip(xs, ws):
            for sgn in (1.0, -1.0):
                x_s = (a * (sgn * x + 1.0)) ** 2
                rs = math.sqrt(1.0 - x_s)
                asr = -(bs / x_s + hk) / 2.0
                if asr > -100.0:
                    bvn += (
                        a * w * math.exp(asr)
                        * (math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                           - (1.0 + cc * x_s * (1.0 + dd * x_s)))
                    )
        bvn = -bvn / (2.0 * math.pi)
        if r > 0.0:
            bvn += norm_cdf(-max(h, k))
        else:
            # k was negated above, so this is Phi(-h) - Phi(k_original)
            bvn = -bvn + max(0.0, norm_cdf(-h) - norm_cdf(-k))
    return min(1.0, max(0.0, bvn))


def orthant2_tail(a: float, b: float, rho: float, epsrel: float = 1e-12) -> float:
    """P(X > a, Y > b) with *relative* accuracy, valid deep in the joint tail.

    The closed-form kernel above carries ~5e-16 absolute error, which is
    useless when the answer itself is ~1e-18 (extreme thresholds in the
    gamma = 1 regime).  Here the probability is computed as
    integral phi(t) Phi((rho t - b)/sqrt(1-rho^2)) dt over t > a, with
    pure-relative quadrature; both factors are relatively accurate in the
    tail.
    """
    if abs(rho) > 1.0 + 1e-12:
        raise InvalidCovarianceError(f"invalid covariance: |rho| > 1 ({rho!r})")
    rho = _clip_rho(rho)
    if a == INF or b == INF:
        return 0.0
    if rho == 0.0:
        return norm_cdf(-a) * norm_cdf(-b)
    if abs(rho) == 1.0 or a == -INF or b == -INF:
        return orthant2(a, b, rho)
    if b > a:  # integrate over the coordinate with the larger bound
        a, b = b, a
    s = math.sqrt((1.0 - rho) * (1.0 + rho))

    def integrand(t: float) -> float:
        return norm_pdf(t) * float(ndtr((rho * t - b) / s))

    hi = max(a + 25.0, 9.0)
    val, _ = quad(integrand, a, hi, epsabs=0.0, epsrel=epsrel, limit=_QUAD_LIMIT)
    return min(1.0, max(0.0, val))


def orthant3(
    q: Orthant3Query,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
) -> float:
    """P(X > a, Y > b, Z > c) for the correlated triple in ``q``.

    Nonsingular matrices use adaptive quadrature over the coordinate with the
    largest lower bound, with the conditional bivariate orthant in closed
    form.  Singular matrices (det <= EPS_SING) are reduced via the linear
    dependence z3 = w1 z1 + w2 z2 to a bivariate integral over the polygonal
    region {z1 > a, z2 > b, w1 z1 + w2 z2 > c}.
    """
    q.corr.validate()
    bounds = [q.a, q.b, q.c]
    for x in bounds:
        if math.isnan(x):
            raise ValueError("invalid argument: NaN bound")
    if any(x == INF for x in bounds):
        return 0.0

    finite = [i for i in range(3) if bounds[i] != -INF]
    if len(finite) == 0:
        return 1.0
    if len(finite) == 1:
        return norm_cdf(-bounds[finite[0]])
    if len(finite) == 2:
        i, j = finite
        return orthant2(bounds[i], bounds[j], q.corr.rho(i, j))

    corr = q.corr
    if not corr.is_singular():
        return _orthant3_full_rank(bounds, corr, abs_tol, rel_tol)
    return _orthant3_rank2(bounds, corr, abs_tol, rel_tol)


def _quad_tail(integrand, lo: float, abs_tol: float, rel_tol: float) -> float:
    lo = max(lo, -TAIL_CUTOFF)
    if lo >= TAIL_CUTOFF:
        return 0.0
    val, _ = quad(
        integrand, lo, TAIL_CUTOFF, epsabs=abs_tol, epsrel=rel_tol, limit=_QUAD_LIMIT
    )
    return min(1.0, max(0.0, val))


def _orthant3_full_rank(bounds, corr, abs_tol, rel_tol) -> float:
    # Outer integral over the coordinate with the largest lower bound: the
    # integrand then decays fastest, which keeps the panel count low.
    order = tuple(sorted(range(3), key=lambda i: -bounds[i]))
    p = corr.permuted(order)
    a, b, c = (bounds[i] for i in order)
    r12, r13, r23 = p.rho_12, p.rho_13, p.rho_23
    s2 = math.sqrt((1.0 - r12) * (1.0 + r12))
    s3 = math.sqrt((1.0 - r13) * (1.0 + r13))
    rc = _clip_rho((r23 - r12 * r13) / (s2 * s3))

    def integrand(t: float) -> float:
        return norm_pdf(t) * _bvn_inner((b - r12 * t) / s2, (c - r13 * t) / s3, rc)

    return _quad_tail(integrand, a, abs_tol, rel_tol)


def _bvn_inner(u: float, v: float, r: float) -> float:
    if r == 1.0:
        return norm_cdf(-max(u, v))
    if r == -1.0:
        return max(0.0, norm_cdf(-v) - norm_cdf(u))
    return _bvn_upper(u, v, r)


def _orthant3_rank2(bounds, corr, abs_tol, rel_tol) -> float:
    a, b, c = bounds
    r12, r13, r23 = corr.rho_12, corr.rho_13, corr.rho_23

    if abs(r12) >= 1.0 - 1e-12:
        # z2 = +-z1; fold the second constraint into the first and recurse on
        # the remaining pair (z1, z3).
        if r12 > 0.0:
            return orthant2(max(a, b), c, r13)
        # z2 = -z1: a < z1 < -b, z3 > c
        if -b <= a:
            return 0.0
        return max(0.0, orthant2(a, c, r13) - orthant2(-b, c, r13))

    denom = (1.0 - r12) * (1.0 + r12)
    w1 = (r13 - r12 * r23) / denom
    w2 = (r23 - r12 * r13) / denom
    s = math.sqrt(denom)

    # Keep z3's constraint as the half-plane; integrate over whichever of
    # z1/z2 has the larger bound.
    if b > a:
        a, b = b, a
        w1, w2 = w2, w1

    if abs(w2) < 1e-14:
        # z3 = w1 z1 (+0 z2): the half-plane constrains z1 alone.
        if abs(w1) < 1e-14:
            return orthant2(a, b, r12) if c < 0.0 else 0.0
        if w1 > 0.0:
            return orthant2(max(a, c / w1), b, r12)
        ub = c / w1  # z1 < ub
        if ub <= a:
            return 0.0
        return max(0.0, orthant2(a, b, r12) - orthant2(ub, b, r12))

    if w2 > 0.0:

        def integrand(t: float) -> float:
            lb = max(b, (c - w1 * t) / w2)
            return norm_pdf(t) * float(ndtr(-(lb - r12 * t) / s))

    else:

        def integrand(t: float) -> float:
            ub = (c - w1 * t) / w2  # z2 < ub
            if ub <= b:
                return 0.0
            return norm_pdf(t) * max(
                0.0, float(ndtr((ub - r12 * t) / s) - ndtr((b - r12 * t) / s))
            )

    return _quad_tail(integrand, a, abs_tol, rel_tol)
