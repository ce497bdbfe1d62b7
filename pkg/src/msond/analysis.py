"""Closed-form machinery: metric CDFs, bounds, scaling evaluators, fits.

With unit-variance channels every metric term is a unit-mean exponential, so
the stage-1 metric and the TIL are Gamma distributed with integer shapes
a1 = 2SK - S - 1 and a2 = 3SK - S - 1 and unit scale. The chi-square-units
variant (terms of mean 2) is exposed separately for cross-checking.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .selection import RelayAssignment

MODE_EXP = {"alternate": "a2", "non-alternate": "a1"}

#: Counts above this are reported as saturated rather than exact.
SATURATION_LIMIT = 10 ** 18


@dataclass(frozen=True)
class ShapeParams:
    """Gamma shape parameters of the two scheduling metrics."""

    a1: int
    a2: int


def shape_params(K: int, S: int) -> ShapeParams:
    """Interference-term counts for the stage-1 metric and the TIL."""
    if K < 1 or S < 1:
        raise InvalidArgumentError(f"K and S must be >= 1, got K={K}, S={S}")
    return ShapeParams(a1=2 * S * K - S - 1, a2=3 * S * K - S - 1)


def _lower_gamma_regularized(a: float, x: float, tol: float = 1e-12) -> float:
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).

    Power series for x < a + 1, continued fraction on the upper tail
    otherwise; both share the log-space prefactor x^a e^-x / Gamma(a).
    """
    if x <= 0.0:
        return 0.0
    log_pref = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # gamma(a, x) = x^a e^-x * sum_n x^n / (a (a+1) ... (a+n))
        term = 1.0 / a
        total = term
        n = a
        for _ in range(10_000):
            n += 1.0
            term *= x / n
            total += term
            if abs(term) < abs(total) * tol:
                break
        return min(1.0, math.exp(log_pref) * total)
    # Lentz's method for the upper-tail continued fraction
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    frac = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < tol:
            break
    return max(0.0, 1.0 - math.exp(log_pref) * frac)


def cdf_metric(l: float, a: int) -> float:
    """CDF of a sum of `a` unit-mean exponential interference terms at l."""
    if l < 0:
        raise InvalidArgumentError(f"metric value must be >= 0, got {l}")
    if a < 1:
        raise InvalidArgumentError(f"shape must be >= 1, got {a}")
    return _lower_gamma_regularized(float(a), float(l))


def cdf_metric_chi2(l: float, a: int) -> float:
    """CDF variant for mean-2 terms (chi-square with 2a degrees of freedom)."""
    return cdf_metric(l / 2.0, a)


@dataclass(frozen=True)
class CdfPowerBound:
    """Power-law lower bound C * l^a on the metric CDF over 0 < l <= 2.

    `reference_coefficient` is the variant with 2^{+a} numerator and Gamma(a)
    denominator: it exceeds any valid CDF bound at the domain edge for small
    shapes and is reported only for cross-checking, never used as a bound.
    """

    coefficient: float
    bound: float
    reference_coefficient: float
    reference_bound: float


def cdf_power_lower_bound(l: float, a: int) -> CdfPowerBound:
    """Validated lower bound C * l^a <= cdf_metric(l, a) for 0 < l <= 2.

    C = e^-1 * 2^-a / Gamma(a + 1), from gamma(a, x) >= a^-1 x^a e^-x with
    x = l/2 <= 1 and the CDF's monotonicity in the argument convention.
    """
    if not 0 < l <= 2:
        raise InvalidArgumentError(f"bound valid only on (0, 2], got l={l}")
    if a < 1:
        raise InvalidArgumentError(f"shape must be >= 1, got {a}")
    coeff = math.exp(-1.0) * 2.0 ** (-a) / math.gamma(a + 1)
    ref = math.exp(-1.0) * 2.0 ** a / math.gamma(a)
    return CdfPowerBound(
        coefficient=coeff,
        bound=coeff * l ** a,
        reference_coefficient=ref,
        reference_bound=ref * l ** a,
    )


def inverse_cdf(p: float, a: int) -> float:
    """Metric value l with cdf_metric(l, a) = p, by bracketed bisection."""
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError(f"probability must lie in (0, 1), got {p}")
    if a < 1:
        raise InvalidArgumentError(f"shape must be >= 1, got {a}")
    hi = 1.0
    for _ in range(200):
        if cdf_metric(hi, a) >= p:
            break
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf_metric(mid, a) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def prob_exactly_sk(N: int, K: int, S: int, eps: float) -> float:
    """Probability that exactly S*K of N candidate TILs fall below eps."""
    sk = S * K
    if N < sk:
        raise InvalidArgumentError(f"N={N} must be >= S*K={sk}")
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    f = cdf_metric(eps, shape_params(K, S).a2)
    if f <= 0.0:
        return 0.0
    if f >= 1.0:
        return 1.0 if N == sk else 0.0
    log_choose = (
        math.lgamma(N + 1) - math.lgamma(sk + 1) - math.lgamma(N - sk + 1)
    )
    return math.exp(log_choose + sk * math.log(f) + (N - sk) * math.log1p(-f))


def til_decay_lower_bound(N: int, K: int, S: int) -> float:
    """Explicit lower bound on E[1 / largest-selected-TIL]; grows as N^(1/a2).

    Product of the power-law inverse of the CDF bound at the maximizing
    threshold and the (SK)^-SK e^-SK constant chain.
    """
    sk = S * K
    if N < sk:
        raise InvalidArgumentError(f"N={N} must be >= S*K={sk}")
    a2 = shape_params(K, S).a2
    coeff = math.exp(-1.0) * 2.0 ** (-a2) / math.gamma(a2 + 1)
    return (coeff * N / sk) ** (1.0 / a2) * sk ** (-sk) * math.exp(-sk)


@dataclass(frozen=True)
class RelayRequirement:
    """Relay-count evaluation of the scaling law, with overflow flag."""

    count: int
    saturated: bool


def required_relays(snr: float, K: int, S: int, mode: str = "alternate") -> RelayRequirement:
    """Relays needed at the given linear snr per the scaling-law exponent.

    ceil(snr^(3SK-S-1)) with alternate relaying, ceil(snr^(2SK-S-1))
    without; counts beyond the saturation limit are flagged instead of
    reported exactly.
    """
    if not snr > 0:
        raise InvalidArgumentError(f"snr must be positive, got {snr}")
    if mode not in MODE_EXP:
        raise InvalidArgumentError(f"mode must be one of {sorted(MODE_EXP)}, got {mode!r}")
    shapes = shape_params(K, S)
    a = getattr(shapes, MODE_EXP[mode])
    if snr > 1.0 and a * math.log10(snr) > math.log10(SATURATION_LIMIT):
        return RelayRequirement(count=SATURATION_LIMIT, saturated=True)
    value = snr ** a
    return RelayRequirement(count=max(1, math.ceil(value * (1.0 - 1e-13))), saturated=False)


def til_order_statistic(assignment: RelayAssignment, til_table: np.ndarray) -> float:
    """Largest TIL among the second set's selected relays (the last pick)."""
    if assignment.pi2 is None:
        raise InvalidArgumentError("assignment has no second relay set")
    kk, ss = assignment.pi2.shape
    values = [til_table[assignment.pi2[k, s], k, s] for k in range(kk) for s in range(ss)]
    return float(max(values))


@dataclass(frozen=True)
class DecayFit:
    """Log-log regression of a TIL order statistic against N."""

    slope: float
    intercept: float
    r2: float


def fit_decay(points) -> DecayFit:
    """Least-squares slope of log(mean TIL) versus log(N)."""
    points = list(points)
    if len(points) < 4:
        raise InvalidArgumentError(f"need at least 4 points, got {len(points)}")
    ns = np.array([float(p[0]) for p in points])
    ys = np.array([float(p[1]) for p in points])
    if len(set(ns.tolist())) != len(ns):
        raise InvalidArgumentError("N values must be distinct")
    if np.any(ns <= 0) or np.any(ys <= 0):
        raise InvalidArgumentError("points must be positive for a log-log fit")
    x = np.log(ns)
    y = np.log(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return DecayFit(slope=float(slope), intercept=float(intercept), r2=max(0.0, min(1.0, r2)))


def estimate_dof(curve) -> float:
    """Empirical pre-log: slope of mean sum-rate against log2(snr).

    Fitted over the top decade of the snr grid, which must span at least
    20 dB overall.
    """
    pts = sorted((float(s), float(r)) for s, r in curve)
    if len(pts) < 2:
        raise InvalidArgumentError("need at least 2 points")
    snrs = np.array([p[0] for p in pts])
    rates = np.array([p[1] for p in pts])
    if np.any(snrs <= 0):
        raise InvalidArgumentError("snr values must be positive")
    if snrs[-1] / snrs[0] < 100.0 * (1.0 - 1e-9):
        raise InvalidArgumentError("snr grid must span at least 20 dB")
    top = snrs >= snrs[-1] / 10.0 * (1.0 - 1e-9)
    if int(top.sum()) < 2:
        raise InvalidArgumentError("need at least 2 points in the top decade")
    slope, _ = np.polyfit(np.log2(snrs[top]), rates[top], 1)
    return float(slope)
