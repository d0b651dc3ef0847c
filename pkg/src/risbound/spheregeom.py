"""Spherical cap areas on the unit n-sphere and the cone-angle solver.

The central object is the normalized cap ratio

    ratio(alpha, n) = Lambda(alpha, n) / Lambda(pi, n),

the fraction of the (n-1)-sphere's surface cut out by a cone of half-angle
alpha.  Three evaluation routes are provided; the regularized incomplete
beta route is the default because the other two work in linear floats and
die long before the ratios of interest (2**-96 and below) are reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _sp

from .errors import DomainError, RatioUnderflowError, UnsatisfiableRateError
from .specfun import log_gamma

LN2 = math.log(2.0)

# Methods accepted by log_cap_ratio.
CAP_RATIO_METHODS = ("incomplete_beta", "recursion", "closed_form")

# Smallest linear ratio the incomplete-beta route resolves before underflow.
_MIN_LOG_RATIO = math.log(5e-324) + 40.0

BISECTION_RESIDUAL_TOL = 1e-12
BISECTION_BRACKET_TOL = 1e-14


@dataclass(frozen=True)
class ConeAngle:
    """Solution of the equal-partition equation for the cone angle.

    ``alpha1`` makes 2**(n*rate) caps of that angle tile the full sphere
    area; ``residual`` is the achieved error of the defining equation in
    log-ratio terms.
    """

    alpha1: float
    n: int
    rate: float
    residual: float


def _check_n(n: int) -> int:
    if n != int(n) or n < 2:
        raise DomainError(f"blocklength must be an integer >= 2, got {n}")
    return int(n)


def log_full_sphere_area(n: int) -> float:
    """ln of the surface area of the unit sphere in n dimensions."""
    n = _check_n(n)
    return math.log(n) + (n / 2.0) * math.log(math.pi) - log_gamma((n + 2) / 2.0)


def _sine_power_core(alpha: float, n: int) -> tuple[float, float]:
    """The running integral of sin**(n-2) from 0 to alpha, by upward recursion.

    Linear-domain evaluation; cancellation-limited for small alpha and
    underflow-limited for large n.  Returns (value, largest intermediate
    magnitude) so callers can detect loss of significance.
    """
    if n == 2:
        return alpha, alpha
    if n == 3:
        # the definite integral forces the +1 constant; without it the
        # full-sphere check Lambda(pi,3) = 4*pi fails by a factor of two
        return 1.0 - math.cos(alpha), 1.0
    s, c = math.sin(alpha), math.cos(alpha)
    val = alpha if n % 2 == 0 else 1.0 - c
    maxmag = abs(val)
    m = 4 if n % 2 == 0 else 5
    while m <= n:
        term = -(s ** (m - 3)) * c / (m - 2)
        val = term + (m - 3) / (m - 2) * val
        maxmag = max(maxmag, abs(term), abs(val))
        m += 2
    return val, maxmag


def _sine_power_closed_form(alpha: float, n: int) -> tuple[float, float]:
    """Same integral via the unrolled finite sum (one pass, no recursion).

    Mathematically identical to the recursion; numerically it exposes the
    alternating-sum cancellation at small alpha, which is why it is not the
    default route.  Returns (value, largest term magnitude).
    """
    if n == 2:
        return alpha, alpha
    if n == 3:
        return 1.0 - math.cos(alpha), 1.0
    s, c = math.sin(alpha), math.cos(alpha)
    depth = (n - 2) // 2
    total = 0.0
    prefix = 1.0
    maxmag = 0.0
    for j in range(depth):
        term = prefix * (s ** (n - 3 - 2 * j)) * c / (n - 2 - 2 * j)
        total -= term
        maxmag = max(maxmag, abs(term))
        prefix *= (n - 3.0 - 2 * j) / (n - 2.0 - 2 * j)
    # prefix has become the double-factorial ratio of the base term
    base = alpha if n % 2 == 0 else 1.0 - c
    maxmag = max(maxmag, abs(prefix * base))
    return total + prefix * base, maxmag


def _log_ratio_incomplete_beta(alpha: float, n: int) -> float:
    # sin^2(alpha) is quadratically flat at pi/2, so in a band around the
    # equator the argument is parametrized by cos^2(alpha) instead (linear in
    # the distance to pi/2) through the complemented incomplete beta, which
    # evaluates I_{1-u} without forming 1-u.
    if alpha >= math.pi:
        return 0.0
    a, b = (n - 1) / 2.0, 0.5
    u = math.cos(alpha) ** 2
    if alpha <= 0.5 * math.pi:
        if u < 0.05:
            return math.log(0.5) + math.log(_sp.betaincc(b, a, u))
        ib = _sp.betainc(a, b, math.sin(alpha) ** 2)
        if ib == 0.0:
            raise RatioUnderflowError(
                f"cap ratio underflowed at alpha={alpha}, n={n} (incomplete beta)"
            )
        return math.log(0.5) + math.log(ib)
    if u < 0.05:
        return math.log1p(-0.5 * _sp.betaincc(b, a, u))
    return math.log1p(-0.5 * _sp.betainc(a, b, math.sin(math.pi - alpha) ** 2))


def log_cap_ratio(alpha: float, n: int, method: str = "incomplete_beta") -> float:
    """ln( Lambda(alpha, n) / Lambda(pi, n) ), in (-inf, 0].

    ``method`` selects the evaluation route: "incomplete_beta" (default,
    stable at large n / small alpha), "recursion" (upward two-step
    recurrence) or "closed_form" (unrolled finite sum).
    """
    n = _check_n(n)
    if not (0.0 < alpha <= math.pi):
        raise DomainError(f"alpha must lie in (0, pi], got {alpha}")
    if method == "incomplete_beta":
        return _log_ratio_incomplete_beta(alpha, n)
    if method == "recursion":
        core, maxmag = _sine_power_core(alpha, n)
        full, _ = _sine_power_core(math.pi, n)
    elif method == "closed_form":
        core, maxmag = _sine_power_closed_form(alpha, n)
        full, _ = _sine_power_closed_form(math.pi, n)
    else:
        raise DomainError(f"unknown cap-ratio method {method!r}")
    # fewer than ~3 significant digits left after cancellation counts as lost
    if core <= 1e3 * 2.3e-16 * maxmag or not math.isfinite(core):
        raise RatioUnderflowError(
            f"linear-domain cap evaluation lost all significance at "
            f"alpha={alpha}, n={n} (method={method})"
        )
    return math.log(core) - math.log(full)


def log_cap_area(alpha: float, n: int, method: str = "incomplete_beta") -> float:
    """ln Lambda(alpha, n): absolute cap area on the unit n-sphere."""
    return log_cap_ratio(alpha, n, method) + log_full_sphere_area(n)


def solve_alpha1(n: int, rate: float) -> ConeAngle:
    """Solve  2**(n*rate) * Lambda(alpha1, n) = Lambda(pi, n)  for alpha1.

    Bisection on the strictly increasing map alpha -> log cap ratio; the
    target is -n*rate*ln2.  Stops when the bracket is below 1e-14 rad or the
    log-ratio residual is below 1e-12, whichever happens first, then polishes
    by picking the bracket endpoint with the smaller residual.
    """
    n = _check_n(n)
    if rate < 0:
        raise DomainError(f"rate must be >= 0, got {rate}")
    target = -n * rate * LN2
    if rate == 0.0:
        return ConeAngle(alpha1=math.pi, n=n, rate=0.0, residual=0.0)
    if target < _MIN_LOG_RATIO:
        raise UnsatisfiableRateError(
            f"cap ratio 2**(-{n}*{rate}) = exp({target:.1f}) underflows the "
            f"incomplete-beta evaluation (limit ~ exp({_MIN_LOG_RATIO:.0f}))",
            n=n,
            rate=rate,
        )

    lo, hi = 5e-324, math.pi
    f_hi = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = log_cap_ratio(mid, n)
        if f_mid < target:
            lo = mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < BISECTION_BRACKET_TOL and abs(f_hi - target) < BISECTION_RESIDUAL_TOL:
            break

    candidates = [lo, 0.5 * (lo + hi), hi]
    best, best_res = hi, math.inf
    for cand in candidates:
        try:
            res = log_cap_ratio(cand, n) - target
        except RatioUnderflowError:
            continue
        if abs(res) < abs(best_res):
            best, best_res = cand, res
    return ConeAngle(alpha1=best, n=n, rate=rate, residual=best_res)
