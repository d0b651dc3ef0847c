"""Log-domain special functions shared by every other module.

Everything that can overflow a float64 at blocklength 128 (Gamma ratios,
exp(-n * ...), 2**(n/2) products) is carried as a :class:`SignedLogValue`
and converted to a linear float only at the final output boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

KUMMER_MAX_TERMS = 20_000
KUMMER_RELATIVE_TOL = 1e-16


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as (sign, natural log of absolute value).

    Multiplication and division compose exactly (signs multiply, logs add);
    addition goes through log-sum-exp with sign handling so that x + (-x)
    collapses to the exact zero element.
    """

    sign: int
    log_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign}")

    @staticmethod
    def zero() -> "SignedLogValue":
        return SignedLogValue(0, -math.inf)

    @staticmethod
    def one() -> "SignedLogValue":
        return SignedLogValue(1, 0.0)

    @staticmethod
    def from_float(x: float) -> "SignedLogValue":
        if x == 0.0:
            return SignedLogValue.zero()
        if not math.isfinite(x):
            raise DomainError(f"cannot represent non-finite value {x}")
        return SignedLogValue(1 if x > 0 else -1, math.log(abs(x)))

    @staticmethod
    def from_log(log_abs: float, sign: int = 1) -> "SignedLogValue":
        if sign == 0 or log_abs == -math.inf:
            return SignedLogValue.zero()
        return SignedLogValue(sign, float(log_abs))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by signed-log zero")
        if self.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_abs)

    def __add__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        if self.sign == other.sign:
            return SignedLogValue(self.sign, np.logaddexp(self.log_abs, other.log_abs))
        # opposite signs: subtract magnitudes
        if self.log_abs == other.log_abs:
            return SignedLogValue.zero()
        big, small = (self, other) if self.log_abs > other.log_abs else (other, self)
        log_abs = big.log_abs + math.log1p(-math.exp(small.log_abs - big.log_abs))
        return SignedLogValue(big.sign, log_abs)

    def __sub__(self, other: "SignedLogValue") -> "SignedLogValue":
        return self + (-other)

    def scale_log(self, delta: float) -> "SignedLogValue":
        """Multiply by exp(delta) without leaving the log domain."""
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign, self.log_abs + delta)

    def abs_log(self) -> float:
        return self.log_abs if self.sign != 0 else -math.inf


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not (isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x)):
        raise DomainError(f"log_gamma requires a finite argument, got {x!r}")
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(_sp.gammaln(x))


def log_double_factorial(k: int) -> float:
    """ln(k!!) with the convention 0!! = 1!! = 1.

    Even k: k!! = 2**(k/2) * (k/2)!; odd k = 2m+1: k!! = (2m+1)! / (2**m m!).
    Both reduce to gammaln calls, exact to rounding for any k that fits an int.
    """
    if k != int(k) or k < 0:
        raise DomainError(f"double factorial requires a non-negative integer, got {k}")
    k = int(k)
    if k in (0, 1):
        return 0.0
    if k % 2 == 0:
        m = k // 2
        return m * math.log(2.0) + float(_sp.gammaln(m + 1))
    m = (k - 1) // 2
    return float(_sp.gammaln(k + 1)) - m * math.log(2.0) - float(_sp.gammaln(m + 1))


def gaussian_q(x: float) -> float:
    """Q(x) = 0.5 erfc(x / sqrt(2)): upper tail of the standard normal."""
    if not math.isfinite(x):
        raise DomainError(f"gaussian_q requires a finite argument, got {x!r}")
    return float(0.5 * _sp.erfc(x / math.sqrt(2.0)))


def log_gaussian_q(x) -> float:
    """ln Q(x), stable far into the tail (x up to 40 and beyond)."""
    return _sp.log_ndtr(-np.asarray(x, dtype=float))


def kummer_1f1(a: float, b: float, z: float, max_terms: int = KUMMER_MAX_TERMS) -> SignedLogValue:
    """Confluent hypergeometric 1F1(a; b; z) by forward Taylor series.

    The series is summed with signed log-domain accumulation, so very large
    partial sums (a up to a few hundred) never overflow. Terms are generated
    by the ratio recurrence t_{k+1}/t_k = (a+k) z / ((b+k)(k+1)) and the sum
    stops once |term| < 1e-16 |partial|.

    Only z >= 0 is supported; every use in the bound has z = 1/(4 b^2 X) >= 0.
    """
    if z < 0:
        raise DomainError(f"kummer_1f1 supports z >= 0 only, got z={z}")
    if b <= 0 and b == int(b):
        raise DomainError(f"kummer_1f1 undefined for non-positive integer b={b}")
    if z == 0.0:
        return SignedLogValue.one()

    total = SignedLogValue.one()
    term = SignedLogValue.one()
    log_z = math.log(z)
    for k in range(max_terms):
        num = a + k
        den = (b + k) * (k + 1)
        if num == 0.0:
            break  # terminating (polynomial) series
        ratio = SignedLogValue.from_log(
            math.log(abs(num)) - math.log(abs(den)) + log_z,
            (1 if num > 0 else -1) * (1 if den > 0 else -1),
        )
        term = term * ratio
        total = total + term
        if term.abs_log() < total.abs_log() + math.log(KUMMER_RELATIVE_TOL):
            return total
    raise ConvergenceError(
        f"1F1({a}, {b}, {z}) did not converge within {max_terms} terms",
        partial=total,
        truncation_bound=term.abs_log(),
    )


def laguerre_half(x: float) -> float:
    """The Laguerre function of order 1/2 at x <= 0.

    Evaluated through modified Bessel functions of half the argument:
    L_{1/2}(x) = exp(x/2) [ (1 - x) I0(-x/2) - x I1(-x/2) ].
    Exponentially-scaled Bessel routines keep this stable for large -x.
    """
    if x > 0:
        raise DomainError(f"laguerre_half is only defined for x <= 0 here, got {x}")
    h = -x / 2.0
    # i0e(h) = exp(-h) I0(h); the exp(x/2) prefactor is exactly exp(-h)
    return float((1.0 - x) * _sp.i0e(h) - x * _sp.i1e(h))
