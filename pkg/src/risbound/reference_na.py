"""Normal-approximation reference curve for sweep comparisons.

This baseline is NOT part of the bound derivation: it is the standard
finite-blocklength Gaussian approximation for the real AWGN channel,
conditioned on the fading amplitude and averaged over its Gamma fit.  Output
metadata marks it as an external reference so it is never mistaken for one
of the validated bound formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import RisChannelSpec, analytic_moments, gamma_fit
from .errors import DomainError
from .specfun import log_gaussian_q

LN2 = math.log(2.0)

AVERAGING_MODES = ("conditional_quadrature", "conditional_mc")


@dataclass(frozen=True)
class NaQuery:
    """Inputs for one reference-curve evaluation (snr in linear units)."""

    n: int
    rate: float
    snr: float
    averaging: str = "conditional_quadrature"
    mc_trials: int = 100_000
    mc_seed: int = 20240501

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if self.rate <= 0 or self.snr <= 0:
            raise DomainError("rate and snr must be positive")
        if self.averaging not in AVERAGING_MODES:
            raise DomainError(f"unknown averaging mode {self.averaging!r}")


def conditional_na_log(amps, n: int, rate: float, snr: float):
    """log of the conditional normal-approximation error probability.

    Real-AWGN capacity C = 0.5 ln(1+g) and dispersion V = g(g+2)/(2(g+1)^2)
    in nats, with the half-log-n correction:
        eps(A) = Q( (n C - n R ln2 + 0.5 ln n) / sqrt(n V) ).
    """
    amps = np.asarray(amps, dtype=float)
    g = amps * amps * snr
    c = 0.5 * np.log1p(g)
    v = g * (g + 2.0) / (2.0 * (g + 1.0) ** 2)
    num = n * c - n * rate * LN2 + 0.5 * math.log(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(v > 0, num / np.sqrt(n * v), np.inf * np.sign(num))
    # g -> 0: zero dispersion; the code is above capacity and fails
    arg = np.where(g <= 0, -np.inf, arg)
    return log_gaussian_q(np.clip(arg, -1e12, 1e12))


def na_error(query: NaQuery, spec: RisChannelSpec) -> float:
    """Reference error probability, averaged over the fitted amplitude
    density.

    Both averaging modes integrate the same conditional over the same Gamma
    fit (the reference curve is defined over the fit, like the bound's
    expectation), so quadrature and Monte Carlo agree within sampling error.
    """
    m = analytic_moments(spec)
    fit = gamma_fit(m)
    if query.averaging == "conditional_quadrature":
        from .bound import log_expect_over_fit

        log_val = log_expect_over_fit(
            fit, lambda amps: conditional_na_log(amps, query.n, query.rate, query.snr)
        )
        return math.exp(min(0.0, float(log_val)))
    return na_error_mc_with_se(query, spec)[0]


def na_error_mc_with_se(query: NaQuery, spec: RisChannelSpec) -> tuple[float, float]:
    """Monte Carlo averaged reference value together with its standard error."""
    from .channel import sample_fit

    fit = gamma_fit(analytic_moments(spec))
    samples = sample_fit(fit, query.mc_trials, query.mc_seed)
    vals = np.exp(conditional_na_log(samples, query.n, query.rate, query.snr))
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return mean, se
