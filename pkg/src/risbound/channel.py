"""Cascaded two-hop Rician channel behind a reflecting surface.

Provides the link budget, the analytic mean/variance of the effective
cascade amplitude A (the phase-aligned sum of per-element envelope
products), the moment-matched Gamma density used for expectations, and a
deterministic Monte Carlo sampler of A.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np
from scipy import special as _sp

from .errors import DomainError, UnsupportedConfigError, UsageError
from .specfun import laguerre_half, log_gamma

# Samples are generated in fixed-size blocks, each from its own child
# SeedSequence, so the stream is reproducible no matter how blocks are
# distributed over workers.
SAMPLE_BLOCK = 1 << 16


@dataclass(frozen=True)
class RisChannelSpec:
    """Element count and per-hop Rician shape/scale of the cascade.

    ``omega_1`` / ``omega_2`` are per-hop scale parameters; only the unit
    normalization is accepted by the analytic moment formulas.  Under unit
    scale each hop's envelope is Rician with diffuse per-component deviation
    1/sqrt(2) and line-of-sight amplitude sqrt(K), which is exactly the
    normalization under which the closed-form moments below are the true
    moments of the sampled amplitude.
    """

    n_ris: int
    k_factor_1: float
    k_factor_2: float
    omega_1: float = 1.0
    omega_2: float = 1.0

    def __post_init__(self):
        if self.n_ris != int(self.n_ris) or self.n_ris < 1:
            raise DomainError(f"n_ris must be an integer >= 1, got {self.n_ris}")
        if self.k_factor_1 < 0 or self.k_factor_2 < 0:
            raise DomainError("Rician K factors must be >= 0")
        if self.omega_1 <= 0 or self.omega_2 <= 0:
            raise DomainError("omega scale parameters must be > 0")

    def hop_params(self, hop: int) -> tuple[float, float]:
        """(zeta, eta) for the requested hop: diffuse per-component std and
        line-of-sight amplitude, in the unit-diffuse normalization."""
        k = self.k_factor_1 if hop == 1 else self.k_factor_2
        om = self.omega_1 if hop == 1 else self.omega_2
        return math.sqrt(om / 2.0), math.sqrt(k * om)


@dataclass(frozen=True)
class LinkBudget:
    """Free-space budget tying transmit and receive power together.

    Exactly one of ``tx_power`` / ``rx_power`` may be left None at
    construction time; :func:`friis` fills in the other.
    """

    gain_tx: float
    gain_rx: float
    wavelength: float
    d1: float
    d2: float
    noise_n0: float = 1.0
    tx_power: float | None = None
    rx_power: float | None = None

    def __post_init__(self):
        for name in ("gain_tx", "gain_rx", "wavelength", "d1", "d2", "noise_n0"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")

    @property
    def path_gain(self) -> float:
        """rx_power / tx_power: G_t G_r lambda^2 / (16 pi^2 (d1+d2)^2)."""
        return (
            self.gain_tx
            * self.gain_rx
            * self.wavelength**2
            / (16.0 * math.pi**2 * (self.d1 + self.d2) ** 2)
        )


def friis(link: LinkBudget) -> LinkBudget:
    """Fill in the missing side of the free-space power relation."""
    has_tx = link.tx_power is not None
    has_rx = link.rx_power is not None
    if has_tx == has_rx:
        raise UsageError("exactly one of tx_power / rx_power must be set")
    if has_tx:
        return replace(link, rx_power=link.tx_power * link.path_gain)
    return replace(link, tx_power=link.rx_power / link.path_gain)


@dataclass(frozen=True)
class FadingMoments:
    """First two moments of the cascade amplitude A."""

    k1: float
    k2: float

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise DomainError("moments must be positive")

    @property
    def second_moment(self) -> float:
        return self.k2 + self.k1 * self.k1


@dataclass(frozen=True)
class GammaFit:
    """Moment-matched Gamma density parameters: shape a+1, scale b."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= -1:
            raise DomainError(f"shape parameter a must exceed -1, got {self.a}")
        if self.b <= 0:
            raise DomainError(f"scale parameter b must be positive, got {self.b}")

    @property
    def mean(self) -> float:
        return (self.a + 1.0) * self.b

    @property
    def variance(self) -> float:
        return (self.a + 1.0) * self.b * self.b


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo summary with its standard error and provenance."""

    mean: float
    std_error: float
    trials: int
    seed: int


def analytic_moments(spec: RisChannelSpec) -> FadingMoments:
    """Mean and variance of A from the half-order Laguerre expressions.

    Valid only for the unit scale normalization (the expressions carry no
    scale parameter); other scales are rejected rather than mis-scaled.
    """
    if spec.omega_1 != 1.0 or spec.omega_2 != 1.0:
        raise UnsupportedConfigError(
            "analytic moments are established for omega_1 = omega_2 = 1 only"
        )
    l1 = laguerre_half(-spec.k_factor_1)
    l2 = laguerre_half(-spec.k_factor_2)
    k1 = 0.25 * math.pi * spec.n_ris * l1 * l2
    k2 = spec.n_ris * (
        (1.0 + spec.k_factor_1) * (1.0 + spec.k_factor_2)
        - (math.pi**2 / 16.0) * l1 * l1 * l2 * l2
    )
    return FadingMoments(k1=k1, k2=k2)


def gamma_fit(m: FadingMoments) -> GammaFit:
    """Match a Gamma density to the given mean and variance exactly."""
    return GammaFit(a=m.k1 * m.k1 / m.k2 - 1.0, b=m.k2 / m.k1)


def log_pdf_a(x, fit: GammaFit):
    """ln of the Gamma density, vectorized; -inf at x = 0 when a > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("density support is x >= 0")
    norm = (fit.a + 1.0) * math.log(fit.b) + log_gamma(fit.a + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = fit.a * np.log(x) - x / fit.b - norm
    if fit.a == 0:
        out = np.where(x == 0, -norm, out)  # 0*log(0) -> 0 by convention
    elif fit.a < 0:
        out = np.where(x == 0, np.inf, out)
    return out if out.ndim else float(out)


def pdf_a(x, fit: GammaFit):
    """The moment-matched Gamma density of A."""
    return np.exp(log_pdf_a(x, fit))


def quantile_a(q, fit: GammaFit):
    """Inverse CDF of the fitted density (used to place quadrature nodes)."""
    return _sp.gammaincinv(fit.a + 1.0, np.asarray(q, dtype=float)) * fit.b


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block_index,))
    return np.random.Generator(np.random.Philox(ss))


def _draw_block(spec: RisChannelSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    z1, e1 = spec.hop_params(1)
    z2, e2 = spec.hop_params(2)
    shape = (count, spec.n_ris)
    # envelope of a complex Gaussian with real-axis mean, in real arithmetic
    h = np.hypot(e1 + z1 * rng.standard_normal(shape), z1 * rng.standard_normal(shape))
    g = np.hypot(e2 + z2 * rng.standard_normal(shape), z2 * rng.standard_normal(shape))
    return np.sum(h * g, axis=1)


def sample_a(
    spec: RisChannelSpec,
    trials: int,
    seed: int,
    return_samples: bool = False,
    workers: int | None = None,
):
    """Draw i.i.d. samples of the cascade amplitude A.

    Each hop envelope is the magnitude of a complex Gaussian whose mean
    (the line-of-sight component) lies on the real axis.  Sampling happens
    in fixed 65536-sample blocks seeded independently from (seed, block), so
    the stream is bitwise reproducible and independent of how blocks are
    scheduled across worker threads.

    Returns an :class:`McEstimate`; with ``return_samples=True`` the raw
    sample vector is returned alongside it.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    n_blocks = (trials + SAMPLE_BLOCK - 1) // SAMPLE_BLOCK

    def one_block(block: int) -> np.ndarray:
        take = min(SAMPLE_BLOCK, trials - block * SAMPLE_BLOCK)
        return _draw_block(spec, _block_rng(seed, block), SAMPLE_BLOCK)[:take]

    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers > 1 and n_blocks > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one_block, range(n_blocks)))
    else:
        chunks = [one_block(b) for b in range(n_blocks)]
    samples = np.concatenate(chunks)
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    est = McEstimate(mean=mean, std_error=se, trials=trials, seed=seed)
    if return_samples:
        return est, samples
    return est


def sample_moments(spec: RisChannelSpec, trials: int, seed: int) -> dict:
    """Monte Carlo mean and variance of A with standard errors for both.

    The variance standard error uses the fourth-central-moment formula
    sqrt((m4 - var^2)/trials), valid without normality assumptions.
    """
    est, samples = sample_a(spec, trials, seed, return_samples=True)
    var = float(np.var(samples, ddof=1))
    centered = samples - est.mean
    m4 = float(np.mean(centered**4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / trials)
    return {
        "mean": est.mean,
        "mean_se": est.std_error,
        "var": var,
        "var_se": var_se,
        "trials": trials,
        "seed": seed,
    }


def sample_fit(fit: GammaFit, trials: int, seed: int) -> np.ndarray:
    """Deterministic draws from the fitted Gamma density.

    Uses the same fixed-block stream discipline as :func:`sample_a`, so
    results are reproducible and independent of scheduling.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    chunks = []
    produced = 0
    block = 0
    while produced < trials:
        take = min(SAMPLE_BLOCK, trials - produced)
        rng = _block_rng(seed, block)
        chunks.append(rng.gamma(fit.a + 1.0, fit.b, size=SAMPLE_BLOCK)[:take])
        produced += take
        block += 1
    return np.concatenate(chunks)


def export_samples(path: str, samples: np.ndarray, fmt: str = "csv") -> None:
    """Dump a sample vector for offline inspection (one value per row)."""
    if fmt == "csv":
        np.savetxt(path, samples, fmt="%.17g")
    elif fmt == "npy":
        np.save(path, samples)
    else:
        raise UsageError(f"unknown sample export format {fmt!r}")
