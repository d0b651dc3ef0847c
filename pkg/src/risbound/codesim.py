"""Random-code maximum-likelihood simulator for converse dominance checks.

A converse bound must sit below the block error rate of every real code.
This module simulates small random BPSK codebooks under the faded channel
with ML (minimum-distance) decoding at known amplitude, so the measured
error rate can be compared against the computed bound at matching
parameters.  Block fading is used: one amplitude draw per codeword, the
same conditioning structure the bound averages over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import RisChannelSpec, _block_rng
from .errors import DomainError

TRIAL_BLOCK = 1 << 12


@dataclass(frozen=True)
class SimConfig:
    """Random-codebook simulation setup.

    ``num_codewords`` defaults to round(2**(n*rate)) when built through
    :meth:`from_rate`.  ``amplitude_override`` freezes the fading amplitude
    at a constant (the degenerate no-fading channel) instead of drawing it.
    ``per_symbol_fading`` draws one amplitude per channel use instead of one
    per block; it is exploratory and excluded from acceptance checks.
    """

    n: int
    num_codewords: int
    snr: float
    spec: RisChannelSpec
    trials: int
    seed: int
    amplitude_override: float | None = None
    per_symbol_fading: bool = False
    fixed_codebook: tuple | None = None  # ((+1,-1,...), ...) rows; None = random per trial

    def __post_init__(self):
        if self.n < 1 or self.n > 20:
            raise DomainError("the simulator is desk-scale: 1 <= n <= 20")
        if self.num_codewords < 2 or self.num_codewords > 2**self.n:
            raise DomainError("need 2 <= M <= 2**n codewords")
        if self.snr <= 0:
            raise DomainError("snr must be positive")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")

    @staticmethod
    def from_rate(n: int, rate: float, snr: float, spec: RisChannelSpec,
                  trials: int, seed: int, **kw) -> "SimConfig":
        m = round(2 ** (n * rate))
        return SimConfig(n=n, num_codewords=m, snr=snr, spec=spec,
                         trials=trials, seed=seed, **kw)


@dataclass(frozen=True)
class SimResult:
    """Block-error estimate; when zero errors occur, ``upper_95`` carries the
    one-sided 95% confidence bound 3/trials."""

    error_rate: float
    std_error: float
    errors: int
    trials: int
    seed: int
    upper_95: float


def _draw_amplitudes(spec: RisChannelSpec, rng: np.random.Generator, shape) -> np.ndarray:
    z1, e1 = spec.hop_params(1)
    z2, e2 = spec.hop_params(2)
    full = shape + (spec.n_ris,)
    h = np.abs(e1 + z1 * (rng.standard_normal(full) + 1j * rng.standard_normal(full)))
    g = np.abs(e2 + z2 * (rng.standard_normal(full) + 1j * rng.standard_normal(full)))
    return np.sum(h * g, axis=-1)


def simulate_ml_error(cfg: SimConfig) -> SimResult:
    """Estimate the block error rate of random BPSK codebooks under ML.

    Per trial: draw an M x n i.i.d. +-1 codebook, one amplitude A (block
    fading), transmit a uniformly chosen codeword as y = A sqrt(snr) s + w
    with unit-variance real noise, decode by minimum Euclidean distance at
    known A, and record whether the decoded index differs from the sent one.
    Trials are processed in fixed blocks with per-block substreams, so the
    estimate is reproducible and parallelizable.
    """
    root = math.sqrt(cfg.snr)
    errors = 0
    done = 0
    block = 0
    while done < cfg.trials:
        take = min(TRIAL_BLOCK, cfg.trials - done)
        rng = _block_rng(cfg.seed, block)
        if cfg.fixed_codebook is not None:
            one = np.asarray(cfg.fixed_codebook, dtype=float)
            books = np.broadcast_to(one, (TRIAL_BLOCK,) + one.shape)
        else:
            books = rng.integers(0, 2, size=(TRIAL_BLOCK, cfg.num_codewords, cfg.n)) * 2.0 - 1.0
        if cfg.amplitude_override is not None:
            amps = np.full((TRIAL_BLOCK, 1), float(cfg.amplitude_override))
        elif cfg.per_symbol_fading:
            amps = _draw_amplitudes(cfg.spec, rng, (TRIAL_BLOCK, cfg.n))
        else:
            amps = _draw_amplitudes(cfg.spec, rng, (TRIAL_BLOCK,))[:, None]
        sent = rng.integers(0, cfg.num_codewords, size=TRIAL_BLOCK)
        noise = rng.standard_normal((TRIAL_BLOCK, cfg.n))
        tx = books[np.arange(TRIAL_BLOCK), sent, :]
        y = amps * root * tx + noise
        # squared distance to each codeword under the known fade
        if cfg.per_symbol_fading:
            diff = y[:, None, :] - amps[:, None, :] * root * books
        else:
            diff = y[:, None, :] - amps[:, :, None] * root * books
        d2 = np.sum(diff * diff, axis=2)
        decoded = np.argmin(d2, axis=1)
        errors += int(np.sum(decoded[:take] != sent[:take]))
        done += take
        block += 1
    rate = errors / cfg.trials
    if errors > 0:
        se = math.sqrt(rate * (1.0 - rate) / cfg.trials)
        upper = rate + 3.0 * se
    else:
        se = 0.0
        upper = 3.0 / cfg.trials
    return SimResult(error_rate=rate, std_error=se, errors=errors,
                     trials=cfg.trials, seed=cfg.seed, upper_95=upper)


def pairwise_error_exact(codebook: np.ndarray, snr: float, amplitude: float = 1.0) -> float:
    """Exact ML block error for a FIXED codebook of two codewords.

    For M = 2 the ML error given either transmitted word is
    Q(d / 2) with d the Euclidean distance between the scaled codewords,
    which makes a tiny independent oracle for the simulator.
    """
    if codebook.shape[0] != 2:
        raise DomainError("exact enumeration implemented for M = 2 only")
    from .specfun import gaussian_q

    s0 = amplitude * math.sqrt(snr) * codebook[0]
    s1 = amplitude * math.sqrt(snr) * codebook[1]
    d = float(np.linalg.norm(s0 - s1))
    if d == 0.0:
        return 0.5  # duplicate codewords: first-index tie-break errs half the time
    return gaussian_q(d / 2.0)
