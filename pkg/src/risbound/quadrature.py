"""Log-domain quadrature primitives.

All integrals in this package have integrands of the form exp(g(x)) with g
spanning hundreds of log units, so every integrator here works on g
directly: panels are placed around the maximizer, the peak value is factored
out, and only the normalized remainder is summed in linear floats.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import AccuracyError


@lru_cache(maxsize=64)
def _leggauss(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


def logsumexp(a, axis=None):
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.squeeze(m, axis=axis) if axis is not None else m.reshape(())
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(np.exp(a - m), axis=axis))
    res = out + s
    return float(res) if res.ndim == 0 else res


def log_panel(g, lo, hi, nodes: int):
    """log of integral_lo^hi exp(g(x)) dx on a single Gauss-Legendre panel.

    ``g`` must accept a vector and return a vector; ``lo``/``hi`` may be
    arrays (broadcast panel bounds), in which case the last axis of the
    callback input runs over nodes.
    """
    x, w = _leggauss(nodes)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = half[..., None] * x + mid[..., None]
    vals = g(pts)
    m = np.max(vals, axis=-1)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(w * np.exp(vals - m[..., None]), axis=-1)) + np.log(half)
    return m + s


def log_panel_adaptive(
    g,
    lo,
    hi,
    start_nodes: int = 96,
    rel_tol: float = 1e-9,
    max_doublings: int = 3,
    label: str = "integral",
):
    """Node-doubling wrapper around :func:`log_panel`.

    Doubles the node count until successive log values agree to ``rel_tol``
    (difference of logs, i.e. relative agreement of the linear values).
    """
    nodes = start_nodes
    prev = log_panel(g, lo, hi, nodes)
    for _ in range(max_doublings):
        nodes *= 2
        cur = log_panel(g, lo, hi, nodes)
        err = np.max(np.abs(cur - prev))
        if err < rel_tol or (np.all(~np.isfinite(cur)) and np.all(~np.isfinite(prev))):
            return cur
        prev = cur
    raise AccuracyError(
        f"{label}: node doubling stalled at {nodes} nodes (log change {err:.2e})",
        estimate=prev,
        achieved_error=float(err),
    )


def log_radial_integral(n, beta, nodes: int = 160):
    """log of integral_0^inf r^(n-1) exp(-r^2/2 + beta*r) dr.

    The integrand peaks at r* = beta/2 + sqrt(beta^2/4 + n - 1) with Gaussian
    curvature 1 + (n-1)/r*^2; a panel of +-(15..18) peak widths captures the
    mass to below 1e-40 truncation.  ``beta`` may be an array.
    """
    beta = np.asarray(beta, dtype=float)
    rstar = 0.5 * (beta + np.sqrt(beta * beta + 4.0 * (n - 1.0)))
    sigma = 1.0 / np.sqrt(1.0 + (n - 1.0) / rstar**2)
    lo = np.maximum(1e-300, rstar - 15.0 * sigma)
    hi = rstar + 18.0 * sigma

    def g(r):
        with np.errstate(divide="ignore"):
            return (n - 1.0) * np.log(r) - 0.5 * r * r + beta[..., None] * r

    return log_panel(g, lo, hi, nodes)


def log_radial_integral_adaptive(n, beta, rel_tol: float = 1e-10):
    """Adaptive (node-doubling) version of :func:`log_radial_integral`."""
    beta = np.asarray(beta, dtype=float)
    prev = log_radial_integral(n, beta, nodes=96)
    for nodes in (192, 384, 768):
        cur = log_radial_integral(n, beta, nodes=nodes)
        if np.max(np.abs(cur - prev)) < rel_tol:
            return cur
        prev = cur
    raise AccuracyError(
        "radial integral did not converge under node doubling",
        estimate=prev,
    )


def log_gaussian_exponential_integral(
    p: float, c: float, inv_b: float, rel_tol: float = 1e-10
) -> float:
    """log of integral_0^inf A^p exp(-c A^2 - A/b) dA with 1/b passed directly.

    Requires c > 0.  Handles p >= 0 and mildly negative p (> -1).
    """
    if c <= 0:
        raise ValueError(f"Gaussian coefficient must be positive, got c={c}")
    # stationary point of p ln A - c A^2 - A/b
    if p > 0:
        astar = (-inv_b + math.sqrt(inv_b * inv_b + 8.0 * c * p)) / (4.0 * c)
    else:
        astar = 0.0
    sigma = 1.0 / math.sqrt(p / max(astar, 1e-300) ** 2 + 2.0 * c) if p > 0 else 1.0 / math.sqrt(2.0 * c)
    lo = max(0.0, astar - 15.0 * sigma)
    hi = astar + 20.0 * sigma

    def g(a):
        with np.errstate(divide="ignore", invalid="ignore"):
            la = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
            out = p * la - c * a * a - inv_b * a
            if p == 0:
                out = np.where(a == 0, -0.0, out)
        return out

    if lo == 0.0 and p < 0:
        # integrable endpoint singularity: substitute A = t^(1/(1+p)) to flatten
        q = 1.0 / (1.0 + p)

        def gt(t):
            with np.errstate(divide="ignore"):
                lt = np.log(t)
            a = np.exp(q * lt)
            return p * q * lt - c * a * a - inv_b * a + math.log(q) + (q - 1.0) * lt

        return float(
            log_panel_adaptive(gt, 1e-300, hi ** (1.0 + p), start_nodes=192,
                               rel_tol=rel_tol, label="singular moment integral")
        )
    return float(
        log_panel_adaptive(g, lo, hi, start_nodes=128, rel_tol=rel_tol,
                           label="Gaussian-exponential moment integral")
    )


def chebyshev_nodes(order: int):
    """First-kind Chebyshev abscissae cos((2i-1)pi/2K) and weight pi/K."""
    i = np.arange(1, order + 1)
    psi = np.cos((2.0 * i - 1.0) * math.pi / (2.0 * order))
    return psi, math.pi / order
