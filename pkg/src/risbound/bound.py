"""Escape-probability bound: exact 2-D oracle, accelerated routes, expectation.

The ground truth is the double integral for the probability Phi that noise
carries a signal point at radius A*sqrt(n*snr) outside the cone of angle
alpha1.  Two accelerations are layered on top and validated against it:

* a saddle-point style collapse of the radial integral into the product
  sqrt(2*pi) * Delta * (nabla/e)**(n-1) * exp(nabla**2/2), and
* first-kind Chebyshev quadrature of the remaining angular integral.

Averaging the accelerated conditional over the Gamma fit of A yields the
closed-form expected bound (a weighted sum of Gaussian-exponential moment
integrals), the numerically integrated expectation, and an asymptotic form
for large blocklength.  Where printed variants of these formulas disagree,
the variant matching the numerical oracle is selected and the choice is
recorded in the diagnostics (see docs/formula_notes.md).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import FadingMoments, GammaFit, RisChannelSpec, analytic_moments, gamma_fit, quantile_a
from .errors import (
    DomainError,
    InterpretationError,
    OutOfRegimeError,
    UnresolvedFormulaError,
)
from .quadrature import (
    chebyshev_nodes,
    log_gaussian_exponential_integral,
    log_panel_adaptive,
    log_radial_integral,
    log_radial_integral_adaptive,
    logsumexp,
)
from .specfun import SignedLogValue, kummer_1f1, log_gamma, log_gaussian_q
from .spheregeom import solve_alpha1

LN2 = math.log(2.0)

#: Readings of the variance-like quantity inside the saddle-point factors.
#: "second_moment" uses E[A^2]; "var_a" uses Var[A].  The default is the
#: reading that tracks the exact 2-D oracle (see docs/formula_notes.md).
VARIANCE_INTERPRETATIONS = ("second_moment", "var_a")
DEFAULT_VARIANCE_INTERPRETATION = "second_moment"

#: Middle parameter of the second Kummer term in the closed-form moment
#: integral: "b32" uses 3/2, "b12" uses 1/2, "auto" picks whichever matches
#: direct quadrature of the integrand (cached per argument regime).
KUMMER_VARIANTS = ("b32", "b12", "auto")

#: Beyond this Kummer argument the two closed-form terms cancel to more
#: digits than a float64 carries; the moment integral falls back to its
#: deterministic quadrature route and the event is counted in diagnostics.
KUMMER_Z_SWITCH = 20.0

#: The two Kummer terms agree to exp(cancellation) before subtracting; past
#: this depth (natural-log units) fewer than ~8 significant digits survive
#: in float64 and the quadrature route takes over.
KUMMER_CANCEL_LIMIT = 18.0

METHODS = ("exact_2d", "collapsed_1d", "chebyshev", "closed_form", "asymptotic")

QUAD_ORDER_START = 32
QUAD_ORDER_MAX = 512
QUAD_ORDER_REL_TOL = 1e-4


@dataclass(frozen=True)
class BoundQuery:
    """One bound evaluation request.

    ``snr`` is the linear ratio of received signal power to noise power (the
    scale that sets the sphere radius); dB conversion and the link budget
    live in the CLI layer.  ``quad_order=0`` requests automatic doubling
    from 32 nodes until successive values agree to 1e-4 relative, capped at
    512.
    """

    n: int
    rate: float
    snr: float
    quad_order: int = 0
    method: str = "chebyshev"
    variance_interpretation: str = DEFAULT_VARIANCE_INTERPRETATION
    kummer_variant: str = "auto"

    def __post_init__(self):
        if self.n < 2 or self.n != int(self.n):
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if self.rate <= 0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        if self.snr <= 0:
            raise DomainError(f"snr must be positive, got {self.snr}")
        if self.quad_order < 0:
            raise DomainError("quad_order must be >= 0 (0 = adaptive)")
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.variance_interpretation not in VARIANCE_INTERPRETATIONS:
            raise DomainError(
                f"unknown variance interpretation {self.variance_interpretation!r}"
            )
        if self.kummer_variant not in KUMMER_VARIANTS:
            raise DomainError(f"unknown kummer variant {self.kummer_variant!r}")


@dataclass(frozen=True)
class ConditionalBound:
    """Phi evaluated at one amplitude: value = min(1, q_term + integral)."""

    value: float
    q_term: float
    integral_term: SignedLogValue
    clamped: bool
    log_value: float


@dataclass
class CurvePoint:
    """One sweep cell: inputs, cone angle, bound values and diagnostics."""

    n: int
    rate: float
    snr: float
    alpha1: float
    expected_bound: float
    log_expected_bound: float
    method: str
    asymptotic: float | None = None
    oracle_bound: float | None = None
    diagnostics: dict = field(default_factory=dict)


def variance_slot(moments: FadingMoments, interpretation: str) -> float:
    """The positive quantity standing in for 'k2 - k1^2' in the factors."""
    if interpretation == "var_a":
        return moments.k2
    if interpretation == "second_moment":
        return moments.second_moment
    raise DomainError(f"unknown variance interpretation {interpretation!r}")


# --------------------------------------------------------------------------
# saddle-point factors
# --------------------------------------------------------------------------

def nabla_base(alpha, n: int, snr: float, slot: float):
    """The amplitude-free factor of the radial saddle point, nabla(alpha, n)."""
    if slot <= 0:
        raise InterpretationError(
            f"variance slot must be positive, got {slot}; "
            "the selected variance interpretation is inconsistent"
        )
    c = np.cos(alpha)
    inner = snr * c * c / 4.0 + (n - 1.0) / (n * slot)
    return np.sqrt(n) * (0.5 * math.sqrt(snr) * c + np.sqrt(inner))


def delta_factor(alpha, n: int, amp, snr: float, slot: float):
    """Curvature correction Delta: the mean of its two printed branches.

    The first branch carries the amplitude explicitly; the second uses the
    amplitude-free nabla(alpha, n), matching the printed form.
    """
    if slot <= 0:
        raise InterpretationError(f"variance slot must be positive, got {slot}")
    c = np.cos(alpha)
    u = np.asarray(amp) * c * math.sqrt(snr)
    b1 = (1.0 + (slot / 4.0) * (np.sqrt(u * u + 4.0 / slot) - u) ** 2) ** -0.5
    nb = nabla_base(alpha, n, snr, slot)
    b2 = np.sqrt(nb * nb / (nb * nb + (n - 1.0) / slot))
    return 0.5 * (b1 + b2)


def collapsed_radial_integral(alpha: float, n: int, amp: float, snr: float, var_slot: float) -> SignedLogValue:
    """Saddle-point approximation of the radial integral, in log domain.

    Approximates integral_0^inf r^(n-1) exp(-r^2/2 + r*A*sqrt(n*snr)*cos a) dr
    by sqrt(2*pi) * Delta * (nabla/e)**(n-1) * exp(nabla^2/2) with
    nabla = A * nabla(alpha, n).
    """
    if amp < 0:
        raise DomainError(f"amplitude must be >= 0, got {amp}")
    nab = amp * float(nabla_base(alpha, n, snr, var_slot))
    if nab <= 0:
        return SignedLogValue.zero()
    d = float(delta_factor(alpha, n, amp, snr, var_slot))
    log_val = (
        0.5 * math.log(2.0 * math.pi)
        + math.log(d)
        + (n - 1.0) * (math.log(nab) - 1.0)
        + 0.5 * nab * nab
    )
    return SignedLogValue.from_log(log_val)


# --------------------------------------------------------------------------
# conditional bounds
# --------------------------------------------------------------------------

def _log_phi_prefactor(n: int) -> float:
    return (
        math.log(n - 1.0)
        - (n / 2.0) * LN2
        - 0.5 * math.log(math.pi)
        - log_gamma((n + 1) / 2.0)
    )


def _check_alpha1(alpha1: float) -> None:
    if not (0.0 < alpha1):
        raise DomainError(f"alpha1 must be positive, got {alpha1}")


def phi_exact_log_many(alpha1: float, n: int, amps, snr: float, outer_nodes: int = 0):
    """log Phi by full 2-D quadrature, vectorized over amplitudes.

    Outer angular panel via Gauss-Legendre with node doubling (when
    ``outer_nodes`` is 0), inner radial integral on a saddle-centred panel.
    Values are clamped to log(1) = 0.
    """
    amps = np.atleast_1d(np.asarray(amps, dtype=float))
    mu = amps * math.sqrt(n * snr)
    lq = log_gaussian_q(mu)
    if alpha1 >= math.pi / 2.0:
        return np.minimum(0.0, lq)

    def outer(alpha_pts):
        # alpha_pts: (..., nodes); broadcast amplitude axis in front
        beta = mu.reshape((-1,) + (1,) * alpha_pts.ndim) * np.cos(alpha_pts)
        inner = log_radial_integral(n, beta)
        return (n - 2.0) * np.log(np.sin(alpha_pts)) + inner

    if outer_nodes:
        from .quadrature import log_panel

        lint = log_panel(outer, alpha1, math.pi / 2.0, outer_nodes)
    else:
        lint = log_panel_adaptive(
            outer, alpha1, math.pi / 2.0, start_nodes=96, rel_tol=1e-9,
            label="angular escape integral",
        )
    lint = np.asarray(lint).reshape(amps.shape) + _log_phi_prefactor(n) - 0.5 * mu * mu
    return np.minimum(0.0, np.logaddexp(lq, lint))


def phi_exact_2d(alpha1: float, n: int, amp: float, snr: float) -> ConditionalBound:
    """Ground-truth conditional bound by adaptive 2-D quadrature."""
    _check_alpha1(alpha1)
    if amp < 0:
        raise DomainError(f"amplitude must be >= 0, got {amp}")
    mu = amp * math.sqrt(n * snr)
    lq = float(log_gaussian_q(mu))
    if alpha1 >= math.pi / 2.0:
        return ConditionalBound(
            value=math.exp(lq),
            q_term=math.exp(lq),
            integral_term=SignedLogValue.zero(),
            clamped=False,
            log_value=min(0.0, lq),
        )

    def outer(alpha_pts):
        beta = mu * np.cos(alpha_pts)
        return (n - 2.0) * np.log(np.sin(alpha_pts)) + log_radial_integral_adaptive(n, beta)

    lint = float(
        log_panel_adaptive(outer, alpha1, math.pi / 2.0, start_nodes=96,
                           rel_tol=1e-9, label="angular escape integral")
    )
    lint += _log_phi_prefactor(n) - 0.5 * mu * mu
    raw = math.exp(lq) + math.exp(lint)
    log_value = float(np.logaddexp(lq, lint))
    clamped = raw > 1.0
    return ConditionalBound(
        value=min(1.0, raw),
        q_term=math.exp(lq),
        integral_term=SignedLogValue.from_log(lint),
        clamped=clamped,
        log_value=min(0.0, log_value),
    )


def phi_collapsed_1d(
    alpha1: float,
    n: int,
    amp: float,
    snr: float,
    moments: FadingMoments,
    variance_interpretation: str = DEFAULT_VARIANCE_INTERPRETATION,
) -> ConditionalBound:
    """Conditional bound with the saddle-point radial collapse but the
    angular integral still done by adaptive quadrature.

    This is the infinite-order limit of the Chebyshev route and serves as
    its convergence oracle.
    """
    _check_alpha1(alpha1)
    slot = variance_slot(moments, variance_interpretation)
    mu = amp * math.sqrt(n * snr)
    lq = float(log_gaussian_q(mu))
    if alpha1 >= math.pi / 2.0:
        return ConditionalBound(math.exp(lq), math.exp(lq), SignedLogValue.zero(), False, min(0.0, lq))

    nb_amp = amp * nabla_base(np.pi / 4.0, n, snr, slot)  # domain probe
    if nb_amp <= 0:
        lint = -math.inf
    else:

        def outer(alpha_pts):
            nab = amp * nabla_base(alpha_pts, n, snr, slot)
            d = delta_factor(alpha_pts, n, amp, snr, slot)
            lw = (
                0.5 * math.log(2.0 * math.pi)
                + np.log(d)
                + (n - 1.0) * (np.log(nab) - 1.0)
                + 0.5 * nab * nab
            )
            return (n - 2.0) * np.log(np.sin(alpha_pts)) + lw

        lint = float(
            log_panel_adaptive(outer, alpha1, math.pi / 2.0, start_nodes=96,
                               rel_tol=1e-10, label="angular saddle integral")
        )
        lint += _log_phi_prefactor(n) - 0.5 * mu * mu

    raw = math.exp(lq) + math.exp(lint)
    return ConditionalBound(
        value=min(1.0, raw),
        q_term=math.exp(lq),
        integral_term=SignedLogValue.from_log(lint),
        clamped=raw > 1.0,
        log_value=min(0.0, float(np.logaddexp(lq, lint))),
    )


def _phi_cheb_log_many(alpha1, n, amps, snr, slot, order):
    """log Phi via the Chebyshev-accelerated route, vectorized over amps."""
    amps = np.atleast_1d(np.asarray(amps, dtype=float))
    mu = amps * math.sqrt(n * snr)
    lq = log_gaussian_q(mu)
    if alpha1 >= math.pi / 2.0:
        return np.minimum(0.0, lq)
    psi, w = chebyshev_nodes(order)
    s = 0.5 * (math.pi / 2.0 - alpha1) * psi + 0.5 * (math.pi / 2.0 + alpha1)
    nb = nabla_base(s, n, snr, slot)                       # (K,)
    nab = amps[:, None] * nb[None, :]                      # (nA, K)
    d = delta_factor(s[None, :], n, amps[:, None], snr, slot)
    with np.errstate(divide="ignore"):
        lw = (
            0.5 * math.log(2.0 * math.pi)
            + np.log(d)
            + (n - 1.0) * (np.log(nab) - 1.0)
            + 0.5 * nab * nab
        )
    lnode = np.log(0.5 * (math.pi / 2.0 - alpha1) * w * np.sqrt(1.0 - psi**2))
    body = lw + lnode[None, :] + (n - 2.0) * np.log(np.sin(s))[None, :]
    lint = logsumexp(body, axis=1) + _log_phi_prefactor(n) - 0.5 * mu * mu
    return np.minimum(0.0, np.logaddexp(lq, lint))


def resolve_quad_order(eval_log_at_order, requested: int) -> tuple[float, int]:
    """Apply the doubling rule: from 32 nodes until 1e-4 relative or 512."""
    if requested:
        return eval_log_at_order(requested), requested
    order = QUAD_ORDER_START
    prev = eval_log_at_order(order)
    while order < QUAD_ORDER_MAX:
        order *= 2
        cur = eval_log_at_order(order)
        if (
            np.all(np.isfinite([prev, cur])) and abs(cur - prev) < QUAD_ORDER_REL_TOL
        ) or (not np.isfinite(prev) and not np.isfinite(cur)):
            return cur, order
        prev = cur
    return prev, QUAD_ORDER_MAX


def phi_chebyshev(
    alpha1: float,
    n: int,
    amp: float,
    snr: float,
    moments: FadingMoments,
    quad_order: int = 0,
    variance_interpretation: str = DEFAULT_VARIANCE_INTERPRETATION,
) -> ConditionalBound:
    """Closed-form conditional bound: saddle-point radial collapse plus
    first-kind Chebyshev quadrature of the angular integral.

    The change of variables from (alpha1, pi/2) to (-1, 1) contributes the
    interval half-width and the sqrt(1 - psi_i^2) factor that converts the
    weighted Chebyshev sum back into a plain integral.
    """
    _check_alpha1(alpha1)
    slot = variance_slot(moments, variance_interpretation)
    mu = amp * math.sqrt(n * snr)
    lq = float(log_gaussian_q(mu))

    def at_order(k):
        return float(_phi_cheb_log_many(alpha1, n, amp, snr, slot, k)[0])

    if alpha1 >= math.pi / 2.0:
        log_value, order = min(0.0, lq), 0
        lint = -math.inf
    else:
        log_value, order = resolve_quad_order(at_order, quad_order)
        # recover the integral part alone for the diagnostics field
        psi_contrib = np.exp(log_value) - math.exp(lq)
        lint = math.log(psi_contrib) if psi_contrib > 0 else -math.inf

    raw_log = log_value
    value = math.exp(min(0.0, raw_log))
    return ConditionalBound(
        value=value,
        q_term=math.exp(lq),
        integral_term=SignedLogValue.from_log(lint),
        clamped=bool(raw_log >= 0.0 and math.exp(lq) + math.exp(lint) > 1.0),
        log_value=min(0.0, raw_log),
    )


# --------------------------------------------------------------------------
# moment integral (the closed-form expectation kernel)
# --------------------------------------------------------------------------

_variant_cache: dict = {}


def _moment_pair_log(
    p: float, inv_b: float, c: float, second_param: float
) -> tuple[SignedLogValue, float]:
    """The two-term closed form of integral_0^inf A^p exp(-c A^2 - A/b) dA.

    second_param is the middle parameter of the SECOND Kummer function; the
    first always carries 1/2.  Returns (value, cancellation depth): the two
    terms agree to exp(depth) before subtracting, so roughly depth/ln(10)
    decimal digits are lost.
    """
    z = inv_b * inv_b / (4.0 * c)
    t1 = SignedLogValue.from_log(
        -LN2 - 0.5 * (p + 1.0) * math.log(c) + log_gamma((p + 1.0) / 2.0)
    ) * kummer_1f1((p + 1.0) / 2.0, 0.5, z)
    if inv_b == 0.0:
        return t1, 0.0
    t2 = SignedLogValue.from_log(
        math.log(inv_b) - LN2 - 0.5 * (p + 2.0) * math.log(c) + log_gamma(p / 2.0 + 1.0)
    ) * kummer_1f1(p / 2.0 + 1.0, second_param, z)
    out = t1 - t2
    depth = max(t1.log_abs, t2.log_abs) - (out.log_abs if out.sign != 0 else -math.inf)
    return out, depth


def _moment_numeric_log(p: float, inv_b: float, c: float) -> float:
    return log_gaussian_exponential_integral(p, c, inv_b)


def moment_pair_is_healthy(p: float, inv_b: float, c: float) -> bool:
    """Whether the closed Kummer pair retains enough float64 digits here."""
    z = inv_b * inv_b / (4.0 * c)
    if z > KUMMER_Z_SWITCH:
        return False
    if inv_b == 0.0:
        return True
    pair, depth = _moment_pair_log(p, inv_b, c, 1.5)
    return pair.sign > 0 and depth <= KUMMER_CANCEL_LIMIT


def _resolve_kummer_variant(p: float, inv_b: float, c: float) -> str:
    """Pick the Kummer-pair variant matching direct quadrature, cached per
    order-of-magnitude regime of (p, z).

    Candidates whose subtraction has already lost float64 significance are
    not decidable at these arguments and are skipped; the caller falls back
    to quadrature there anyway.  A healthy candidate that disagrees with the
    oracle beyond 1e-6 raises so the discrepancy surfaces loudly.
    """
    z = inv_b * inv_b / (4.0 * c)
    key = (round(math.log10(max(p, 1e-6))), round(math.log10(max(z, 1e-12))))
    if key in _variant_cache:
        return _variant_cache[key]
    ref = _moment_numeric_log(p, inv_b, c)
    any_healthy = False
    best = None
    for name, sec in (("b32", 1.5), ("b12", 0.5)):
        cand, depth = _moment_pair_log(p, inv_b, c, sec)
        if cand.sign <= 0 or depth > KUMMER_CANCEL_LIMIT:
            continue
        any_healthy = True
        if abs(math.expm1(cand.log_abs - ref)) <= 1e-6:
            best = name
            break
    if best is None:
        if any_healthy:
            raise UnresolvedFormulaError(
                f"no closed-form variant matches quadrature for p={p}, 1/b={inv_b}, "
                f"c={c} (reference log value {ref:.6f})"
            )
        best = "b32"  # undecidable here; the value comes from quadrature
    _variant_cache[key] = best
    return best


def moment_integral(
    a_exp: float,
    b: float,
    c: float,
    variant: str = "auto",
    lower_limit: str = "zero",
) -> SignedLogValue:
    """integral of A^a_exp * exp(-c A^2 - A/b) dA as a SignedLogValue.

    ``lower_limit="zero"`` (the physical support of an amplitude) is the
    default; "neg_infinity" is accepted only for non-negative integer
    exponents, where the full-line integral is defined.  ``b`` may be
    ``math.inf`` to drop the exponential factor.  Where the two-term form
    cancels past float64 significance (large Kummer argument, or jointly
    large exponent and argument) the value is produced by deterministic
    quadrature instead; :func:`moment_pair_is_healthy` reports which route
    applies.
    """
    if c <= 0:
        raise DomainError(f"Gaussian coefficient must be positive, got c={c}")
    if b <= 0:
        raise DomainError(f"scale b must be positive, got b={b}")
    if variant not in KUMMER_VARIANTS:
        raise DomainError(f"unknown kummer variant {variant!r}")
    inv_b = 0.0 if math.isinf(b) else 1.0 / b

    if lower_limit == "neg_infinity":
        if a_exp < 0 or a_exp != int(a_exp):
            lower_limit = "zero"  # forced: integrand undefined on the negative axis
    elif lower_limit != "zero":
        raise DomainError(f"unknown lower limit {lower_limit!r}")

    z = inv_b * inv_b / (4.0 * c)
    if lower_limit == "neg_infinity":
        p = int(a_exp)
        if p % 2 == 0:
            t = SignedLogValue.from_log(
                -0.5 * (p + 1.0) * math.log(c) + log_gamma((p + 1.0) / 2.0)
            ) * kummer_1f1((p + 1.0) / 2.0, 0.5, z)
            return t
        t = SignedLogValue.from_log(
            math.log(inv_b) - 0.5 * (p + 2.0) * math.log(c) + log_gamma(p / 2.0 + 1.0)
        ) * kummer_1f1(p / 2.0 + 1.0, 1.5, z)
        return -t

    if z > KUMMER_Z_SWITCH:
        return SignedLogValue.from_log(_moment_numeric_log(a_exp, inv_b, c))

    if variant == "auto":
        variant = _resolve_kummer_variant(a_exp, inv_b, c) if inv_b > 0 else "b32"
    second = 1.5 if variant == "b32" else 0.5
    pair, depth = _moment_pair_log(a_exp, inv_b, c, second)
    if pair.sign <= 0 or depth > KUMMER_CANCEL_LIMIT:
        return SignedLogValue.from_log(_moment_numeric_log(a_exp, inv_b, c))
    return pair


# --------------------------------------------------------------------------
# expectation over the amplitude distribution
# --------------------------------------------------------------------------

def _product_support(fit: GammaFit, log_f) -> tuple[float, float]:
    """Bracket the mass of f_A(A) * exp(log_f(A)).

    The integrand's peak can sit arbitrarily deep in the density's left tail
    (log_f typically falls like -X A^2), so the bracket comes from a log-space
    scan of the product rather than from density quantiles.
    """
    from .channel import log_pdf_a

    hi = float(quantile_a(1.0 - 1e-16, fit))
    lo = min(fit.b * 1e-8, hi * 1e-8)
    scan = np.geomspace(lo, hi, 400)
    g = log_pdf_a(scan, fit) + log_f(scan)
    g = np.where(np.isfinite(g), g, -np.inf)
    gmax = float(np.max(g))
    if not np.isfinite(gmax):
        return lo, hi
    keep = np.nonzero(g >= gmax - 80.0)[0]
    i0, i1 = int(keep[0]), int(keep[-1])
    left = scan[max(i0 - 2, 0)]
    right = scan[min(i1 + 2, len(scan) - 1)]
    if i0 == 0:
        left = 0.0
    if i1 == len(scan) - 1:
        right = hi
    return float(left), float(right)


def log_expect_over_fit(fit: GammaFit, log_f, nodes: int = 512, rel_tol: float = 1e-7):
    """log of E[exp(log_f(A))] under the Gamma fit, with node doubling.

    ``log_f`` takes a vector of amplitudes and returns log integrand values
    (<= 0 for probabilities).
    """
    from .channel import log_pdf_a

    lo, hi = _product_support(fit, log_f)
    prev = None
    n = nodes // 2
    for _ in range(4):
        x, w = np.polynomial.legendre.leggauss(n)
        amps = np.maximum(0.5 * (hi - lo) * x + 0.5 * (hi + lo), 1e-300)
        log_w = np.log(0.5 * (hi - lo) * w)
        g = log_pdf_a(amps, fit) + log_f(amps) + log_w
        cur = logsumexp(g)
        if prev is not None and (abs(cur - prev) < rel_tol or (not np.isfinite(cur) and not np.isfinite(prev))):
            return cur
        prev = cur
        n *= 2
    return prev


def log_expected_q_term(fit: GammaFit, n: int, snr: float) -> float:
    """log E[Q(A sqrt(n snr))]: the hemisphere term of the expected bound."""
    root = math.sqrt(n * snr)
    return log_expect_over_fit(fit, lambda amps: log_gaussian_q(amps * root))


def expected_bound_closed_form(
    query: BoundQuery, moments: FadingMoments, fit: GammaFit
) -> CurvePoint:
    """Closed-form expected bound: Chebyshev sum of moment integrals.

    Each angular node i contributes
        C * Delta_i * nabla_i^(n-1) * sin^(n-2) s_i * node_weight
          * integral A^(a+n-1) exp(-X_i A^2 - A/b) dA
    with X_i = (n snr - nabla_i^2)/2, plus the expectation of the Q term
    (restored here; it is evaluated by deterministic quadrature).  Requires
    X_i > 0 at every node, otherwise the amplitude integral diverges and an
    OutOfRegimeError is raised.
    """
    slot = variance_slot(moments, query.variance_interpretation)
    cone = solve_alpha1(query.n, query.rate)
    alpha1, n, snr = cone.alpha1, query.n, query.snr
    if alpha1 >= math.pi / 2.0:
        lq = log_expected_q_term(fit, n, snr)
        return CurvePoint(
            n=n, rate=query.rate, snr=snr, alpha1=alpha1,
            expected_bound=math.exp(min(0.0, lq)), log_expected_bound=min(0.0, lq),
            method="closed_form",
            diagnostics={"quad_order_used": 0, "degenerate_q_only": True},
        )

    diagnostics: dict = {}

    def closed_at_order(order: int) -> float:
        psi, w = chebyshev_nodes(order)
        s = 0.5 * (math.pi / 2.0 - alpha1) * psi + 0.5 * (math.pi / 2.0 + alpha1)
        nb = nabla_base(s, n, snr, slot)
        x_nodes = 0.5 * (n * snr - nb * nb)
        if np.any(x_nodes <= 0.0):
            raise OutOfRegimeError(
                f"closed-form expectation invalid: X <= 0 at {int(np.sum(x_nodes <= 0))} "
                f"of {order} angular nodes (n={n}, snr={snr:.6g}); "
                "the amplitude integral diverges there"
            )
        d = delta_factor(s, n, moments.k1, snr, slot)
        lnode = np.log(0.5 * (math.pi / 2.0 - alpha1) * w * np.sqrt(1.0 - psi**2))
        lconst = (
            math.log(n - 1.0)
            - 0.5 * (n - 1.0) * LN2
            - log_gamma((n + 1) / 2.0)
            - (n - 1.0)
            - (fit.a + 1.0) * math.log(fit.b)
            - log_gamma(fit.a + 1.0)
        )
        fallbacks = 0
        p_exp = fit.a + n - 1.0
        inv_b = 1.0 / fit.b
        terms = np.empty(order)
        for i in range(order):
            x_i = float(x_nodes[i])
            z = inv_b * inv_b / (4.0 * x_i)
            j_log = None
            if z <= KUMMER_Z_SWITCH:
                variant = query.kummer_variant
                if variant == "auto":
                    variant = _resolve_kummer_variant(p_exp, inv_b, x_i)
                pair, depth = _moment_pair_log(p_exp, inv_b, x_i, 1.5 if variant == "b32" else 0.5)
                if pair.sign > 0 and depth <= KUMMER_CANCEL_LIMIT:
                    j_log = pair.log_abs
            if j_log is None:
                j_log = _moment_numeric_log(p_exp, inv_b, x_i)
                fallbacks += 1
            terms[i] = (
                lconst
                + lnode[i]
                + math.log(d[i])
                + (n - 1.0) * math.log(nb[i])
                + (n - 2.0) * math.log(math.sin(s[i]))
                + j_log
            )
        diagnostics.update(
            nodes_s=s.tolist(),
            nabla_nodes=nb.tolist(),
            x_nodes=x_nodes.tolist(),
            delta_nodes=np.asarray(d).tolist(),
            moment_quadrature_fallbacks=fallbacks,
        )
        return float(logsumexp(terms))

    log_sum, order = resolve_quad_order(closed_at_order, query.quad_order)
    lq = log_expected_q_term(fit, n, snr)
    log_total = float(np.logaddexp(log_sum, lq))
    clamped = log_total > 0.0
    diagnostics.update(
        quad_order_used=order,
        log_q_expectation=lq,
        variance_slot=slot,
        clamped=clamped,
    )
    return CurvePoint(
        n=n, rate=query.rate, snr=snr, alpha1=alpha1,
        expected_bound=math.exp(min(0.0, log_total)),
        log_expected_bound=min(0.0, log_total),
        method="closed_form",
        diagnostics=diagnostics,
    )


def expected_bound_numeric(
    query: BoundQuery, moments: FadingMoments, fit: GammaFit
) -> CurvePoint:
    """Expected bound by direct quadrature of f_A * Phi over the amplitude.

    The conditional Phi comes from the method named in the query
    ("chebyshev" or the ground-truth "exact_2d"/"collapsed_1d" routes); each
    conditional value is clamped to [0, 1] before averaging.
    """
    slot = variance_slot(moments, query.variance_interpretation)
    cone = solve_alpha1(query.n, query.rate)
    alpha1, n, snr = cone.alpha1, query.n, query.snr
    diagnostics: dict = {"variance_slot": slot}

    if query.method == "chebyshev":

        def at_order(order):
            return log_expect_over_fit(
                fit, lambda amps: _phi_cheb_log_many(alpha1, n, amps, snr, slot, order)
            )

        log_val, order = resolve_quad_order(at_order, query.quad_order)
        diagnostics["quad_order_used"] = order
    elif query.method == "exact_2d":
        log_val = log_expect_over_fit(
            fit, lambda amps: phi_exact_log_many(alpha1, n, amps, snr)
        )
        diagnostics["quad_order_used"] = 0
    elif query.method == "collapsed_1d":

        def log_f(amps):
            return np.array(
                [
                    phi_collapsed_1d(alpha1, n, float(a), snr, moments,
                                     query.variance_interpretation).log_value
                    for a in amps
                ]
            )

        log_val = log_expect_over_fit(fit, log_f, nodes=256)
        diagnostics["quad_order_used"] = 0
    else:
        raise DomainError(f"numeric expectation does not support method {query.method!r}")

    log_val = min(0.0, float(log_val))
    return CurvePoint(
        n=n, rate=query.rate, snr=snr, alpha1=alpha1,
        expected_bound=math.exp(log_val),
        log_expected_bound=log_val,
        method=query.method,
        diagnostics=diagnostics,
    )


def expected_bound(query: BoundQuery, spec: RisChannelSpec) -> CurvePoint:
    """Expected lower bound on block error probability for one query."""
    moments = analytic_moments(spec)
    fit = gamma_fit(moments)
    if query.method == "closed_form":
        return expected_bound_closed_form(query, moments, fit)
    if query.method == "asymptotic":
        log_val = log_asymptotic_bound(query, moments, fit)
        cone = solve_alpha1(query.n, query.rate)
        return CurvePoint(
            n=query.n, rate=query.rate, snr=query.snr, alpha1=cone.alpha1,
            expected_bound=math.exp(min(0.0, log_val)),
            log_expected_bound=min(0.0, log_val),
            method="asymptotic",
        )
    return expected_bound_numeric(query, moments, fit)


# --------------------------------------------------------------------------
# asymptotic form
# --------------------------------------------------------------------------

def g_base(alpha, snr: float, slot: float):
    """Amplitude-free part of the large-n saddle factor G(alpha)."""
    c = np.cos(alpha)
    return 0.5 * (math.sqrt(snr) * c + np.sqrt(snr * c * c + 4.0 / slot))


def log_asymptotic_bound(
    query: BoundQuery, moments: FadingMoments, fit: GammaFit
) -> float:
    """Large-blocklength closed form of the expected bound, in log domain.

    Valid when X2 = (n+1) snr/2 - n G(alpha1) cos(alpha1) sqrt(snr)/2 is
    positive; the slowly varying 1/(A sqrt(snr) + 1) factor of the integrand
    is approximated by 1/(A sqrt(snr)) before the moment integral closes.
    """
    slot = variance_slot(moments, query.variance_interpretation)
    cone = solve_alpha1(query.n, query.rate)
    alpha1, n, snr = cone.alpha1, query.n, query.snr
    if alpha1 >= math.pi / 2.0:
        raise OutOfRegimeError("asymptotic form requires alpha1 < pi/2")
    gb = float(g_base(alpha1, snr, slot))
    x2 = 0.5 * (n + 1.0) * snr - 0.5 * n * gb * math.cos(alpha1) * math.sqrt(snr)
    if x2 <= 0.0:
        raise OutOfRegimeError(
            f"asymptotic form out of regime: X2 = {x2:.6g} <= 0 at n={n}, snr={snr:.6g}"
        )
    xi = fit.b / (1.0 + fit.b * math.sqrt(snr))
    j = moment_integral(fit.a + n - 1.0, xi, x2, variant=query.kummer_variant)
    if j.sign <= 0:
        raise UnresolvedFormulaError("asymptotic moment integral came out non-positive")
    return (
        0.5 * math.log(n - 1.0)
        + n * math.log(gb)
        + n * math.log(math.sin(alpha1))
        - math.log(6.0)
        - 2.0
        - math.log(n)
        - 0.5 * math.log(snr)
        - (fit.a + 1.0) * math.log(fit.b)
        - log_gamma(fit.a + 1.0)
        + j.log_abs
    )


def asymptotic_bound(query: BoundQuery, spec: RisChannelSpec) -> float:
    """Linear-domain asymptotic expected bound, clamped to [0, 1]."""
    moments = analytic_moments(spec)
    fit = gamma_fit(moments)
    return math.exp(min(0.0, log_asymptotic_bound(query, moments, fit)))
