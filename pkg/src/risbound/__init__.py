"""Sphere-packing lower bounds on block error probability for a two-hop
reflecting-surface channel with Rician fading, at short blocklength."""

from .bound import (
    BoundQuery,
    ConditionalBound,
    CurvePoint,
    asymptotic_bound,
    expected_bound,
    moment_integral,
    phi_chebyshev,
    phi_exact_2d,
    phi_collapsed_1d,
    collapsed_radial_integral,
)
from .channel import (
    FadingMoments,
    GammaFit,
    LinkBudget,
    McEstimate,
    RisChannelSpec,
    analytic_moments,
    friis,
    gamma_fit,
    pdf_a,
    sample_a,
)
from .errors import RisBoundError
from .spheregeom import ConeAngle, log_cap_ratio, log_full_sphere_area, solve_alpha1

__version__ = "0.1.0"

__all__ = [
    "BoundQuery",
    "ConditionalBound",
    "ConeAngle",
    "CurvePoint",
    "FadingMoments",
    "GammaFit",
    "LinkBudget",
    "McEstimate",
    "RisBoundError",
    "RisChannelSpec",
    "analytic_moments",
    "asymptotic_bound",
    "expected_bound",
    "friis",
    "gamma_fit",
    "moment_integral",
    "log_cap_ratio",
    "log_full_sphere_area",
    "pdf_a",
    "phi_chebyshev",
    "phi_exact_2d",
    "phi_collapsed_1d",
    "sample_a",
    "solve_alpha1",
    "collapsed_radial_integral",
    "__version__",
]
