"""Numerics for ``u_tt - Δu + μ log(I + (-Δ)^{1/2}) u_t = 0``.

Characteristic roots and the real/complex threshold (``model``), radial
Gaussian data (``data``), branch-stable Fourier-side propagators, profiles
and an RK4 oracle (``spectral``), adaptive radial quadrature
(``quadrature``), and rate experiments with pass/fail verdicts
(``experiments``).
"""
from .data import DataPair, RadialSpectralDatum, gaussian_datum, parse_data_key, zero_datum, zero_mean_datum
from .errors import (
    CannotFit,
    DegenerateDatum,
    DivergentIntegral,
    InvalidParameter,
    LogDampError,
    NoConvergence,
    RegimeError,
    UndefinedRatio,
)
from .experiments import (
    RateFit,
    TimeGrid,
    Verdict,
    fit_loglog,
    run_profile_convergence,
    run_regime_comparison,
    run_root_gap_bounds,
    run_singularity_probe,
    run_solution_norm_rates,
    run_zero_mean,
    solution_norm,
    verify_all,
)
from .model import DampingParams, Regime, char_roots, classify, discriminant, root_gap, threshold_delta
from .quadrature import QuadratureSpec, integrate_radial, l2_norm_fourier_side, lemma_integral, truncation_radius
from .spectral import ProfileKind, eval_what, ode_oracle, profile, propagators

__version__ = "0.1.0"
