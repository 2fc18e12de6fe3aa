"""Damping parameters, characteristic roots and the real/complex threshold.

Each Fourier mode of ``u_tt - Δu + μ log(I + (-Δ)^{1/2}) u_t = 0`` obeys

    w'' + μ log(1+r) w' + r² w = 0,      r = |ξ|,

whose characteristic roots are

    λ± = (-μ log(1+r) ± sqrt(μ² log²(1+r) - 4r²)) / 2.

The discriminant ``h(r) = μ² log²(1+r) - 4r²`` is never positive when
μ ≤ 2. For μ > 2 it is positive on (0, δ) and negative beyond, where δ
solves ``μ log(1+δ) = 2δ``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import InvalidParameter, RegimeError

__all__ = [
    "DampingParams",
    "Regime",
    "CharRoots",
    "Threshold",
    "classify",
    "char_roots",
    "root_gap",
    "discriminant",
    "threshold_delta",
    "energy_weight",
    "log1p_ratio",
    "log1p_minus_x",
    "slow_root",
]

_SERIES_CUTOFF = 1e-4
_LOG1P_SERIES_CUTOFF = 0.1
_LOG1P_SERIES_TERMS = 24


class Regime(enum.Enum):
    NON_EFFECTIVE = "non-effective"
    CRITICAL = "critical"
    EFFECTIVE = "effective"


def _check_mu(mu):
    mu = float(mu)
    if not mu > 0 or not math.isfinite(mu):
        raise InvalidParameter(f"mu must be a positive finite number, got {mu!r}")
    return mu


@dataclass(frozen=True)
class DampingParams:
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_mu(self.mu))

    @property
    def regime(self) -> Regime:
        return classify(self.mu)


def classify(mu: float) -> Regime:
    """Regime of ``mu``; the comparison with 2 is exact."""
    mu = _check_mu(mu)
    if mu < 2:
        return Regime.NON_EFFECTIVE
    if mu == 2:
        return Regime.CRITICAL
    return Regime.EFFECTIVE


def log1p_ratio(r):
    """``log(1+r)/r`` with the removable singularity at 0 filled in."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, r)
    series = 1.0 - r / 2.0 + r * r / 3.0 - r ** 3 / 4.0
    out = np.where(small, series, np.log1p(safe) / safe)
    return out[()] if out.ndim == 0 else out


def log1p_minus_x(r):
    """``log(1+r) - r`` without cancellation for small r."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _LOG1P_SERIES_CUTOFF
    # -r²/2 + r³/3 - r⁴/4 + ...  evaluated by Horner in r
    acc = np.zeros_like(r)
    for k in range(_LOG1P_SERIES_TERMS + 1, 1, -1):
        acc = acc * r + ((-1.0) ** (k + 1)) / k
    series = acc * r * r
    out = np.where(small, series, np.log1p(np.where(small, 0.0, r)) - r)
    return out[()] if out.ndim == 0 else out


def discriminant(mu: float, r):
    """``h(r) = μ² log²(1+r) - 4r²`` in factored, cancellation-free form."""
    r = np.asarray(r, dtype=float)
    L = np.log1p(r)
    # μL - 2r = (μ-2) r + μ (L - r)
    minus = (mu - 2.0) * r + mu * log1p_minus_x(r)
    if mu > 2:
        # the same factor re-centred at its root δ, which removes the
        # cancellation between μL and 2r near the branch point
        d = _cached_delta(float(mu))
        u = r - d
        near = np.abs(u) < 0.25 * d
        minus = np.where(near, mu * np.log1p(np.where(near, u, 0.0) / (1.0 + d)) - 2.0 * u, minus)
    out = minus * (mu * L + 2.0 * r)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CharRoots:
    lambda_plus: complex
    lambda_minus: complex
    discriminant: float

    @property
    def real(self) -> bool:
        return self.discriminant >= 0


def char_roots(mu: float, r: float) -> CharRoots:
    mu = _check_mu(mu)
    r = float(r)
    if r < 0:
        raise InvalidParameter(f"r must be nonnegative, got {r!r}")
    L = math.log1p(r)
    h = float(discriminant(mu, r))
    if h >= 0:
        s = math.sqrt(h)
        big = mu * L + s
        lam_minus = -big / 2.0
        # product of the roots is r²; avoids the cancellation in -μL + s
        lam_plus = -2.0 * r * r / big if big > 0 else 0.0
        return CharRoots(complex(lam_plus), complex(lam_minus), h)
    half_im = math.sqrt(-h) / 2.0
    re = -mu * L / 2.0
    return CharRoots(complex(re, half_im), complex(re, -half_im), h)


def root_gap(mu: float, r: float) -> complex:
    """``λ+ - λ-`` taken directly as the square root of the discriminant."""
    mu = _check_mu(mu)
    if r < 0:
        raise InvalidParameter(f"r must be nonnegative, got {r!r}")
    h = float(discriminant(mu, r))
    if h >= 0:
        return complex(math.sqrt(h), 0.0)
    return complex(0.0, math.sqrt(-h))


def slow_root(mu: float, r):
    """Real part of λ+ (the slower root), vectorised over r.

    On the real branch this is ``-2r²/(μL + sqrt(h))``; on the complex
    branch it is ``-μL/2``. The two expressions agree at the branch point.
    """
    r = np.asarray(r, dtype=float)
    L = np.log1p(r)
    h = discriminant(mu, r)
    s = np.sqrt(np.maximum(h, 0.0))
    big = mu * L + s
    real_branch = -2.0 * r * r / np.where(big > 0, big, 1.0)
    out = np.where(h >= 0, np.where(big > 0, real_branch, 0.0), -mu * L / 2.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class Threshold:
    """δ together with the radius and constants of the root-gap bounds.

    On ``[0, delta1]``::

        c log(1+r) <= λ+ - λ- <= d log(1+r)

    ``c1`` is the lower constant in ``c1 r <= log(1+r) <= d1 r`` on
    ``[0, delta]``.
    """

    mu: float
    delta: float
    delta1: float
    c: float
    d: float
    c1: float
    d1: float


def _f(mu, r):
    # μ log(1+r) - 2r, accurate near r = 0
    return (mu - 2.0) * r + mu * float(log1p_minus_x(r))


def threshold_delta(mu: float, delta1_fraction: float = 0.5, grid_points: int = 10_000) -> Threshold:
    """Unique positive root δ of ``μ log(1+δ) = 2δ`` for μ > 2.

    Bisection after bracketing ``[(μ-2)/2, R]`` with R doubled until the sign
    changes. ``delta1 = delta1_fraction * (μ/2 - 1)``; the fraction must lie in
    (0, 1] and equals 1 only at the degenerate end where ``c = 0``.
    """
    mu = _check_mu(mu)
    if mu <= 2:
        raise RegimeError("delta requires mu > 2")
    if not 0 < delta1_fraction <= 1:
        raise InvalidParameter("delta1_fraction must lie in (0, 1]")
    lo = (mu - 2.0) / 2.0
    hi = max(2.0 * lo, 1.0)
    while _f(mu, hi) >= 0:
        hi *= 2.0
    delta = bisect(lambda x: _f(mu, x), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    for probe, sign in ((delta * (1 - 1e-6), 1), (delta * (1 + 1e-6), -1)):
        if np.sign(_f(mu, probe)) != sign:
            raise ArithmeticError(f"bisection landed off the sign change for mu={mu}")

    delta1 = min(delta1_fraction * (mu / 2.0 - 1.0), delta)
    c = math.sqrt(max(mu * mu - 4.0 * (1.0 + delta1) ** 2, 0.0))
    grid = np.linspace(0.0, delta, grid_points)
    c1 = float(np.min(log1p_ratio(grid)))
    # log(1+r)/r <= 1 everywhere, so the proof's max(3/2, M) is 3/2
    d1 = max(1.5, float(np.max(log1p_ratio(grid))))
    return Threshold(mu=mu, delta=float(delta), delta1=float(delta1), c=c, d=mu, c1=c1, d1=d1)


@functools.lru_cache(maxsize=128)
def _cached_delta(mu: float) -> float:
    return threshold_delta(mu).delta


def energy_weight(mu: float, r):
    """Decay weight ``ρ(r) = μ r² L / (r² + μ² L²)`` with ``L = log(1+r)``."""
    r = np.asarray(r, dtype=float)
    L = np.log1p(r)
    denom = r * r + mu * mu * L * L
    out = np.where(denom > 0, mu * r * r * L / np.where(denom > 0, denom, 1.0), 0.0)
    return out[()] if out.ndim == 0 else out
