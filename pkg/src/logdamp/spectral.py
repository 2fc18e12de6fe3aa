"""Exact Fourier-side solution, asymptotic profiles and an RK4 oracle.

The mode ``w(t, r)`` with data ``(w0, w1)`` is ``C w0 + S w1`` where, with
``a = μ log(1+r) t/2`` and ``D = λ+ - λ-``,

    S = e^{-a} t sinhc(D t/2),
    C = e^{-a} [cosh(D t/2) + a sinhc(D t/2)].

D is real below the threshold (μ > 2) and purely imaginary elsewhere, so
both branches reduce to real arithmetic on ``x = |D| t/2``. On the real
branch the exponentials are regrouped around ``λ+ t`` so neither factor
overflows when ``a`` is large.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import DataPair
from .errors import InvalidParameter, RegimeError
from .model import Regime, _check_mu, classify, discriminant, log1p_ratio, slow_root, threshold_delta

__all__ = [
    "Propagators",
    "ProfileKind",
    "sinhc",
    "propagators",
    "scaled_propagators",
    "eval_what",
    "profile",
    "profile_kind_for",
    "ode_oracle",
    "ode_oracle_series",
    "default_dt",
    "UNDERFLOW_EXPONENT",
]

UNDERFLOW_EXPONENT = 700.0
_SINHC_SERIES = 1e-4
_MAX_STEPS = 10 ** 9


def sinhc(z):
    """``sinh(z)/z`` with the removable singularity at 0 filled in.

    Purely imaginary arguments go through ``sin(y)/y``.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SINHC_SERIES
    z2 = z * z
    out[small] = 1.0 + z2[small] / 6.0 + z2[small] * z2[small] / 120.0
    imag_axis = ~small & (z.real == 0)
    y = z.imag[imag_axis]
    out[imag_axis] = np.sin(y) / y
    rest = ~small & ~imag_axis
    out[rest] = np.sinh(z[rest]) / z[rest]
    return out[()] if out.ndim == 0 else out


def _expm1_ratio(y):
    # (1 - e^{-y}) / y for y >= 0, equal to 1 at y = 0
    y = np.asarray(y, dtype=float)
    safe = np.where(y > 0, y, 1.0)
    return np.where(y > 0, -np.expm1(-safe) / safe, 1.0)


def scaled_propagators(mu: float, r, t):
    """Return ``(C~, S~, log_scale)`` with ``C = C~ e^{log_scale}``.

    ``log_scale`` is ``λ+ t`` on the real branch and ``-a`` on the complex
    branch, i.e. the exact decay exponent of the slower mode.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    L = np.log1p(r)
    h = discriminant(mu, r)
    a = mu * L * t / 2.0
    real = h >= 0
    x = np.sqrt(np.abs(h)) * t / 2.0

    eps2 = _expm1_ratio(2.0 * np.where(real, x, 0.0))
    c_real = 0.5 * (1.0 + np.exp(-2.0 * np.where(real, x, 0.0))) + a * eps2
    s_real = t * eps2

    y = np.where(real, 0.0, x)
    sc = np.sinc(y / math.pi)
    c_cplx = np.cos(y) + a * sc
    s_cplx = t * sc

    log_scale = np.where(real, slow_root(mu, r) * t, -a)
    return np.where(real, c_real, c_cplx), np.where(real, s_real, s_cplx), log_scale


@dataclass(frozen=True)
class Propagators:
    C: np.ndarray | float
    S: np.ndarray | float
    underflow: np.ndarray | bool


def propagators(mu: float, r, t) -> Propagators:
    mu = _check_mu(mu)
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(r < 0) or np.any(t < 0):
        raise InvalidParameter("r and t must be nonnegative")
    c, s, log_scale = scaled_propagators(mu, r, t)
    under = log_scale < -UNDERFLOW_EXPONENT
    scale = np.exp(np.where(under, 0.0, log_scale))
    C = np.where(under, 0.0, c * scale)
    S = np.where(under, 0.0, s * scale)
    if C.ndim == 0:
        return Propagators(float(C), float(S), bool(under))
    return Propagators(C, S, under)


def eval_what(pair: DataPair, mu: float, r, t, return_flag: bool = False):
    """ŵ(t, r) = C û0(r) + S û1(r)."""
    p = propagators(mu, r, t)
    w = np.asarray(p.C * pair.u0.hat(r) + p.S * pair.u1.hat(r), dtype=complex)
    w = w[()] if w.ndim == 0 else w
    if return_flag:
        return w, p.underflow
    return w


class ProfileKind(enum.Enum):
    CHI_NON_EFFECTIVE = "chi"
    NU_CRITICAL = "nu-critical"
    NU_EFFECTIVE = "nu-effective"


_KIND_FOR = {
    Regime.NON_EFFECTIVE: ProfileKind.CHI_NON_EFFECTIVE,
    Regime.CRITICAL: ProfileKind.NU_CRITICAL,
    Regime.EFFECTIVE: ProfileKind.NU_EFFECTIVE,
}


def profile_kind_for(mu: float) -> ProfileKind:
    return _KIND_FOR[classify(mu)]


def profile(kind: ProfileKind, p1: float, mu: float, r, t, delta: float | None = None):
    """Leading term of ŵ as t → ∞, proportional to ``p1``.

    ``delta`` may be passed for the effective profile to skip re-solving
    the threshold equation.
    """
    mu = _check_mu(mu)
    if profile_kind_for(mu) is not kind:
        raise RegimeError(f"profile {kind.value} is not admissible for mu={mu}")
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    L = np.log1p(r)

    if kind is ProfileKind.CHI_NON_EFFECTIVE:
        gam = math.sqrt(4.0 - mu * mu) / 2.0
        g = log1p_ratio(r)
        shape = 2.0 * gam / np.sqrt(4.0 - (mu * g) ** 2)
        out = p1 * t * np.exp(-mu * L * t / 2.0) * np.sinc(gam * t * r / math.pi) * shape
    elif kind is ProfileKind.NU_CRITICAL:
        # r² - log²(1+r) = -h/4 at μ = 2
        root = np.sqrt(np.maximum(-discriminant(2.0, r) / 4.0, 0.0))
        out = p1 * t * np.exp(-t * L) * np.sinc(t * root / math.pi)
    else:
        if delta is None:
            delta = threshold_delta(mu).delta
        c, s, log_scale = scaled_propagators(mu, r, t)
        out = np.where(r < delta, p1 * s * np.exp(log_scale), 0.0)
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def default_dt(r: float) -> float:
    return min(1e-3, 0.05 / max(r, 1.0))


def _rk4_segment(w, v, k2, damp, h, steps):
    # w'' + damp w' + k2 w = 0 as the first-order system (w, v)
    for _ in range(steps):
        a1w, a1v = v, -k2 * w - damp * v
        w2, v2 = w + 0.5 * h * a1w, v + 0.5 * h * a1v
        a2w, a2v = v2, -k2 * w2 - damp * v2
        w3, v3 = w + 0.5 * h * a2w, v + 0.5 * h * a2v
        a3w, a3v = v3, -k2 * w3 - damp * v3
        w4, v4 = w + h * a3w, v + h * a3v
        a4w, a4v = v4, -k2 * w4 - damp * v4
        w = w + h / 6.0 * (a1w + 2.0 * a2w + 2.0 * a3w + a4w)
        v = v + h / 6.0 * (a1v + 2.0 * a2v + 2.0 * a3v + a4v)
    return w, v


def ode_oracle_series(pair: DataPair, mu: float, r: float, t_marks, dt: float | None = None,
                      return_velocity: bool = False):
    """Classical RK4 on the mode equation, sampled at increasing ``t_marks``.

    Each gap between marks is split into equal steps no longer than ``dt``.
    ``mu = 0`` is accepted and switches the damping off.
    """
    mu = float(mu)
    if mu < 0:
        raise InvalidParameter("mu must be nonnegative for the oracle")
    r = float(r)
    if dt is None:
        dt = default_dt(r)
    if not dt > 0:
        raise InvalidParameter("dt must be positive")
    marks = [float(t) for t in t_marks]
    if any(b < a for a, b in zip(marks, marks[1:])) or (marks and marks[0] < 0):
        raise InvalidParameter("t_marks must be nonnegative and nondecreasing")
    if marks and marks[-1] / dt > _MAX_STEPS:
        raise OverflowError(f"t_end/dt exceeds {_MAX_STEPS} steps")

    w = complex(pair.u0.hat(r))
    v = complex(pair.u1.hat(r))
    k2 = r * r
    damp = mu * math.log1p(r)
    now = 0.0
    out = []
    for tm in marks:
        gap = tm - now
        if gap > 0:
            steps = max(1, math.ceil(gap / dt - 1e-9))
            w, v = _rk4_segment(w, v, k2, damp, gap / steps, steps)
        now = tm
        out.append((w, v) if return_velocity else w)
    return out


def ode_oracle(pair: DataPair, mu: float, r: float, t_end: float, dt: float | None = None,
               return_velocity: bool = False):
    """w(t_end) from RK4; global error O(dt⁴)."""
    return ode_oracle_series(pair, mu, r, [t_end], dt, return_velocity)[0]
