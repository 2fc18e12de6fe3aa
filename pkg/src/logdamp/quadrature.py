"""Adaptive radial quadrature for Fourier-side L² norms.

The integrator is a vectorised adaptive Gauss-Kronrod (7/15) scheme: all
live panels are evaluated in one call of the integrand, the panels whose
error share is too large are bisected, and the loop repeats until the
summed error estimate meets ``rel_tol * |value| + abs_tol``.

Integrands in this package concentrate at ``r ~ 1/t`` for large t, so
callers usually seed the panel set with geometrically graded breakpoints
(``geometric_breakpoints``) rather than relying on bisection to discover a
feature that no Kronrod node of the first panel can see.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .data import sphere_area
from .errors import DivergentIntegral, InvalidParameter, NoConvergence
from .model import _check_mu, slow_root

__all__ = [
    "QuadratureSpec",
    "IntegralResult",
    "integrate_radial",
    "geometric_breakpoints",
    "fourier_l2_squared",
    "l2_norm_fourier_side",
    "plancherel_factor",
    "truncation_radius",
    "lemma_integral",
    "Branch",
]

# Kronrod 15-point abscissae / weights and the embedded 7-point Gauss weights.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

_EPMACH = np.finfo(float).eps
_MAX_INITIAL_PANELS = 2_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    max_depth: int = 40
    points_per_period: int = 8
    envelope_eps: float = 1e-16
    max_panels: int = 200_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.envelope_eps > 0):
            raise InvalidParameter("tolerances must be positive")
        if self.max_depth < 1:
            raise InvalidParameter("max_depth must be at least 1")
        if self.max_panels < 1:
            raise InvalidParameter("max_panels must be at least 1")
        if self.points_per_period < 8:
            raise InvalidParameter("points_per_period must be >= 8")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    panels_used: int
    truncation_radius: float


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    k = half * (y @ _KW)
    g = half * (y @ _GW)
    resabs = np.abs(half) * (np.abs(y) @ _KW)
    mean = k / np.where(half != 0, 2.0 * half, 1.0)
    resasc = np.abs(half) * (np.abs(y - mean[:, None]) @ _KW)
    err = np.abs(k - g)
    # QUADPACK's rescaling of the raw Gauss/Kronrod difference
    scaled = np.where(
        (resasc != 0) & (err != 0),
        resasc * np.minimum(1.0, (200.0 * err / np.where(resasc != 0, resasc, 1.0)) ** 1.5),
        err,
    )
    floor = 50.0 * _EPMACH * resabs
    err = np.where(resabs > np.finfo(float).tiny / (50.0 * _EPMACH), np.maximum(floor, scaled), scaled)
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(err))):
        raise FloatingPointError("integrand produced non-finite values")
    return k, err


def geometric_breakpoints(lo: float, hi: float, levels: int = 60, factor: float = 2.0):
    """Edges ``lo + (hi-lo) factor^{-k}``, k = 0..levels, graded towards ``lo``."""
    k = np.arange(levels, -1, -1, dtype=float)
    return lo + (hi - lo) * factor ** (-k)


def integrate_radial(f, r_lo: float, r_hi: float, spec: QuadratureSpec | None = None,
                     freq_hint: float | None = None, breakpoints=None) -> IntegralResult:
    """Integrate a vectorised ``f`` over ``[r_lo, r_hi]``.

    ``freq_hint`` (an angular frequency Ω in r) caps the initial panel width
    at ``(2π/Ω) / points_per_period``. Raises :class:`NoConvergence` with the
    best estimate attached when a panel would exceed ``max_depth``.
    """
    spec = spec or QuadratureSpec()
    r_lo, r_hi = float(r_lo), float(r_hi)
    if not r_lo < r_hi:
        raise InvalidParameter(f"need r_lo < r_hi, got [{r_lo}, {r_hi}]")

    edges = {r_lo, r_hi}
    if breakpoints is not None:
        edges.update(float(b) for b in np.ravel(breakpoints) if r_lo < b < r_hi)
    edges = np.array(sorted(edges))
    if freq_hint:
        width = 2.0 * math.pi / abs(freq_hint) / spec.points_per_period
        pieces = []
        for a, b in zip(edges[:-1], edges[1:]):
            m = min(_MAX_INITIAL_PANELS, max(1, math.ceil((b - a) / width)))
            pieces.append(np.linspace(a, b, m + 1)[:-1])
        edges = np.append(np.concatenate(pieces), r_hi)

    a = edges[:-1].copy()
    b = edges[1:].copy()
    depth = np.zeros(a.size, dtype=int)
    val, err = _gk15(f, a, b)
    span = r_hi - r_lo

    while True:
        order = np.argsort(a, kind="stable")
        a, b, depth, val, err = a[order], b[order], depth[order], val[order], err[order]
        total = float(np.sum(val))
        total_err = float(np.sum(err))
        tol = spec.rel_tol * abs(total) + spec.abs_tol
        if total_err <= tol:
            return IntegralResult(total, total_err, int(a.size), r_hi)
        share = tol * (b - a) / span
        split = err > share
        if not np.any(split):
            split[np.argmax(err)] = True
        # a noisy integrand can keep every panel above its share forever
        if np.any(depth[split] >= spec.max_depth) or a.size + np.count_nonzero(split) > spec.max_panels:
            best = IntegralResult(total, total_err, int(a.size), r_hi)
            raise NoConvergence(
                f"quadrature did not reach tolerance within depth {spec.max_depth} "
                f"or {spec.max_panels} panels: value={total:.6g} error={total_err:.3g}",
                result=best,
            )
        keep = ~split
        sa, sb, sd = a[split], b[split], depth[split] + 1
        mid = 0.5 * (sa + sb)
        na = np.concatenate([sa, mid])
        nb = np.concatenate([mid, sb])
        nd = np.concatenate([sd, sd])
        nv, ne = _gk15(f, na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        depth = np.concatenate([depth[keep], nd])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def plancherel_factor(dim: int) -> float:
    """Converts ``∫ |ĝ(r)|² r^{n-1} dr`` into ``‖g‖²``: ``ω_n / (2π)^n``."""
    return sphere_area(dim) / (2.0 * math.pi) ** dim


def _auto_radius_integral(integrand, spec, freq_hint):
    pieces = []
    lo, hi = 0.0, 1.0
    total = 0.0
    err = 0.0
    panels = 0
    while True:
        res = integrate_radial(integrand, lo, hi, spec, freq_hint)
        pieces.append(res.value)
        total += res.value
        err += res.error_estimate
        panels += res.panels_used
        if abs(res.value) <= spec.envelope_eps * abs(total) or hi >= 2.0 ** 60:
            return IntegralResult(math.fsum(pieces), err, panels, hi)
        lo, hi = hi, 2.0 * hi


def fourier_l2_squared(g, dim: int, spec: QuadratureSpec | None = None, freq_hint: float | None = None,
                       r_max: float | None = None, breakpoints=None, r_min: float = 0.0) -> IntegralResult:
    """``∫_{r_min}^{r_max} |g(r)|² r^{n-1} dr`` (radial part only)."""
    spec = spec or QuadratureSpec()

    def integrand(r):
        v = np.asarray(g(r))
        return (v.real ** 2 + v.imag ** 2) * r ** (dim - 1)

    if r_max is None:
        if r_min != 0.0:
            raise InvalidParameter("automatic radius requires r_min = 0")
        return _auto_radius_integral(integrand, spec, freq_hint)
    if r_max <= r_min:
        return IntegralResult(0.0, 0.0, 0, r_max)
    return integrate_radial(integrand, r_min, r_max, spec, freq_hint, breakpoints)


def l2_norm_fourier_side(g, dim: int, spec: QuadratureSpec | None = None, freq_hint: float | None = None,
                         r_max: float | None = None, breakpoints=None) -> float:
    """Physical-space ``‖u‖₂`` of a radial function given its transform ``g``.

    ``(2π)^{-n/2} sqrt(ω_n ∫ |g(r)|² r^{n-1} dr)``; without ``r_max`` the
    radius is doubled until the last shell is below ``envelope_eps`` of the
    running total.
    """
    res = fourier_l2_squared(g, dim, spec, freq_hint, r_max, breakpoints)
    return math.sqrt(max(res.value, 0.0) * plancherel_factor(dim))


def _log_envelope(mu, t, dim, r):
    # log of e^{2t Re λ+(r)} r^{n+1}; equals log((1+r)^{-μt} r^{n+1}) off the real branch
    r = np.asarray(r, dtype=float)
    return 2.0 * t * slow_root(mu, r) + (dim + 1) * np.log(r)


def truncation_radius(mu: float, t: float, envelope_eps: float = 1e-16, dim: int = 1,
                      relative: bool = False) -> float:
    """Smallest R past the envelope peak with ``envelope(R) < envelope_eps``.

    The envelope is ``e^{2t Re λ+(r)} r^{n+1}``, which is
    ``(1+r)^{-μt} r^{n+1}`` whenever the roots are complex. With
    ``relative=True`` the threshold is ``envelope_eps`` times the envelope
    maximum. Returns ``inf`` if the envelope has not dropped below the
    threshold by ``r = 1e12``.
    """
    mu = _check_mu(mu)
    if t < 1:
        raise InvalidParameter("truncation_radius needs t >= 1")
    grid = np.logspace(-12, 12, 24 * 16 + 1)
    env = _log_envelope(mu, t, dim, grid)
    log_eps = math.log(envelope_eps)
    if relative:
        k = int(np.argmax(env))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, grid.size - 1)]
        best = minimize_scalar(lambda s: -float(_log_envelope(mu, t, dim, math.exp(s))),
                               bounds=(math.log(lo), math.log(hi)), method="bounded")
        log_eps += max(float(env[k]), -best.fun)
    above = np.nonzero(env >= log_eps)[0]
    if above.size == 0:
        return float(grid[int(np.argmax(env))])
    last = int(above[-1])
    if last == grid.size - 1:
        return math.inf
    phi = lambda s: float(_log_envelope(mu, t, dim, math.exp(s))) - log_eps
    s = brentq(phi, math.log(grid[last]), math.log(grid[last + 1]), xtol=1e-14)
    return math.exp(s)


class Branch:
    LOW = "low"
    HIGH = "high"


def _check_branch(branch):
    b = str(branch).lower()
    if b not in (Branch.LOW, Branch.HIGH):
        raise InvalidParameter(f"branch must be 'low' or 'high', got {branch!r}")
    return b


def lemma_integral(p: float, mu: float, delta: float, t: float, branch: str = Branch.LOW,
                   spec: QuadratureSpec | None = None, log: bool = False) -> float:
    """``∫_0^δ (1+r)^{-μt} r^p dr`` (low) or ``∫_δ^∞ (1+r)^{-μt} r^p dr`` (high).

    With ``log=True`` the natural log of the integral is returned; the high
    branch is evaluated relative to its value at ``r = δ`` so the log stays
    finite long after the integral itself underflows.
    """
    mu = _check_mu(mu)
    branch = _check_branch(branch)
    spec = spec or QuadratureSpec(abs_tol=1e-300)
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    if t < 0:
        raise InvalidParameter("t must be nonnegative")
    rate = mu * t

    if branch == Branch.LOW:
        if p <= -1:
            raise DivergentIntegral(f"low-branch integral diverges at r = 0 for p = {p}")
        q = p + 1.0
        if p < 0:
            # s = r^{p+1} removes the endpoint singularity
            top = delta ** q
            integrand = lambda s: np.exp(-rate * np.log1p(s ** (1.0 / q))) / q
            res = integrate_radial(integrand, 0.0, top, spec, breakpoints=geometric_breakpoints(0.0, top))
        else:
            # Kronrod nodes are interior, so r > 0 here
            integrand = lambda r: np.exp(-rate * np.log1p(r)) * r ** p
            res = integrate_radial(integrand, 0.0, delta, spec, breakpoints=geometric_breakpoints(0.0, delta))
        if log:
            return math.log(res.value) if res.value > 0 else -math.inf
        return res.value

    if rate <= p + 1:
        raise DivergentIntegral(f"high-branch integral diverges for mu*t = {rate} <= p + 1")
    l_delta = math.log1p(delta)
    log_scale = -rate * l_delta + p * math.log(delta)
    rel = lambda r: -rate * (np.log1p(r) - l_delta) + p * (np.log(r) - math.log(delta))
    target = math.log(spec.envelope_eps)
    hi = 2.0 * delta
    while rel(hi) > target:
        hi *= 2.0
        if hi > 1e300:
            raise DivergentIntegral("high-branch envelope does not decay")
    # rel starts at 0 > target and is unimodal, so it crosses target once
    top = brentq(lambda r: rel(r) - target, delta, hi) if rel(delta) > target else hi
    res = integrate_radial(lambda r: np.exp(rel(r)), delta, top, spec,
                           breakpoints=geometric_breakpoints(delta, top))
    if log:
        return log_scale + math.log(res.value)
    return math.exp(log_scale) * res.value
