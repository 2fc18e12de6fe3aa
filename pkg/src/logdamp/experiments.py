"""Time series of solution norms, log-log rate fits and pass/fail verdicts.

All norms are physical-space L² norms obtained from the Fourier side by
Plancherel. For large t the integrands live on ``r ~ 1/t``, so every
integral is cut at the relative envelope radius (or the datum's decay
radius, whichever is smaller) and the panels are graded towards r = 0.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .data import DataPair, gaussian_datum, zero_datum, zero_mean_datum
from .errors import CannotFit, InvalidParameter, NoConvergence, RegimeError
from .model import Regime, _check_mu, classify, discriminant, slow_root, threshold_delta
from .quadrature import (
    QuadratureSpec,
    fourier_l2_squared,
    geometric_breakpoints,
    plancherel_factor,
    truncation_radius,
)
from .spectral import eval_what, profile, profile_kind_for, propagators, scaled_propagators

__all__ = [
    "TimeGrid",
    "RateFit",
    "Verdict",
    "fit_loglog",
    "default_pair",
    "solution_norm",
    "profile_difference_norm",
    "tail_log_norm",
    "solution_norm_series",
    "run_profile_convergence",
    "run_solution_norm_rates",
    "run_zero_mean",
    "run_root_gap_bounds",
    "run_regime_comparison",
    "run_singularity_probe",
    "naive_sine_propagator",
    "branch_free_sine",
    "verify_all",
    "max_workers",
]

NORM_SPEC = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-300)
WITHIN, AT_MOST, AT_LEAST = "within", "at_most", "at_least"


@dataclass(frozen=True)
class TimeGrid:
    t_min: float = 1e2
    t_max: float = 1e4
    count: int = 20

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max and math.isfinite(self.t_max)):
            raise InvalidParameter("time grid needs 0 < t_min < t_max")
        if isinstance(self.count, bool) or int(self.count) != self.count or self.count < 5:
            raise InvalidParameter("time grid needs an integer count >= 5")
        object.__setattr__(self, "count", int(self.count))

    def points(self) -> np.ndarray:
        k = np.arange(self.count)
        q = (self.t_max / self.t_min) ** (1.0 / (self.count - 1))
        pts = self.t_min * q ** k
        pts[-1] = self.t_max
        return pts


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    max_residual: float
    window: TimeGrid


@dataclass(frozen=True, eq=False)
class Verdict:
    """Outcome of one check.

    ``mode`` selects the comparison: ``within`` is ``|measured - expected| <=
    tolerance``, ``at_most`` is ``measured <= expected + tolerance`` and
    ``at_least`` is ``measured >= expected - tolerance``. ``columns`` holds
    extra series aligned with ``series`` and ``companions`` any sub-checks
    that must also pass.
    """

    name: str
    expected: float
    measured: float
    tolerance: float
    passed: bool
    series: tuple = ()
    mode: str = WITHIN
    columns: dict = field(default_factory=dict)
    companions: tuple = ()
    fit: RateFit | None = None
    note: str = ""

    @property
    def all_passed(self) -> bool:
        return self.passed and all(c.all_passed for c in self.companions)

    def flatten(self) -> list["Verdict"]:
        out = [self]
        for c in self.companions:
            out.extend(c.flatten())
        return out


def _judge(mode, measured, expected, tol):
    if not math.isfinite(measured):
        return False
    if mode == WITHIN:
        return abs(measured - expected) <= tol
    if mode == AT_MOST:
        return measured <= expected + tol
    if mode == AT_LEAST:
        return measured >= expected - tol
    raise InvalidParameter(f"unknown verdict mode {mode!r}")


def make_verdict(name, expected, measured, tolerance, mode=WITHIN, **kw) -> Verdict:
    measured = float(measured)
    return Verdict(name, float(expected), measured, float(tolerance),
                   _judge(mode, measured, expected, tolerance), mode=mode, **kw)


def _as_arrays(series):
    pts = list(series)
    t = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    return t, y


def fit_loglog(series) -> RateFit:
    """Least squares of ``log y`` against ``log t``."""
    t, y = _as_arrays(series)
    if t.size < 5:
        raise CannotFit(f"need at least 5 points, got {t.size}")
    if not np.all(np.isfinite(y)) or np.any(y <= 0) or np.any(t <= 0):
        raise CannotFit("log-log fit needs positive finite t and y")
    lt, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lt, ly, 1)
    resid = ly - (slope * lt + intercept)
    window = TimeGrid(float(t.min()), float(t.max()), int(t.size)) if t.min() < t.max() else None
    return RateFit(float(slope), float(intercept), float(np.max(np.abs(resid))), window)


def _fit_linear(t, y):
    # y against t, residual as a fraction of the data range
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    span = float(np.max(y) - np.min(y))
    return float(slope), float(np.max(np.abs(resid))) / span if span > 0 else math.inf


# norm evaluation ----------------------------------------------------------------

def default_pair(dim: int, data_key: str | None = None) -> DataPair:
    """u0 = u1 = exp(-|x|²) unless a catalog key overrides u1 (and u0)."""
    if data_key is None:
        g = gaussian_datum(1.0, 1.0, dim)
        return DataPair(g, g)
    from .data import parse_data_key

    d = parse_data_key(data_key, dim)
    return DataPair(d, d)


def _radius(pair: DataPair, mu: float, t: float, spec: QuadratureSpec) -> float:
    data_r = max(pair.u0.decay_radius(spec.envelope_eps), pair.u1.decay_radius(spec.envelope_eps))
    if t < 1:
        return data_r
    env_r = truncation_radius(mu, t, spec.envelope_eps, pair.dim, relative=True)
    return min(env_r, data_r)


def _breaks(lo, hi, extra=()):
    pts = list(geometric_breakpoints(lo, hi)) + [e for e in extra if lo < e < hi]
    return np.array(sorted(pts))


def _integrate(fn, pair, lo, hi, t, spec, extra=()):
    try:
        return fourier_l2_squared(fn, pair.dim, spec, freq_hint=max(t, 1.0), r_max=hi,
                                  breakpoints=_breaks(lo, hi, extra), r_min=lo).value
    except NoConvergence as exc:
        raise NoConvergence(f"{exc} (t={t:g})", result=exc.result, t=t) from None


def _delta_or_none(mu):
    return threshold_delta(mu).delta if classify(mu) is Regime.EFFECTIVE else None


def solution_norm(pair: DataPair, mu: float, t: float, spec: QuadratureSpec | None = None) -> float:
    """‖u(t,·)‖₂."""
    mu = _check_mu(mu)
    spec = spec or NORM_SPEC
    R = _radius(pair, mu, t, spec)
    if R <= 0:
        return 0.0
    delta = _delta_or_none(mu)
    val = _integrate(lambda r: eval_what(pair, mu, r, t), pair, 0.0, R, t, spec,
                     (delta,) if delta else ())
    return math.sqrt(max(val, 0.0) * plancherel_factor(pair.dim))


def profile_difference_norm(pair: DataPair, mu: float, t: float, spec: QuadratureSpec | None = None,
                            delta: float | None = None) -> float:
    """‖ŵ - profile‖ over all r (μ ≤ 2) or over r ≤ δ (μ > 2), Plancherel-scaled."""
    mu = _check_mu(mu)
    spec = spec or NORM_SPEC
    kind = profile_kind_for(mu)
    if delta is None:
        delta = _delta_or_none(mu)
    R = _radius(pair, mu, t, spec)
    if delta is not None:
        R = min(R, delta)
    p1 = pair.p1

    def diff(r):
        return eval_what(pair, mu, r, t) - profile(kind, p1, mu, r, t, delta=delta)

    val = _integrate(diff, pair, 0.0, R, t, spec)
    return math.sqrt(max(val, 0.0) * plancherel_factor(pair.dim))


def tail_log_norm(pair: DataPair, mu: float, t: float, spec: QuadratureSpec | None = None,
                  delta: float | None = None) -> float:
    """Natural log of ‖ŵ(t,·)‖ over r ≥ δ (μ > 2), Plancherel-scaled.

    The integrand is rescaled by ``e^{μ t log(1+δ)}`` so the log stays finite
    long after the norm itself underflows.
    """
    mu = _check_mu(mu)
    if classify(mu) is not Regime.EFFECTIVE:
        raise RegimeError("the r >= delta tail is only defined for mu > 2")
    spec = spec or NORM_SPEC
    if delta is None:
        delta = threshold_delta(mu).delta
    n = pair.dim
    ref = -mu * math.log1p(delta) * t / 2.0
    log_eps = math.log(spec.envelope_eps)

    def log_env(r):
        return -mu * t * (math.log1p(r) - math.log1p(delta)) + (n + 1) * math.log(r / delta)

    hi = 2.0 * delta
    while log_env(hi) > log_eps and hi < 1e15:
        hi *= 2.0
    R = brentq(lambda r: log_env(r) - log_eps, delta, hi) if log_env(hi) <= log_eps else hi
    R = min(R, max(pair.u0.decay_radius(spec.envelope_eps), pair.u1.decay_radius(spec.envelope_eps)))
    if R <= delta:
        return -math.inf

    def g(r):
        c, s, ls = scaled_propagators(mu, r, t)
        return (c * pair.u0.hat(r) + s * pair.u1.hat(r)) * np.exp(ls - ref)

    val = _integrate(g, pair, delta, R, t, spec)
    if val <= 0:
        return -math.inf
    return ref + 0.5 * math.log(val * plancherel_factor(n))


# concurrency ---------------------------------------------------------------------

def max_workers() -> int:
    raw = os.environ.get("LOGDAMP_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        k = int(raw)
    except ValueError:
        raise InvalidParameter(f"LOGDAMP_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise InvalidParameter(f"LOGDAMP_THREADS must be a positive integer, got {raw!r}")
    return k


def _map(fn, ts):
    ts = list(ts)
    workers = min(max_workers(), len(ts)) or 1
    if workers == 1:
        return [fn(t) for t in ts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ts))


def solution_norm_series(pair: DataPair, mu: float, grid: TimeGrid | None = None,
                         spec: QuadratureSpec | None = None) -> tuple:
    grid = grid or TimeGrid()
    ts = grid.points()
    ys = _map(lambda t: solution_norm(pair, mu, float(t), spec), ts)
    return tuple(zip(ts.tolist(), ys))


# experiments ---------------------------------------------------------------------

def _require_p1(pair):
    if pair.p1 == 0:
        raise InvalidParameter("this experiment needs data with P1 != 0")


def _check_dim(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameter(f"dimension must be an integer >= 1, got {n!r}")
    return int(n)


def run_profile_convergence(n: int, mu: float, pair: DataPair | None = None, grid: TimeGrid | None = None,
                            tol: float = 0.1, tail_tol: float = 0.05,
                            spec: QuadratureSpec | None = None) -> Verdict:
    """Slope of ‖ŵ - profile‖ against -n/2.

    For μ > 2 the difference is taken over r ≤ δ and the r ≥ δ tail is a
    companion check: ``log ‖tail‖`` must be linear in t (residual below
    ``tail_tol`` of its range) with a negative slope.
    """
    n = _check_dim(n)
    mu = _check_mu(mu)
    pair = pair or default_pair(n)
    if pair.dim != n:
        raise InvalidParameter("pair dimension does not match n")
    _require_p1(pair)
    grid = grid or TimeGrid()
    ts = grid.points()
    delta = _delta_or_none(mu)

    def one(t):
        t = float(t)
        row = [solution_norm(pair, mu, t, spec), profile_difference_norm(pair, mu, t, spec, delta)]
        if delta is not None:
            row.append(tail_log_norm(pair, mu, t, spec, delta))
        return row

    rows = _map(one, ts)
    values = [r[0] for r in rows]
    diffs = [r[1] for r in rows]
    series = tuple(zip(ts.tolist(), diffs))
    fit = fit_loglog(series)
    columns = {"value": values, "profile_diff": diffs}
    companions = ()
    label = f"profile n={n} mu={mu:g}"
    if delta is not None:
        logs = np.array([r[2] for r in rows])
        columns["tail_norm"] = np.exp(logs).tolist()
        columns["tail_log_norm"] = logs.tolist()
        if np.all(np.isfinite(logs)):
            rate, frac = _fit_linear(ts, logs)
        else:
            rate, frac = math.nan, math.inf
        companions = (
            make_verdict(f"{label} tail log-linear residual", 0.0, frac, tail_tol, AT_MOST,
                         series=tuple(zip(ts.tolist(), logs.tolist())),
                         note="max |residual| of log tail vs t, as a fraction of its range"),
            make_verdict(f"{label} tail decay rate", 0.0, rate, 0.0, AT_MOST,
                         note="slope of log tail vs t; exponential decay needs it negative"),
        )
    return make_verdict(label, -n / 2.0, fit.slope, tol, WITHIN, series=series, columns=columns,
                        companions=companions, fit=fit)


def _band_ratio(series):
    # largest max/min over windows [t_i, t_j] with t_j the first point >= 10 t_i
    t, y = _as_arrays(series)
    worst = math.nan
    for i in range(t.size):
        later = np.nonzero(t >= 10.0 * t[i] * (1 - 1e-12))[0]
        if later.size == 0:
            break
        seg = y[i:later[0] + 1]
        ratio = float(seg.max() / seg.min())
        worst = ratio if math.isnan(worst) else max(worst, ratio)
    return worst


def run_solution_norm_rates(n: int, mu: float, pair: DataPair | None = None, grid: TimeGrid | None = None,
                            tol: float = 0.05, residual_tol: float = 0.15, band: float = 3.0,
                            spec: QuadratureSpec | None = None) -> Verdict:
    """Slope of ‖u(t)‖ against 1 - n/2, with a log-log residual check.

    For n = 2 the slope window is [-tol, tol] and a band check
    (max/min over a decade ≤ ``band``) is added.
    """
    n = _check_dim(n)
    mu = _check_mu(mu)
    pair = pair or default_pair(n)
    if pair.dim != n:
        raise InvalidParameter("pair dimension does not match n")
    _require_p1(pair)
    series = solution_norm_series(pair, mu, grid, spec)
    fit = fit_loglog(series)
    label = f"rates n={n} mu={mu:g}"
    companions = [make_verdict(f"{label} log-log residual", 0.0, fit.max_residual, residual_tol, AT_MOST)]
    if n == 2:
        companions.append(make_verdict(f"{label} decade band max/min", 1.0, _band_ratio(series),
                                       band - 1.0, AT_MOST))
    return make_verdict(label, 1.0 - n / 2.0, fit.slope, tol, WITHIN, series=series,
                        columns={"value": [y for _, y in series]}, companions=tuple(companions), fit=fit)


def run_zero_mean(n: int, mu: float, grid: TimeGrid | None = None, a: float = 1.0, b: float = 2.0,
                  tol: float = 0.1, spec: QuadratureSpec | None = None) -> Verdict:
    """u0 = 0, u1 = zero-mean datum; slope of ‖u(t)‖ must be at most -n/2 + tol."""
    n = _check_dim(n)
    mu = _check_mu(mu)
    pair = DataPair(zero_datum(n), zero_mean_datum(a, b, n))
    series = solution_norm_series(pair, mu, grid, spec)
    fit = fit_loglog(series)
    return make_verdict(f"zero-mean n={n} mu={mu:g}", -n / 2.0, fit.slope, tol, AT_MOST, series=series,
                        columns={"value": [y for _, y in series]}, fit=fit)


def root_gap_slacks(mu: float, points: int = 10_000, delta1_fraction: float = 0.5):
    """Slack of every inequality in the three root-gap chains on ``[0, δ₁]``.

    Returns ``(r, slacks)`` with ``slacks`` of shape (8, points); each row is
    ``right - left`` of one inequality and must be nonnegative.
    """
    th = threshold_delta(mu, delta1_fraction)
    r = np.linspace(0.0, th.delta1, points)
    L = np.log1p(r)
    gap = np.sqrt(np.maximum(discriminant(mu, r), 0.0))
    lam_plus = slow_root(mu, r)
    two_lam_minus = -(mu * L + gap)
    # r²/L = r / (L/r), zero at r = 0
    ratio = np.where(r > 0, L / np.where(r > 0, r, 1.0), 1.0)
    r2_over_L = r / ratio
    d2 = 2.0 / (mu * th.d1)
    slacks = np.array([
        gap - th.c * L,                                   # (1) c L <= λ+ - λ-
        th.d * L - gap,                                   # (1) λ+ - λ- <= d L
        2.0 * r2_over_L / mu - d2 * r,                    # (2) d2 r <= 2r²/(μL)
        -2.0 * lam_plus - 2.0 * r2_over_L / mu,           # (2) 2r²/(μL) <= -2λ+
        4.0 * r2_over_L / mu + 2.0 * lam_plus,            # (2) -2λ+ <= 4r²/(μL)
        4.0 * r / (th.c1 * mu) - 4.0 * r2_over_L / mu,    # (2) 4r²/(μL) <= 4r/(c1 μ)
        two_lam_minus + 2.0 * mu * L,                     # (3) -2μL <= 2λ-
        -mu * L - two_lam_minus,                          # (3) 2λ- <= -μL
    ])
    return r, slacks


def run_root_gap_bounds(mu: float, points: int = 10_000, slack: float = 1e-12,
                        delta1_fraction: float = 0.5) -> Verdict:
    mu = _check_mu(mu)
    if classify(mu) is not Regime.EFFECTIVE:
        raise RegimeError("root-gap bounds require mu > 2")
    r, s = root_gap_slacks(mu, points, delta1_fraction)
    worst = s.min(axis=0)
    return make_verdict(f"root-gap bounds mu={mu:g}", 0.0, float(worst.min()), slack, AT_LEAST,
                        series=tuple(zip(r.tolist(), worst.tolist())),
                        note="minimum slack over the three chains; series is (r, slack)")


def run_regime_comparison(n: int, pair: DataPair | None = None, grid: TimeGrid | None = None,
                          mus=(1.0, 2.0, 4.0), tol: float = 0.1,
                          spec: QuadratureSpec | None = None) -> Verdict:
    """Norm slopes for several μ must agree pairwise within ``tol``."""
    n = _check_dim(n)
    pair = pair or default_pair(n)
    _require_p1(pair)
    fits = []
    columns = {}
    for mu in mus:
        series = solution_norm_series(pair, mu, grid, spec)
        fits.append(fit_loglog(series))
        columns[f"mu={mu:g}"] = [y for _, y in series]
    slopes = [f.slope for f in fits]
    spread = max(slopes) - min(slopes)
    ts = (grid or TimeGrid()).points().tolist()
    return make_verdict(f"regime comparison n={n}", 0.0, spread, tol, AT_MOST,
                        series=tuple(zip(ts, columns[f"mu={mus[0]:g}"])), columns=columns,
                        note="slopes " + ", ".join(f"mu={m:g}: {s:.4f}" for m, s in zip(mus, slopes)))


def naive_sine_propagator(mu: float, r: float, t: float) -> complex:
    """``(e^{λ+ t} - e^{λ- t}) / (λ+ - λ-)`` straight from the quadratic formula.

    The discriminant is expanded as ``μ²L² - 4r²`` and the roots are
    subtracted, exactly what the stable form avoids.
    """
    L = math.log1p(r)
    s = np.sqrt(complex(mu * mu * L * L - 4.0 * r * r))
    lp = (-mu * L + s) / 2.0
    lm = (-mu * L - s) / 2.0
    return complex((np.exp(lp * t) - np.exp(lm * t)) / (lp - lm))


_SERIES_Z2_MAX = 30.0


def branch_free_sine(mu: float, r: float, t: float, scaled: bool = False) -> float | None:
    """S from one formula valid on both sides of δ, or None if out of range.

    ``sinhc(z)`` is an entire function of ``z² = h t²/4``; its Taylor series
    needs no branch choice. Beyond ``|z²| = 30`` the alternating series
    loses too many digits and None is returned. ``scaled=True`` drops the
    factor ``e^{-a}``, ``a = μ log(1+r) t/2``.
    """
    z2 = float(discriminant(mu, r)) * t * t / 4.0
    if abs(z2) > _SERIES_Z2_MAX:
        return None
    term = total = 1.0
    k = 0
    while abs(term) > 1e-18 * abs(total):
        k += 1
        term *= z2 / ((2 * k) * (2 * k + 1))
        total += term
    if scaled:
        return t * total
    return t * math.exp(-mu * math.log1p(r) * t / 2.0) * total


def run_singularity_probe(mu: float, t_list=(50.0,), ks=range(2, 8), jump_tol: float = 1e-8,
                          naive_min_error: float = 1e-4) -> Verdict:
    """Continuity of S across r = δ and the error of the naive form next to it.

    S is sampled at ``δ`` and ``δ ± 10^{-k}``. The jump is the largest
    relative deviation of the branch-switched stable S from the branch-free
    series (see :func:`branch_free_sine`) over those samples, so any seam
    introduced at δ shows up directly. A companion records the naive form's
    relative error at ``r = δ(1 + 1e-7)``, which the check expects to exceed
    ``naive_min_error``.
    """
    mu = _check_mu(mu)
    if classify(mu) is not Regime.EFFECTIVE:
        raise RegimeError("singularity probe requires mu > 2 (no real delta)")
    delta = threshold_delta(mu).delta
    radii = [delta] + [delta + sgn * 10.0 ** -k for k in ks for sgn in (-1.0, 1.0)]
    jumps = []
    naive_errs = []
    for t in t_list:
        worst = math.nan
        for r in radii:
            ref = branch_free_sine(mu, r, t, scaled=True)
            if ref is None or ref == 0:
                continue
            # compare e^{a} S so the check survives underflow of S itself
            _, s_tilde, log_scale = scaled_propagators(mu, r, t)
            a = mu * math.log1p(r) * t / 2.0
            dev = abs(float(s_tilde * np.exp(log_scale + a)) - ref) / abs(ref)
            worst = dev if math.isnan(worst) else max(worst, dev)
        jumps.append(worst)
        r_probe = delta * (1.0 + 1e-7)
        stable = float(propagators(mu, r_probe, t).S)
        naive = naive_sine_propagator(mu, r_probe, t)
        naive_errs.append(abs(naive - stable) / abs(stable) if stable != 0 else math.nan)
    ts = [float(t) for t in t_list]
    finite = [e for e in naive_errs if not math.isnan(e)]
    naive = make_verdict(f"singularity mu={mu:g} naive error at delta(1+1e-7)", naive_min_error,
                         max(finite) if finite else math.nan, 0.0, AT_LEAST, series=tuple(zip(ts, naive_errs)),
                         note="relative error of the exponential-difference form vs the stable form")
    return make_verdict(f"singularity mu={mu:g} stable jump", 0.0, max(jumps), jump_tol, AT_MOST,
                        series=tuple(zip(ts, jumps)), companions=(naive,),
                        note="max relative deviation from the branch-free series at delta and delta +- 10^-k")


def verify_all(dims=(1, 2, 3), mus=(1.0, 2.0, 4.0), grid: TimeGrid | None = None,
               spec: QuadratureSpec | None = None) -> list[Verdict]:
    """The rate suite: profile, norm rate and zero-mean checks per (n, μ),
    plus the cross-regime slope comparison per n.

    The root-gap and singularity probes are structural checks with their
    own entry points and are not part of this suite.
    """
    out = []
    for n in dims:
        pair = default_pair(n)
        for mu in mus:
            out.append(run_profile_convergence(n, mu, pair, grid, spec=spec))
            out.append(run_solution_norm_rates(n, mu, pair, grid, spec=spec))
            out.append(run_zero_mean(n, mu, grid, spec=spec))
        if len(mus) > 1:
            out.append(run_regime_comparison(n, pair, grid, tuple(mus), spec=spec))
    return out
