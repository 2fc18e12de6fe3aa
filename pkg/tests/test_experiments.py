import math

import numpy as np
import pytest

from logdamp.data import DataPair, gaussian_datum, zero_mean_datum
from logdamp.errors import CannotFit, InvalidParameter, NoConvergence, RegimeError
from logdamp.experiments import (
    TimeGrid,
    default_pair,
    fit_loglog,
    make_verdict,
    max_workers,
    root_gap_slacks,
    run_profile_convergence,
    run_regime_comparison,
    run_root_gap_bounds,
    run_singularity_probe,
    run_solution_norm_rates,
    run_zero_mean,
    solution_norm,
    solution_norm_series,
    verify_all,
)
from logdamp.quadrature import QuadratureSpec, lemma_integral

# 40-digit quadrature of the closed-form mode over r, Plancherel-scaled
NORMS = [(1.0, 1, 10.0, 3.0639668502899330424), (4.0, 2, 10.0, 0.61279995547489645179),
         (2.0, 3, 5.0, 0.40135351591663674829)]


def test_time_grid():
    g = TimeGrid(1e2, 1e4, 20)
    pts = g.points()
    q = (1e4 / 1e2) ** (1 / 19)
    assert pts[0] == 1e2 and pts[-1] == 1e4
    assert np.allclose(pts[1:] / pts[:-1], q, rtol=1e-13)
    with pytest.raises(InvalidParameter):
        TimeGrid(1, 10, 4)
    with pytest.raises(InvalidParameter):
        TimeGrid(10, 1, 6)


def test_fit_loglog_exact_powers():
    t = np.geomspace(1, 1e3, 10)
    fit = fit_loglog(zip(t, t ** -1.5))
    assert abs(fit.slope + 1.5) < 1e-12
    fit = fit_loglog(zip(t, 7 * t ** 0.5))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(7), abs=1e-12)
    assert fit.max_residual < 1e-12
    with pytest.raises(CannotFit):
        fit_loglog([(1, 1), (2, 0), (3, 1), (4, 1), (5, 1)])
    with pytest.raises(CannotFit):
        fit_loglog([(1, 1), (2, 1)])


def test_weighted_integral_slope():
    t = TimeGrid().points()
    fit = fit_loglog([(x, lemma_integral(1, 1.0, 1.0, x)) for x in t])
    assert fit.slope == pytest.approx(-2, abs=0.02)


def test_verdict_modes():
    assert make_verdict("a", 1.0, 1.04, 0.05).passed
    assert not make_verdict("a", 1.0, 0.94, 0.05).passed
    assert make_verdict("b", -1.0, -3.0, 0.1, "at_most").passed
    assert not make_verdict("b", -1.0, -0.8, 0.1, "at_most").passed
    assert make_verdict("c", 0.0, 5.0, 1e-12, "at_least").passed
    assert not make_verdict("c", 0.0, math.nan, 1.0).passed


@pytest.mark.parametrize("mu,n,t,expected", NORMS)
def test_solution_norm_against_oracle(mu, n, t, expected):
    assert solution_norm(default_pair(n), mu, t) == pytest.approx(expected, rel=1e-9)


def test_reference_runs():
    assert run_profile_convergence(2, 1.0).measured == pytest.approx(-1, abs=0.1)
    assert run_profile_convergence(1, 2.0).measured == pytest.approx(-0.5, abs=0.1)
    v = run_profile_convergence(3, 4.0)
    assert v.all_passed and "tail_norm" in v.columns
    assert run_solution_norm_rates(1, 1.0).measured == pytest.approx(0.5, abs=0.05)
    assert run_solution_norm_rates(2, 4.0).all_passed
    assert run_solution_norm_rates(4, 2.0).measured == pytest.approx(-1, abs=0.05)
    assert run_zero_mean(1, 1.0).measured <= -0.4
    assert run_zero_mean(2, 3.0).measured <= -0.9


def test_zero_mean_plus_gaussian_restores_rate():
    n = 1
    pair = DataPair(gaussian_datum(1, 1, n), zero_mean_datum(1, 2, n) + gaussian_datum(1, 1, n))
    assert run_solution_norm_rates(n, 1.0, pair).measured == pytest.approx(1 - n / 2, abs=0.05)


def test_regime_comparison():
    v = run_regime_comparison(1)
    assert v.passed and v.measured < 0.1


def test_root_gap_bounds():
    for mu in (2.1, 4.0):
        assert run_root_gap_bounds(mu).passed
    r, s = root_gap_slacks(4.0)
    assert r[0] == 0 and np.all(s[:, 0] == 0)
    with pytest.raises(RegimeError):
        run_root_gap_bounds(2.0)


def test_singularity_probe_regime_guard():
    with pytest.raises(RegimeError):
        run_singularity_probe(2.0)
    assert run_singularity_probe(4.0).passed


def test_series_sanity_and_determinism(monkeypatch):
    grid = TimeGrid(1e2, 1e3, 6)
    pair = default_pair(3)
    monkeypatch.setenv("LOGDAMP_THREADS", "1")
    serial = solution_norm_series(pair, 4.0, grid)
    monkeypatch.setenv("LOGDAMP_THREADS", "4")
    parallel = solution_norm_series(pair, 4.0, grid)
    again = solution_norm_series(pair, 4.0, grid)
    assert serial == parallel == again
    ys = np.array([y for _, y in serial])
    assert np.all(np.isfinite(ys)) and np.all(ys > 0)


def test_threads_env_validation(monkeypatch):
    monkeypatch.setenv("LOGDAMP_THREADS", "0")
    with pytest.raises(InvalidParameter):
        max_workers()
    monkeypatch.setenv("LOGDAMP_THREADS", "two")
    with pytest.raises(InvalidParameter):
        max_workers()


def test_requires_nonzero_mean():
    pair = DataPair(zero_mean_datum(1, 2, 1), zero_mean_datum(1, 2, 1))
    with pytest.raises(InvalidParameter):
        run_solution_norm_rates(1, 1.0, pair)
    with pytest.raises(InvalidParameter):
        run_profile_convergence(1, 1.0, pair)


def test_no_convergence_reports_time():
    spec = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_depth=1)
    with pytest.raises(NoConvergence) as info:
        solution_norm(default_pair(1), 1.0, 500.0, spec)
    assert info.value.t == 500.0


def test_verify_all_small():
    vs = verify_all((1,), (1.0, 4.0), TimeGrid(1e2, 1e4, 10))
    assert len(vs) == 7
    assert all(v.all_passed for v in vs)
