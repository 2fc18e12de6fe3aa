import math

import numpy as np
import pytest

from logdamp.data import (
    DataPair,
    RadialSpectralDatum,
    gaussian_datum,
    moment_bound_ratio,
    parse_data_key,
    sphere_area,
    zero_datum,
    zero_mean_datum,
)
from logdamp.errors import DegenerateDatum, InvalidParameter, UndefinedRatio
from logdamp.quadrature import l2_norm_fourier_side


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi ** 2)


def test_gaussian_closed_forms():
    g = gaussian_datum(1.0, 1.0, 1)
    assert g.hat(0.0) == g.p1 == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert g.l2 ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-14)
    g3 = gaussian_datum(1.0, 1.0, 3)
    assert g3.l11 == pytest.approx(math.pi ** 1.5 + 2 * math.pi, rel=1e-14)
    assert g3.exact_l1


def test_zero_datum_moments():
    for z in (gaussian_datum(0.0, 1.0, 2), zero_datum(2)):
        assert z.p1 == z.l1 == z.l11 == z.l2 == 0
        assert np.all(z.hat(np.linspace(0, 5, 11)) == 0)


def test_zero_mean_datum():
    z = zero_mean_datum(1.0, 2.0, 1)
    assert z.hat(0.0) == 0 and z.p1 == 0
    assert z.hat(1.0) == pytest.approx(math.exp(-0.25) - math.exp(-0.125), rel=1e-14)
    # no cancellation at small r: û ≈ -r²/4 + r²/8
    assert z.hat(1e-6) == pytest.approx(-1.25e-13, rel=1e-9, abs=0)
    assert not z.exact_l1
    # large r: the single-Gaussian tail is exact, with no cancellation against P1
    g = gaussian_datum(1.75, 1.0, 1)
    assert g.hat(7.0) == pytest.approx(1.75 * math.sqrt(math.pi) * math.exp(-12.25), rel=1e-14, abs=0)
    with pytest.raises(DegenerateDatum):
        zero_mean_datum(1.0, 1.0, 1)


def test_moment_ordering_and_continuity():
    for d in (gaussian_datum(2.0, 0.5, 3), zero_mean_datum(1, 3, 2), gaussian_datum(-1.0, 2.0, 1)):
        assert d.l11 >= d.l1 >= abs(d.p1)
        vals = d.hat(10.0 ** -np.arange(1, 9))
        assert np.all(np.abs(np.diff(vals)) <= np.abs(np.diff(10.0 ** -np.arange(1, 9)))
                      * max(1.0, d.l11))
        assert abs(vals[-1] - d.p1) < 1e-14 * max(1.0, abs(d.p1)) + 1e-15


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_plancherel_consistency(n):
    for d in (gaussian_datum(1.0, 1.0, n), gaussian_datum(-0.5, 3.0, n), zero_mean_datum(1, 2, n)):
        got = l2_norm_fourier_side(d.hat, n)
        assert got == pytest.approx(d.l2, rel=1e-8)


def test_moment_bound_ratio():
    g = gaussian_datum(1.0, 1.0, 1)
    grid = np.linspace(1e-4, 10, 2000)
    M = moment_bound_ratio(g, grid)
    assert 0 < M < 1
    M2 = moment_bound_ratio(g, np.linspace(1e-4, 10, 4000))
    assert abs(M2 - M) < 0.01 * M
    with pytest.raises(UndefinedRatio):
        moment_bound_ratio(zero_datum(1), grid)


def test_linearity_of_moments():
    g = gaussian_datum(1.0, 1.0, 2) + zero_mean_datum(1, 2, 2)
    for alpha in (-3.0, 0.5, 2.0):
        s = alpha * g
        assert s.p1 == pytest.approx(alpha * g.p1, rel=1e-14, abs=0)
        for name in ("l1", "l11", "l2"):
            assert getattr(s, name) == pytest.approx(abs(alpha) * getattr(g, name), rel=1e-14)


def test_parse_data_key():
    assert parse_data_key("gaussian:2,0.5", 3) == gaussian_datum(2.0, 0.5, 3)
    assert parse_data_key(" zeromean : 1 , 2 ", 1).p1 == 0
    with pytest.raises(InvalidParameter, match="gaussian:A,a"):
        parse_data_key("box:1", 1)
    with pytest.raises(InvalidParameter):
        parse_data_key("gaussian:x,1", 1)


def test_dimension_checks():
    with pytest.raises(InvalidParameter):
        gaussian_datum(1.0, 1.0, 2.5)
    with pytest.raises(InvalidParameter):
        gaussian_datum(1.0, 1.0, 0)
    with pytest.raises(InvalidParameter):
        DataPair(gaussian_datum(1, 1, 1), gaussian_datum(1, 1, 2))
    with pytest.raises(InvalidParameter):
        RadialSpectralDatum((1.0,), (-1.0,), 1)
