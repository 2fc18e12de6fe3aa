import math

import numpy as np
import pytest

from logdamp.errors import InvalidParameter, RegimeError
from logdamp.model import (
    DampingParams,
    Regime,
    char_roots,
    classify,
    discriminant,
    energy_weight,
    log1p_minus_x,
    log1p_ratio,
    root_gap,
    slow_root,
    threshold_delta,
)

# 40-digit mpmath evaluations of the quadratic formula and of μ log(1+δ) = 2δ
DELTA = {2.1: 0.10163952050280125826, 3.0: 1.1440328412755084731, 4.0: 2.512862417252339354,
         10.0: 13.301995292318424952}
ROOTS = [
    (1.0, 1.0, complex(-0.34657359027997265471, 0.93802278571495780261)),
    (4.0, 1.0, -0.42618392180949248474, -2.3464048004302887529),
    (4.0, 0.01, -0.002694955200934108592, -0.037106368211738223625),
    (2.0, 0.5, complex(-0.40546510810816438198, 0.29257143761282400744)),
    (4.0, 1e-6, -2.6794934713165416496e-7, -3.7320486528696789864e-6),
    (10.0, 3.0, -0.682847845732757574, -13.180095765466148614),
]


def test_classify_examples():
    assert classify(1) is Regime.NON_EFFECTIVE
    assert classify(2) is Regime.CRITICAL
    assert classify(4) is Regime.EFFECTIVE
    assert classify(np.nextafter(2.0, 3.0)) is Regime.EFFECTIVE
    assert classify(np.nextafter(2.0, 1.0)) is Regime.NON_EFFECTIVE
    assert DampingParams(3).regime is Regime.EFFECTIVE


@pytest.mark.parametrize("bad", [0, -1, math.nan, math.inf])
def test_invalid_mu(bad):
    with pytest.raises(InvalidParameter):
        classify(bad)


@pytest.mark.parametrize("case", ROOTS)
def test_char_roots_against_oracle(case):
    mu, r = case[0], case[1]
    roots = char_roots(mu, r)
    if len(case) == 3:
        expected_plus = case[2]
        expected_minus = case[2].conjugate()
    else:
        expected_plus, expected_minus = case[2], case[3]
    assert abs(roots.lambda_plus - expected_plus) <= 1e-13 * abs(expected_plus)
    assert abs(roots.lambda_minus - expected_minus) <= 1e-13 * abs(expected_minus)


def test_roots_at_zero_frequency():
    for mu in (0.5, 2.0, 7.0):
        roots = char_roots(mu, 0.0)
        assert roots.lambda_plus == 0 and roots.lambda_minus == 0


def test_root_gap():
    assert root_gap(1.0, 1.0) == pytest.approx(complex(0, 1.8760455714299156), rel=1e-14)
    assert root_gap(4.0, threshold_delta(4.0).delta) == 0
    for r in (0.1, 1.0, 10.0):
        gap = root_gap(2.0, r)
        assert gap.real == 0
        assert gap.imag == pytest.approx(2.0 * math.sqrt(r * r - math.log1p(r) ** 2), rel=1e-12)


def test_discriminant_signs():
    r = np.logspace(-8, 3, 10_000)
    for mu in (0.5, 1.0, 2.0):
        assert np.all(discriminant(mu, r) < 0)
        assert discriminant(mu, 0.0) == 0
    for mu in (2.1, 4.0, 10.0):
        d = threshold_delta(mu).delta
        below = np.linspace(d * 1e-6, d * (1 - 1e-9), 5000)
        above = np.linspace(d * (1 + 1e-9), 50 * d, 5000)
        assert np.all(discriminant(mu, below) > 0)
        assert np.all(discriminant(mu, above) < 0)


def test_real_parts_nonpositive():
    r = np.logspace(-6, 3, 400)
    for mu in (0.3, 2.0, 5.0):
        for x in r:
            roots = char_roots(mu, x)
            assert roots.lambda_plus.real <= 0 and roots.lambda_minus.real <= 0
        assert np.all(slow_root(mu, r) <= 0)


@pytest.mark.parametrize("mu", sorted(DELTA))
def test_threshold_delta(mu):
    th = threshold_delta(mu)
    assert th.delta == pytest.approx(DELTA[mu], rel=1e-13)
    assert abs(mu * math.log1p(th.delta) - 2 * th.delta) < 1e-12 * max(1.0, th.delta)
    assert th.delta > (mu - 2) / 2
    assert 0 < th.delta1 <= min(mu / 2 - 1, th.delta)
    assert th.c > 0 and th.d == mu
    assert th.c == pytest.approx(math.sqrt(mu * mu - 4 * (1 + th.delta1) ** 2))


def test_threshold_examples():
    assert threshold_delta(4.0).delta == pytest.approx(2.5129, abs=1e-3)
    assert threshold_delta(2.1).delta == pytest.approx(0.1020, abs=1e-3)
    assert threshold_delta(2.01).delta < threshold_delta(2.1).delta < threshold_delta(4.0).delta
    # widest admissible window makes the lower gap constant vanish
    assert threshold_delta(4.0, delta1_fraction=1.0).c == 0


@pytest.mark.parametrize("mu", [1.0, 2.0])
def test_threshold_requires_effective(mu):
    with pytest.raises(RegimeError, match="delta requires mu > 2"):
        threshold_delta(mu)


def test_log_equivalence_on_threshold_interval():
    for mu in (2.1, 4.0, 10.0):
        th = threshold_delta(mu)
        r = np.linspace(0, th.delta, 10_000)
        L = np.log1p(r)
        C1 = mu * th.c1
        assert np.all(C1 * r <= mu * L * (1 + 1e-15))
        assert np.all(mu * L <= mu * r)


def test_energy_weight():
    # direct 30-digit evaluation of μ r² L / (r² + μ² L²)
    assert energy_weight(3, 1.0) == pytest.approx(0.390573143993814275, rel=1e-14)
    assert energy_weight(3, 100.0) == pytest.approx(13.5849462326740278, rel=1e-14)
    assert energy_weight(2, 1e-6) < 1e-5
    assert energy_weight(2, 0.0) == 0


def test_log1p_helpers():
    for r, ratio, minus in [(1e-8, 0.999999995000000033333333, -4.99999996666666691666e-17),
                            (1e-3, 0.99950033308353316680, -4.996669164668331906e-7),
                            (0.5, 0.81093021621632876396, -0.094534891891835618020)]:
        assert log1p_ratio(r) == pytest.approx(ratio, rel=1e-15, abs=0)
        assert log1p_minus_x(r) == pytest.approx(minus, rel=1e-14, abs=0)
    assert log1p_ratio(0.0) == 1.0
