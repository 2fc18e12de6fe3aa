"""Randomised property checks."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from logdamp.cli import emit_csv, format_number, read_csv
from logdamp.data import DataPair, RadialSpectralDatum
from logdamp.model import char_roots, discriminant, threshold_delta
from logdamp.spectral import eval_what, propagators, sinhc

mus = st.floats(min_value=0.05, max_value=20.0)
radii = st.floats(min_value=1e-6, max_value=1e3)


@given(mus, radii)
def test_vieta(mu, r):
    roots = char_roots(mu, r)
    L = math.log1p(r)
    assert abs(roots.lambda_plus + roots.lambda_minus + mu * L) <= 1e-12 * mu * L
    assert abs(roots.lambda_plus * roots.lambda_minus - r * r) <= 1e-12 * r * r
    assert roots.lambda_plus.real <= 0 and roots.lambda_minus.real <= 0


@given(st.floats(min_value=2.001, max_value=30.0), st.floats(min_value=1e-4, max_value=10.0))
def test_discriminant_sign_matches_threshold(mu, ratio):
    d = threshold_delta(mu).delta
    r = d * ratio
    if abs(ratio - 1) < 1e-9:
        return
    assert (discriminant(mu, r) > 0) == (r < d)


components = st.lists(st.tuples(st.floats(-5, 5).filter(lambda w: abs(w) > 1e-3), st.floats(0.1, 10)),
                      min_size=1, max_size=4)


@given(components, st.integers(1, 4))
def test_datum_invariants(comps, n):
    d = RadialSpectralDatum(tuple(c[0] for c in comps), tuple(c[1] for c in comps), n)
    assert d.hat(0.0) == d.p1
    assert d.l11 >= d.l1 >= abs(d.p1) * (1 - 1e-15)
    assert d.l2 >= 0


@settings(max_examples=50)
@given(components, components, st.floats(0.1, 5), st.floats(0, 10), st.floats(0, 50),
       st.floats(-10, 10).filter(lambda a: abs(a) > 1e-6))
def test_eval_what_linear(c0, c1, mu, r, t, alpha):
    pair = DataPair(RadialSpectralDatum(tuple(c[0] for c in c0), tuple(c[1] for c in c0), 1),
                    RadialSpectralDatum(tuple(c[0] for c in c1), tuple(c[1] for c in c1), 1))
    w = complex(eval_what(pair, mu, r, t))
    ws = complex(eval_what(pair.scaled(alpha), mu, r, t))
    assert abs(ws - alpha * w) <= 1e-12 * abs(alpha) * max(abs(w), 1e-300) + 1e-300


@given(st.floats(0.1, 10), st.floats(0, 20), st.floats(0, 100))
def test_propagators_real_finite(mu, r, t):
    p = propagators(mu, r, t)
    assert math.isfinite(p.C) and math.isfinite(p.S)


@given(st.floats(-30, 30))
def test_sinhc_branches_agree(y):
    # real and imaginary arguments through their own formulas
    if y == 0:
        return
    assert abs(sinhc(complex(0, y)) - math.sin(y) / y) < 1e-15
    if abs(y) < 700:
        assert abs(sinhc(y) - math.sinh(y) / y) <= 1e-15 * abs(math.sinh(y) / y)


@given(st.lists(st.tuples(st.floats(1e-300, 1e300), st.floats(allow_nan=False, allow_infinity=False)),
                max_size=30))
def test_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "rt.csv"
    emit_csv(rows, path)
    _, back = read_csv(path)
    assert back == [tuple(float(x) for x in row) for row in rows]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_number_round_trip(x):
    assert float(format_number(x)) == x
