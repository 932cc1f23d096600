import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qthermo.schedules import PiecewisePolynomial, Segment, as_schedule


def ramp():
    return PiecewisePolynomial(
        [Segment(0.0, 1.0, (0.0,)), Segment(1.0, 2.0, (0.22, -0.22)), Segment(2.0, math.inf, (-0.22,))]
    )


def test_evaluation_scalar_and_vector():
    f = ramp()
    assert f(0.5) == 0.0
    assert np.isclose(f(1.5), -0.11)
    assert np.isclose(f(3.0), -0.22)
    t = np.array([0.5, 1.5, 3.0])
    assert np.allclose(f(t), [0.0, -0.11, -0.22])
    # scalar and array paths agree
    grid = np.linspace(0, 4, 41)
    assert np.allclose(f(grid), [f(float(x)) for x in grid], atol=1e-15)


def test_integral_matches_quadrature():
    f = ramp()
    for t in (0.3, 1.0, 1.7, 2.0, 4.5):
        ref, _ = quad(f, 0, t, points=[1.0, 2.0], epsabs=1e-13)
        assert abs(f.integral(t) - ref) < 1e-12
    assert np.isclose(f.integral(3.0), -0.11 - 0.22)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=6), st.floats(0.0, 6.0))
def test_linear_interpolant_integral(values, t):
    times = np.linspace(0, 5, len(values))
    f = PiecewisePolynomial.linear_interpolant(times, values)
    kinks = [x for x in times[1:] if 0 < x < t]
    ref, _ = quad(f, 0, t, points=kinks or None, epsabs=1e-12, limit=100)
    assert abs(f.integral(t) - ref) < 1e-9
    assert np.allclose(f(times), values, atol=1e-12)


def test_json_round_trip_and_constants():
    f = ramp()
    assert PiecewisePolynomial.from_dict(f.to_dict()) == f
    c = PiecewisePolynomial.from_dict({"constant": 0.8})
    assert c(12.0) == 0.8
    assert as_schedule(2)(5.0) == 2.0
    with pytest.raises(TypeError):
        as_schedule("fast")


def test_contiguity_is_enforced():
    with pytest.raises(ValueError):
        PiecewisePolynomial([Segment(0.0, 1.0, (1.0,)), Segment(1.5, 2.0, (1.0,))])
