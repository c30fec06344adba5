import math

import numpy as np
import pytest

from rapidstab import WeightProfile, weight_derivative, weight_eval

W = WeightProfile(omega=0.5, knot=1.0)


def test_end_point():
    assert W.end == 2.0
    assert WeightProfile(omega=0.25, knot=3.0).end == 5.0


def test_eval_at_zero():
    assert weight_eval(W, 0.0) == 1.0


def test_eval_at_knot_from_both_pieces():
    # exp(-1) from the plateau; the ramp gives 2*omega*(end-knot)*exp(-1),
    # equal because 2*omega*(end-knot) = 1
    value = weight_eval(W, 1.0)
    np.testing.assert_allclose(value, math.exp(-1.0), atol=1e-7)
    ramp = 2 * W.omega * math.exp(-2 * W.omega * W.knot) * (W.end - 1.0)
    np.testing.assert_allclose(value, ramp, rtol=1e-15)


def test_eval_vanishes_at_end():
    assert weight_eval(W, 2.0) == 0.0


def test_derivative_examples():
    np.testing.assert_allclose(weight_derivative(W, 0.0), -1.0, rtol=1e-15)
    np.testing.assert_allclose(weight_derivative(W, 1.5), -math.exp(-1.0), atol=1e-7)
    np.testing.assert_allclose(weight_derivative(W, 0.5), -math.exp(-0.5), atol=1e-7)


def test_domain_errors():
    for s in (-0.1, 2.0001):
        with pytest.raises(ValueError):
            weight_eval(W, s)
        with pytest.raises(ValueError):
            weight_derivative(W, s)


def test_vectorized_evaluation():
    s = np.linspace(0.0, W.end, 11)
    vals = weight_eval(W, s)
    assert vals.shape == s.shape
    np.testing.assert_allclose(vals[0], 1.0)
    np.testing.assert_allclose(vals[-1], 0.0, atol=1e-16)


@pytest.mark.parametrize("omega,knot", [(0.5, 1.0), (0.3, 2.5), (2.0, 0.7)])
def test_derivative_dominates_weight(omega, knot):
    w = WeightProfile(omega=omega, knot=knot)
    s = np.linspace(0.0, w.end, 400)
    lhs = -weight_derivative(w, s)
    rhs = 2 * omega * weight_eval(w, s)
    assert np.all(lhs >= rhs - 1e-12)
    plateau = s[s <= knot]
    np.testing.assert_allclose(-weight_derivative(w, plateau),
                               2 * omega * weight_eval(w, plateau), rtol=1e-14)


@pytest.mark.parametrize("omega,knot", [(0.5, 1.0), (1.3, 3.0)])
def test_nonnegative_and_nonincreasing(omega, knot):
    w = WeightProfile(omega=omega, knot=knot)
    vals = weight_eval(w, np.linspace(0.0, w.end, 500))
    assert np.all(vals >= 0.0)
    assert np.all(np.diff(vals) <= 1e-15)


@pytest.mark.parametrize("omega,knot", [(0.5, 1.0), (0.3, 2.0), (1.7, 0.4)])
def test_integral_matches_closed_form(omega, knot):
    w = WeightProfile(omega=omega, knot=knot)
    x, gl_w = np.polynomial.legendre.leggauss(24)
    total = 0.0
    for a, b in [(0.0, knot), (knot, w.end)]:  # panels never straddle the knot
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        total += half * np.sum(gl_w * weight_eval(w, mid + half * x))
    closed = (2.0 - math.exp(-2.0 * omega * knot)) / (4.0 * omega)
    np.testing.assert_allclose(total, closed, atol=1e-10)


def test_derivative_continuous_at_knot():
    # this specific ramp slope makes the derivative continuous at the knot
    eps = 1e-9
    slope = -2 * W.omega * math.exp(-2 * W.omega * W.knot)
    for s in (W.knot - eps, W.knot, W.knot + eps):
        np.testing.assert_allclose(weight_derivative(W, s), slope, atol=1e-8)


def test_profile_validation():
    for omega, knot in [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.nan, 1.0)]:
        with pytest.raises(ValueError):
            WeightProfile(omega=omega, knot=knot)
