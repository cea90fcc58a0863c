import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srvolume.exceptions import IndexOutOfRange, NonTransversal, ValidationError
from srvolume.regularity import (
    FrequencyCurve,
    W_branch,
    W_tail,
    boundary_partials,
    boundary_slopes,
    c3_certificate,
    one_sided_derivative,
    paper_prediction,
    resonance_scan,
    tail_exponent,
    volume_derivative,
)
from srvolume.volume import horizontal_constant, integrand_G, unit_ball_volume
from scipy import integrate

CROSS = FrequencyCurve.from_expressions("b1=1+t; b2=1+2*t", -0.25, 0.25)


def test_scan_symmetric_crossing():
    res = resonance_scan(FrequencyCurve.from_expressions("b1=1+t; b2=1-t", -0.5, 0.5))
    assert len(res) == 1
    assert abs(res[0].t0) < 1e-12
    assert res[0].pair == (1, 2) and res[0].transversal


def test_scan_disjoint():
    assert resonance_scan(FrequencyCurve.from_expressions("b1=2+t; b2=1", -0.5, 0.5)) == []


def test_scan_tangential():
    res = resonance_scan(FrequencyCurve.from_expressions("b1=1+t^2; b2=1", -0.5, 0.5))
    assert len(res) == 1
    assert abs(res[0].t0) < 1e-6
    assert res[0].tangential and res[0].multiplicity == 2 and not res[0].transversal


def test_scan_ignores_lower_crossings():
    # b2 and b3 cross at t = 0 but b1 stays on top
    curve = FrequencyCurve.from_expressions("b1=3; b2=1+t; b3=1-t", -0.5, 0.5)
    assert resonance_scan(curve) == []


def test_curve_rejects_nonpositive():
    with pytest.raises(ValidationError, match="b2"):
        FrequencyCurve.from_expressions("b1=1; b2=t", -1.0, 1.0)


def test_tail_vanishes_at_anchor():
    assert W_tail(CROSS, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("t", [-0.2, -0.05, 0.03, 0.2])
def test_volume_splits_into_fixed_part_and_tail(t):
    b = CROSS(t)
    fixed, _ = integrate.quad(lambda s: integrand_G(b, s), 0, math.pi, epsabs=1e-15, epsrel=1e-13, limit=200)
    V = horizontal_constant(2) * abs(fixed + W_tail(CROSS, t, 0.0))
    assert V == pytest.approx(unit_ball_volume(b).value, rel=1e-10)


def test_low_orders_vanish():
    for order in (1, 2, 3):
        for side in ("left", "right"):
            assert abs(one_sided_derivative(CROSS, 0.0, side, order)) < 1e-8


def test_order4_closed_form():
    for side in ("left", "right"):
        assert one_sided_derivative(CROSS, 0.0, side, 4) == pytest.approx(-48 / math.pi, rel=1e-10)


def _fd4(f, h):
    return (f(2 * h) - 4 * f(h) + 6 * f(0.0) - 4 * f(-h) + f(-2 * h)) / h ** 4


@pytest.mark.parametrize("side", ["left", "right"])
def test_order4_against_finite_differences(side):
    f = lambda x: W_branch(CROSS, x, 0.0, side)  # noqa: E731
    d1, d2 = _fd4(f, 0.01), _fd4(f, 0.005)
    rich = (4 * d2 - d1) / 3  # the stencil error is O(h^2)
    exact = one_sided_derivative(CROSS, 0.0, side, 4)
    assert rich == pytest.approx(exact, rel=1e-4)


@pytest.mark.parametrize("side", ["left", "right"])
def test_order5_against_finite_differences(side):
    f = lambda x: W_branch(CROSS, x, 0.0, side)  # noqa: E731

    def d5(h):
        return (f(3 * h) - 4 * f(2 * h) + 5 * f(h) - 5 * f(-h) + 4 * f(-2 * h) - f(-3 * h)) / (2 * h ** 5)

    rich = (4 * d5(0.005) - d5(0.01)) / 3
    assert rich == pytest.approx(one_sided_derivative(CROSS, 0.0, side, 5), rel=1e-4)


def test_order5_values():
    # with the full integrand the limits are -(2/π) c_d^2 (c_d^3 - 5c_d^2 c_o - 50 c_d c_o^2 - 60 c_o^3)
    left = one_sided_derivative(CROSS, 0.0, "left", 5)
    right = one_sided_derivative(CROSS, 0.0, "right", 5)
    assert left == pytest.approx(1378 / math.pi, rel=1e-10)
    assert right == pytest.approx(1376 / math.pi, rel=1e-10)


def test_mode_decomposition():
    for order in range(1, 6):
        for side in ("left", "right"):
            total = one_sided_derivative(CROSS, 0.0, side, order)
            parts = sum(one_sided_derivative(CROSS, 0.0, side, order, mode=i) for i in (1, 2))
            assert parts == pytest.approx(total, abs=1e-10 * max(1.0, abs(total)))


def test_boundary_partials_vanish():
    parts = boundary_partials(CROSS, 0.0, order=2)
    assert max(abs(v) for v in parts.values()) < 1e-10


def test_boundary_slopes():
    assert boundary_slopes(CROSS, 0.0) == pytest.approx((-math.pi, -2 * math.pi))


def test_triple_crossing_raises_regularity():
    curve = FrequencyCurve.from_expressions("b1=1+t; b2=1+2*t; b3=1+3*t", -0.2, 0.2)
    assert all(r.continuous for r in c3_certificate(curve, 0.0))


def test_general_case_three_modes():
    curve = FrequencyCurve.from_expressions("b1=1+t; b2=1+2*t; b3=0.4+t", -0.2, 0.2)
    reps = c3_certificate(curve, 0.0)
    assert all(r.continuous for r in reps[:4])
    assert not reps[4].continuous


def test_nonlinear_curve_order4_continuous():
    curve = FrequencyCurve.from_expressions("b1=1+t+t^2; b2=exp(2*t)", -0.2, 0.2)
    r4 = c3_certificate(curve, 0.0, orders=[4])[0]
    assert r4.continuous
    assert r4.left_limit == pytest.approx(r4.paper_prediction["left"], rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.5, 2.0))
def test_order4_formula_scaling(c1, c2, beta):
    if abs(c1 - c2) < 0.1:
        c2 = c1 + 0.5
    curve = FrequencyCurve.from_expressions(f"b1={beta}+{c1}*t; b2={beta}+{c2}*t", -0.05, 0.05)
    got = one_sided_derivative(curve, 0.0, "left", 4)
    assert got == pytest.approx(paper_prediction(curve, 0.0, 4)["left"], rel=1e-9)


def test_order4_needs_transversal_crossing():
    curve = FrequencyCurve.from_expressions("b1=1+t^2; b2=1", -0.2, 0.2)
    with pytest.raises(NonTransversal):
        one_sided_derivative(curve, 0.0, "right", 4)


def test_order_limits_and_mode_index():
    with pytest.raises(ValidationError):
        one_sided_derivative(CROSS, 0.0, "right", 6)
    with pytest.raises(IndexOutOfRange):
        one_sided_derivative(CROSS, 0.0, "right", 2, mode=3)


def test_sampled_curve():
    t = np.linspace(-0.25, 0.25, 101)
    curve = FrequencyCurve.from_samples(t, np.column_stack([1 + t, 1 + 2 * t]))
    assert not curve.exact
    assert curve(0.1) == pytest.approx([1.1, 1.2])
    assert abs(one_sided_derivative(curve, 0.0, "right", 2)) < 1e-8
    with pytest.raises(ValidationError):
        one_sided_derivative(curve, 0.0, "right", 3)


@pytest.mark.parametrize("side", ["left", "right"])
def test_tail_exponent(side):
    assert tail_exponent(CROSS, 0.0, side) >= 3.9


def test_volume_derivative_matches_finite_differences():
    def V(t):
        return unit_ball_volume(CROSS(t)).value

    for t0 in (0.0, 0.1):
        h = 1e-3
        fd = (V(t0 - 2 * h) - 8 * V(t0 - h) + 8 * V(t0 + h) - V(t0 + 2 * h)) / (12 * h)
        for side in ("left", "right"):
            assert volume_derivative(CROSS, t0, side, 1) == pytest.approx(fd, rel=1e-7)
