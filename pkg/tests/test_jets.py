import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from srvolume import jets
from srvolume.jets import Jet

x_sym, y_sym = sp.symbols("x y")


def sym_derivs(expr, x0, order):
    # high-precision substitution; float subs loses digits to cancellation near 0
    x0 = sp.Float(x0, 80)
    return [float(sp.diff(expr, x_sym, k).evalf(80, subs={x_sym: x0})) for k in range(order + 1)]


CASES = [
    (lambda x: jets.sin(x) * jets.cos(2 * x), sp.sin(x_sym) * sp.cos(2 * x_sym)),
    (lambda x: jets.exp(x) / (1 + x * x), sp.exp(x_sym) / (1 + x_sym ** 2)),
    (lambda x: jets.sqrt(2 + x) ** 3, sp.sqrt(2 + x_sym) ** 3),
    (lambda x: jets.log(3 + x) * x ** 2, sp.log(3 + x_sym) * x_sym ** 2),
    (lambda x: 2 ** x - 1 / x, 2 ** x_sym - 1 / x_sym),
]


@pytest.mark.parametrize("k", range(len(CASES)))
@pytest.mark.parametrize("x0", [0.3, 1.7])
def test_derivatives_match_sympy(k, x0):
    f, expr = CASES[k]
    got = f(Jet.variable(x0, order=5)).derivatives()
    assert np.allclose(got, sym_derivs(expr, x0, 5), rtol=1e-10, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-6.0, 6.0))
def test_sinc_and_kappa_are_entire(x0):
    s, k = jets.sinc(Jet.variable(x0, order=5)), jets.kappa(Jet.variable(x0, order=5))
    expr_s = sp.sin(x_sym) / x_sym
    expr_k = (x_sym * sp.cos(x_sym) - sp.sin(x_sym)) / x_sym ** 3
    if abs(x0) < 1e-2:
        expr_s, expr_k = sp.series(expr_s, x_sym, 0, 20).removeO(), sp.series(expr_k, x_sym, 0, 20).removeO()
    assert np.allclose(s.derivatives(), sym_derivs(expr_s, x0, 5), rtol=1e-8, atol=1e-9)
    assert np.allclose(k.derivatives(), sym_derivs(expr_k, x0, 5), rtol=1e-8, atol=1e-9)


def test_sinc_kappa_on_floats_and_arrays():
    assert jets.sinc(0.0) == 1.0
    assert jets.kappa(0.0) == pytest.approx(-1 / 3)
    xs = np.array([0.0, 1e-4, 0.5, 3.0])
    assert np.allclose(jets.sinc(xs), [1.0] + [math.sin(v) / v for v in xs[1:]], rtol=1e-14)


def test_bivariate_partials():
    f = lambda a, b: jets.sin(a * b) + a ** 3 * b  # noqa: E731
    a = Jet.variable(0.4, 0, 2, 4)
    b = Jet.variable(1.3, 1, 2, 4)
    J = f(a, b)
    expr = sp.sin(x_sym * y_sym) + x_sym ** 3 * y_sym
    for i in range(5):
        for j in range(5 - i):
            want = float(sp.diff(expr, x_sym, i, y_sym, j).subs({x_sym: 0.4, y_sym: 1.3})) \
                if i + j else float(expr.subs({x_sym: 0.4, y_sym: 1.3}))
            assert J.derivative(i, j) == pytest.approx(want, rel=1e-11, abs=1e-12)


def test_integrate_and_substitute():
    # F(h1, h2) = h1 * h2^2 ; substituting h1 = 2 h2 gives 2 h2^3
    coef = np.zeros((4, 4))
    coef[1, 2] = 1.0
    F = Jet(coef, 2, 3)
    g = Jet.from_derivatives([0.0, 2.0, 0.0, 0.0])
    sub = F.substitute(0, g)
    assert np.allclose(sub.coef, [0, 0, 0, 2.0])
    coef = np.zeros((4, 4))
    coef[1, 1] = 1.0
    I = Jet(coef, 2, 3).integrate(1)
    assert I.coef[1, 2] == pytest.approx(0.5)
    assert np.count_nonzero(I.coef) == 1


def test_batched_jets():
    x = Jet.variable(np.array([0.1, 0.2, 0.3]), order=3)
    y = jets.sin(x)
    assert y.batch_shape == (3,)
    assert np.allclose(y.derivatives()[1], np.cos([0.1, 0.2, 0.3]))


def test_incompatible_jets():
    with pytest.raises(ValueError):
        Jet.variable(0.0, order=3) + Jet.variable(0.0, order=4)
