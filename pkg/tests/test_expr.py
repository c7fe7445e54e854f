import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from dcprolate.errors import DomainError
from dcprolate.expr import (
    MatrixExpr, const, cosh, differentiate, eval as ev, exp, poly, power, sech, sinh, sqrt, tanh, var,
)

x = var()
X = sp.Symbol("x")

# pairs of (expression, sympy twin, sample points away from singularities)
CASES = [
    (x ** 3 - 2 * x + 1, X ** 3 - 2 * X + 1, [-1.3, 0.2, 2.1]),
    (exp(-x ** 2 / 2), sp.exp(-X ** 2 / 2), [-1.0, 0.3, 1.7]),
    ((1 - x ** 2) * exp(-x ** 2 / 2), (1 - X ** 2) * sp.exp(-X ** 2 / 2), [0.3, -0.8]),
    (sech(x) ** 2, sp.sech(X) ** 2, [-2.0, 0.1, 1.0]),
    (sinh(x) * cosh(2 * x), sp.sinh(X) * sp.cosh(2 * X), [-0.7, 0.4]),
    (power(x, 1.5) * exp(-x), X ** sp.Rational(3, 2) * sp.exp(-X), [0.4, 1.3, 3.0]),
    (power(1 - x, 0.5) * power(1 + x, 1.5), sp.sqrt(1 - X) * (1 + X) ** sp.Rational(3, 2), [-0.6, 0.1, 0.8]),
    (sqrt(2 + x ** 2) / (1 + x ** 2), sp.sqrt(2 + X ** 2) / (1 + X ** 2), [-1.1, 0.5]),
    (tanh(x) * x ** -1, sp.tanh(X) / X, [0.5, 1.5]),
]


def test_eval_examples():
    assert ev(x ** 2 - 1, 2.0) == pytest.approx(3.0, abs=1e-15)
    assert ev(exp(-x ** 2 / 2), 0.0) == 1.0
    assert ev(sech(x) ** 2, 1.0) == pytest.approx(1 / math.cosh(1.0) ** 2, rel=1e-14)


@pytest.mark.parametrize("case", range(len(CASES)))
def test_derivatives_match_symbolic_oracle(case):
    f, g, pts = CASES[case]
    for d in range(6):
        gd = sp.lambdify(X, sp.diff(g, X, d), "math")
        got = f.derivs(np.array(pts), 5)[d]
        want = np.array([gd(p) for p in pts])
        assert np.allclose(got, want, rtol=1e-11, atol=1e-11 * max(1.0, np.max(np.abs(want))))


def test_fourth_derivative_richardson():
    f = (1 - x ** 2) * exp(-x ** 2 / 2)
    x0 = 0.3

    def fd4(h):
        s = [ev(f, x0 + j * h) for j in (-2, -1, 0, 1, 2)]
        return (s[0] - 4 * s[1] + 6 * s[2] - 4 * s[3] + s[4]) / h ** 4

    rich = (4 * fd4(0.02) - fd4(0.04)) / 3
    exact = ev(differentiate(f, 4), x0)
    assert abs(exact - rich) / abs(exact) < 1e-5


def test_simple_derivatives():
    pts = np.linspace(-2, 2, 7)
    assert np.allclose(differentiate(x ** 3)(pts), 3 * pts ** 2)
    s = differentiate(sech(x))
    assert np.allclose(s(pts), -np.tanh(pts) / np.cosh(pts), rtol=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        ev(x ** -1, 0.0)
    with pytest.raises(DomainError):
        ev(power(x, 0.5), -1.0)
    with pytest.raises(DomainError):
        power(const(-2.0), 0.5)


def test_constant_folding():
    assert sinh(const(0.0)).constant_value() == 0.0
    assert (x - x).is_zero()


coef = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(a=coef, b=coef, c=st.lists(coef, min_size=1, max_size=4), e=st.sampled_from([0.5, 1.5, -1.0, 2.0]))
def test_linearity_and_product_rule(a, b, c, e):
    f = poly(c) * exp(-x ** 2 / 4)
    g = power(1 + x ** 2, e) + sinh(x)
    pts = np.random.default_rng(0).uniform(-2, 2, 100)
    lin = differentiate(a * f + b * g)(pts)
    assert np.allclose(lin, a * differentiate(f)(pts) + b * differentiate(g)(pts), atol=1e-10)
    prod = differentiate(f * g)(pts)
    assert np.allclose(prod, differentiate(f)(pts) * g(pts) + f(pts) * differentiate(g)(pts), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(c=st.lists(coef, min_size=1, max_size=5), x0=st.floats(-1.5, 1.5))
def test_derivative_matches_centered_difference(c, x0):
    f = poly(c) * sech(x) + cosh(x / 2)
    h = 1e-5
    fd = (ev(f, x0 + h) - ev(f, x0 - h)) / (2 * h)
    exact = ev(differentiate(f), x0)
    assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_matrix_expr_derivatives_and_algebra():
    M = MatrixExpr.from_entries([[x, exp(x)], [const(2.0), x ** 2]])
    pts = np.array([0.1, 0.7])
    d = M.derivs(pts, 2)
    assert d.shape == (3, 2, 2, 2)
    assert np.allclose(d[1][:, 0, 1], np.exp(pts))
    assert np.allclose(d[2][:, 1, 1], 2.0)
    T = M.T
    assert np.allclose(T(pts), np.swapaxes(M(pts), -1, -2))
