from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holderlie.core import PAdicField, SeminormFamily
from holderlie.differentiability import (GaugeFunction, abs_counterexample, chain_rule_test,
                                         difference_quotient, feeble_check, tangency_check)
from holderlie.groups import heisenberg, mu, iota, random_probe
from holderlie.taylor import fd_jacobian

MAX1 = SeminormFamily.standard(1)["max"]
MAX2 = SeminormFamily.standard(2)["max"]


def sq(x):
    return np.asarray(x, float) ** 2


# -- difference quotient ---------------------------------------------------------


def test_quotient_of_square():
    # (x + t y)^2 - x^2 = 2 x t y + t^2 y^2
    x, y, t = np.array([1.5]), np.array([-0.5]), 0.25
    assert difference_quotient(sq, x, y, t) == pytest.approx(2 * x * y + t * y ** 2, rel=1e-15)


def test_quotient_of_linear_is_constant():
    L = np.array([[1.0, 2.0], [3.0, -1.0]])
    f = lambda x: L @ x  # noqa: E731
    x, y = np.array([0.3, 0.1]), np.array([1.0, -2.0])
    for t in (1.0, 0.5, 1e-3):
        assert np.allclose(difference_quotient(f, x, y, t), L @ y, rtol=1e-12)


def test_quotient_at_t0():
    x, y = np.array([1.5]), np.array([-0.5])
    assert difference_quotient(sq, x, y, 0, derivative=lambda z: np.diag(2 * z)) == -1.5
    with pytest.raises(ValueError):
        difference_quotient(sq, x, y, 0)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 1), st.floats(0.1, 4))
def test_quotient_rescaling(x, y, t, s):
    # f^[1](x, s y, t) = s f^[1](x, y, s t)
    f = lambda z: np.sin(z) + z ** 3  # noqa: E731
    xv, yv = np.array([x]), np.array([y])
    lhs = difference_quotient(f, xv, s * yv, t)
    rhs = s * difference_quotient(f, xv, yv, s * t)
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-7)


def test_quotient_padic_exact():
    fld = PAdicField(5, 20)
    f = lambda v: v ** 2  # noqa: E731
    x, y, t = fld.vector([Fraction(3)]), fld.vector([Fraction(2)]), Fraction(25)
    assert difference_quotient(f, x, y, t)[0] == 2 * 3 * 2 + 25 * 4


# -- gauges and tangency ---------------------------------------------------------


def test_gauge_little_o():
    ts = tuple(2.0 ** -n for n in range(20))
    assert GaugeFunction(ts, tuple(t ** 2 for t in ts)).is_little_o
    assert not GaugeFunction(ts, ts).is_little_o
    assert GaugeFunction(ts, tuple(1e-10 * t for t in ts), floor=1e-8).is_little_o


def test_tangency_square_is_tangent_to_zero():
    rep = tangency_check(sq, MAX1, MAX1)
    # |y|^2 <= eps |y| exactly when |y| <= eps; radii are powers of 2
    assert rep.deltas[1.0] == 1.0
    assert rep.deltas[0.1] == 2.0 ** -4
    assert rep.passed and rep.gauge.is_little_o


def test_tangency_identity_not_tangent_to_zero():
    rep = tangency_check(lambda y: y, MAX1, MAX1)
    assert rep.deltas[1.0] == 1.0
    assert rep.deltas[0.1] == 0.0
    assert not rep.passed and not rep.gauge.is_little_o


def test_tangency_with_candidate():
    f = lambda y: np.array([np.sin(y[0]) + y[1] ** 2, y[0] * y[1]])  # noqa: E731
    J = np.array([[1.0, 0.0], [0.0, 0.0]])
    rep = tangency_check(f, MAX2, MAX2, J)
    assert rep.passed and rep.gauge.is_little_o
    rep_bad = tangency_check(f, MAX2, MAX2, np.zeros((2, 2)))
    assert not rep_bad.passed


def test_tangency_heisenberg_product_at_identity(rng):
    G = heisenberg("exp")
    d = G.dim
    fam = SeminormFamily.standard(2 * d)
    f = lambda v: mu(G, v[:d], v[d:])  # noqa: E731
    J = fd_jacobian(f, np.zeros(2 * d))
    assert np.allclose(J, np.hstack([np.eye(d), np.eye(d)]), atol=1e-9)
    rep = tangency_check(lambda v: f(v), G.seminorm, fam["max"], J, radius=0.1)
    assert rep.passed


# -- feeble differentiability ----------------------------------------------------


def test_feeble_smooth():
    f = lambda x: np.array([np.exp(x[0]) * x[1], x[0] ** 2])  # noqa: E731
    x = np.array([0.3, -0.2])
    rep = feeble_check(f, x, lambda z: fd_jacobian(f, z))
    assert rep.passed and rep.linear_ok


def test_feeble_abs_fails_at_zero():
    rep = feeble_check(abs_counterexample, np.zeros(1), np.eye(1))
    assert not rep.passed
    rep0 = feeble_check(abs_counterexample, np.zeros(1), np.zeros((1, 1)))
    assert not rep0.passed


def test_feeble_abs_passes_away_from_zero():
    rep = feeble_check(abs_counterexample, np.array([1.0]), np.eye(1), scale=0.1)
    assert rep.passed


def test_feeble_padic_square():
    fld = PAdicField(5, 30)
    q = SeminormFamily.standard(1, fld)["max"]
    f = lambda v: v * v  # noqa: E731
    x = fld.vector([Fraction(2)])
    D = np.array([[Fraction(4)]], dtype=object)
    rep = feeble_check(f, x, D, fld=fld, q=q, n_range=range(1, 10))
    assert rep.passed


# -- chain rule ------------------------------------------------------------------


def test_chain_rule_square_cube():
    # d/dx (x^2)^3 = 6 x^5, equal to 6 at x = 1
    rep = chain_rule_test(sq, lambda u: u ** 3, np.array([1.0]),
                          df=lambda z: np.diag(2 * z), dg=lambda u: np.diag(3 * u ** 2))
    assert rep.derivative[0, 0] == 6.0
    assert rep.passed


def test_chain_rule_wrong_derivative_fails():
    rep = chain_rule_test(sq, lambda u: u ** 3, np.array([1.0]), df=np.eye(1))
    assert not rep.passed


@pytest.mark.parametrize("op", ["mu", "iota"])
def test_chain_rule_group_operations(op, rng):
    G = heisenberg("exp")
    d = G.dim
    x, y = random_probe(G, rng, "A"), random_probe(G, rng, "A")
    if op == "mu":
        f = lambda v: mu(G, v[:d], v[d:])  # noqa: E731
        base = np.concatenate([x, y])
    else:
        f = lambda v: iota(G, v)  # noqa: E731
        base = x
    rep = chain_rule_test(f, lambda u: iota(G, u), base)
    assert rep.passed
