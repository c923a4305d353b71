import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holderlie.padic import (as_fraction, fraction_array, fraction_inverse, padic_abs, padic_close,
                             padic_round, valuation, vector_valuation)


def test_as_fraction_inputs():
    assert as_fraction(3) == 3
    assert as_fraction("3/5") == Fraction(3, 5)
    assert as_fraction(0.5) == Fraction(1, 2)
    assert as_fraction(Fraction(7, 9)) == Fraction(7, 9)


def test_valuation_examples():
    assert valuation(75, 5) == 2
    assert valuation(Fraction(1, 25), 5) == -2
    assert valuation(Fraction(3, 7), 5) == 0
    assert valuation(0, 5) == math.inf


def test_padic_abs():
    assert padic_abs(50, 5) == Fraction(1, 25)
    assert padic_abs(0, 5) == 0


@given(st.integers(-10**6, 10**6).filter(bool), st.integers(-10**6, 10**6).filter(bool))
def test_valuation_is_additive(a, b):
    assert valuation(a * b, 5) == valuation(a, 5) + valuation(b, 5)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_ultrametric_inequality(a, b):
    assert padic_abs(a + b, 3) <= max(padic_abs(a, 3), padic_abs(b, 3))


def test_padic_round_keeps_digits():
    x = Fraction(1, 3)
    r = padic_round(x, 5, 10)
    assert valuation(x - r, 5) >= 10
    assert padic_round(7 + 5 ** 12, 5, 10) == 7


def test_padic_close_and_vectors():
    assert padic_close(1, 1 + 5 ** 9, 5, 8)
    assert not padic_close(1, 1 + 5 ** 3, 5, 8)
    v = fraction_array([25, 50, Fraction(1, 5)])
    assert vector_valuation(v, 5) == -1


def test_fraction_inverse_exact():
    M = fraction_array([[2, 1], [1, 1]])
    Minv = fraction_inverse(M)
    assert np.all(M.dot(Minv) == fraction_array([[1, 0], [0, 1]]))
    with pytest.raises(ZeroDivisionError):
        fraction_inverse(fraction_array([[1, 2], [2, 4]]))
