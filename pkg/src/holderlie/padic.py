"""Exact p-adic arithmetic on rationals.

Values are plain :class:`fractions.Fraction` objects; the prime only enters
through the valuation and the absolute value. Comparisons are made inside a
precision window of ``N`` digits: two numbers agree when their difference has
valuation at least ``N``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

INF_VALUATION = math.inf


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and rational strings such as ``"3/5"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        # floats are only accepted when they are exact short decimals
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(x, p: int):
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    x = as_fraction(x)
    if x == 0:
        return INF_VALUATION
    return _int_valuation(abs(x.numerator), p) - _int_valuation(x.denominator, p)


def padic_abs(x, p: int) -> Fraction:
    """|x|_p = p^(-v_p(x)), exact."""
    v = valuation(x, p)
    if v == INF_VALUATION:
        return Fraction(0)
    return Fraction(p) ** (-v)


def padic_round(x, p: int, digits: int) -> Fraction:
    """Canonical representative of x modulo p^digits.

    Returns the rational p^v * k with |k| < p^(digits - v) / 2 (balanced
    residue) when v < digits, and 0 when x vanishes inside the window.
    """
    x = as_fraction(x)
    v = valuation(x, p)
    if v >= digits:
        return Fraction(0)
    unit = x / Fraction(p) ** v
    modulus = p ** (digits - v)
    k = (unit.numerator * pow(unit.denominator, -1, modulus)) % modulus
    if k > modulus // 2:
        k -= modulus
    return Fraction(k) * Fraction(p) ** v


def padic_close(a, b, p: int, digits: int) -> bool:
    """True when v_p(a - b) >= digits."""
    return valuation(as_fraction(a) - as_fraction(b), p) >= digits


def vector_valuation(x, p: int):
    """Minimum coordinate valuation of a rational vector."""
    return min((valuation(c, p) for c in np.ravel(x)), default=INF_VALUATION)


def fraction_array(values) -> np.ndarray:
    """Object array of Fractions from nested sequences."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = as_fraction(v)
    return out


def fraction_inverse(m: np.ndarray) -> np.ndarray:
    """Exact inverse of a square Fraction matrix by Gauss-Jordan elimination."""
    n = m.shape[0]
    a = [[as_fraction(m[i, j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        inv_p = 1 / a[col][col]
        a[col] = [v * inv_p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [vr - factor * vc for vr, vc in zip(a[r], a[col])]
    return fraction_array([row[n:] for row in a])
