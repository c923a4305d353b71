import numpy as np
import pytest
import scipy.linalg
from fractions import Fraction
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holderlie.core import DomainError
from holderlie.groups import (SHRINK, abelian, expm1_series, group_from_spec, heisenberg, iota,
                              j_defect, log1p_series, matrix_log, mu, multiplicative,
                              padic_congruence, random_probe, sigma, squaring_defect, star_power,
                              tau)
from holderlie.padic import fraction_array

small = st.floats(-0.02, 0.02)


def heis_matrix(x):
    return np.array([[1, x[0], x[2]], [0, 1, x[1]], [0, 0, 1]], float)


def test_radii_shrink_by_quarter():
    G = matrix_log(2, radius=0.2)
    assert G.radius_of("V") == pytest.approx(0.2 / SHRINK)
    assert G.radius_of("A") == pytest.approx(0.2 / SHRINK ** 3)
    assert G.radius_of("Z") == pytest.approx(0.2 / SHRINK ** 4)


def test_series_match_scipy(rng):
    X = 0.05 * rng.standard_normal((3, 3))
    assert np.allclose(expm1_series(X), scipy.linalg.expm(X) - np.eye(3), atol=1e-15)
    A = 0.1 * rng.standard_normal((3, 3))
    assert np.allclose(log1p_series(A), scipy.linalg.logm(np.eye(3) + A), atol=1e-13)
    with pytest.raises(DomainError):
        log1p_series(np.eye(2))


@given(arrays(float, 4, elements=small), arrays(float, 4, elements=small))
def test_matrix_log_product_matches_scipy(x, y):
    G = matrix_log(2)
    oracle = scipy.linalg.logm(scipy.linalg.expm(x.reshape(2, 2)) @ scipy.linalg.expm(y.reshape(2, 2)))
    assert np.allclose(mu(G, x, y), np.real(oracle).ravel(), atol=1e-13)


@given(arrays(float, 3, elements=st.floats(-0.1, 0.1)), arrays(float, 3, elements=st.floats(-0.1, 0.1)))
def test_heisenberg_entries_is_matrix_product(x, y):
    G = heisenberg("entries")
    M = heis_matrix(x) @ heis_matrix(y)
    assert np.allclose(mu(G, x, y), [M[0, 1], M[1, 2], M[0, 2]], atol=1e-15)
    Minv = np.linalg.inv(heis_matrix(x))
    assert np.allclose(iota(G, x), [Minv[0, 1], Minv[1, 2], Minv[0, 2]], atol=1e-15)


@given(arrays(float, 3, elements=st.floats(-0.1, 0.1)), arrays(float, 3, elements=st.floats(-0.1, 0.1)))
def test_heisenberg_exp_chart_is_bch(x, y):
    G = heisenberg("exp")

    def lie(v):
        return np.array([[0, v[0], v[2]], [0, 0, v[1]], [0, 0, 0]], float)

    L = scipy.linalg.logm(scipy.linalg.expm(lie(x)) @ scipy.linalg.expm(lie(y)))
    assert np.allclose(mu(G, x, y), np.real([L[0, 1], L[1, 2], L[0, 2]]), atol=1e-12)


@pytest.mark.parametrize("G", [matrix_log(2), heisenberg("entries"), heisenberg("exp"), multiplicative()])
def test_group_axioms_on_probes(G, rng):
    for _ in range(5):
        x, y, z = (random_probe(G, rng, "W") for _ in range(3))
        assert np.allclose(mu(G, x, G.zero()), x, atol=1e-15)
        assert np.allclose(mu(G, x, iota(G, x)), 0, atol=1e-15)
        assert np.allclose(G.mul(G.mul(x, y), z), G.mul(x, G.mul(y, z)), atol=1e-14)
        assert np.allclose(tau(G, x, y, z), G.mul(G.mul(x, y), z), atol=0)


def test_padic_congruence_exact_axioms(rng):
    G = padic_congruence(2, 5)
    x, y, z = (random_probe(G, rng, "W") for _ in range(3))
    assert np.all(G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z)))
    assert np.all(G.mul(x, G.inv(x)) == 0)
    # chart of (1 + 5X)(1 + 5Y)
    X, Y = x.reshape(2, 2), y.reshape(2, 2)
    eye = fraction_array(np.eye(2, dtype=int))
    prod = (eye + 5 * X).dot(eye + 5 * Y)
    assert np.all(G.mul(x, y) == ((prod - eye) / 5).ravel())


def test_abelian_defects_vanish(rng):
    G = abelian(3)
    x = random_probe(G, rng, "Z")
    y = random_probe(G, rng, "Z")
    assert np.all(squaring_defect(G, x) == 0)
    assert np.all(j_defect(G, x, y) == 0)


def test_sigma_is_double_and_multiply(rng):
    G = heisenberg("entries")
    x, y = random_probe(G, rng, "W"), random_probe(G, rng, "W")
    assert np.allclose(sigma(G, x, y), G.mul(G.mul(x, x), y))
    P = padic_congruence(1, 5)
    a, b = random_probe(P, rng, "W"), random_probe(P, rng, "W")
    assert np.all(sigma(P, a, b) == P.mul(star_power(P, a, 5), b))


def test_heisenberg_squaring_defect_example():
    G = heisenberg("entries")
    assert np.allclose(squaring_defect(G, np.array([0.1, 0.2, 0.3])), [0, 0, -0.005])


def test_j_defect_is_quadratic_at_zero(rng):
    G = heisenberg("entries")
    x, y = random_probe(G, rng, "Z"), random_probe(G, rng, "Z")
    sizes = [np.max(np.abs(j_defect(G, x * 2.0 ** -n, y * 2.0 ** -n))) for n in range(2, 12)]
    slope = np.polyfit(np.arange(2, 12), np.log2(sizes), 1)[0]
    assert slope <= -2 + 0.1


def test_domain_errors():
    G = matrix_log(2)
    big = np.full(4, G.radius_of("Z"))
    with pytest.raises(DomainError):
        j_defect(G, big, big)
    with pytest.raises(DomainError):
        mu(G, np.full(4, 1.0), np.zeros(4))


def test_group_from_spec():
    assert group_from_spec({"group": "heisenberg", "chart": "exp"}).name == "heisenberg[exp]"
    G = group_from_spec({"group": "abelian", "dim": 2, "field": {"p": 5}})
    assert G.field.is_padic and G.radius == Fraction(5)
    with pytest.raises(ValueError):
        group_from_spec({"group": "sl7"})
    with pytest.raises(ValueError):
        group_from_spec({"dim": 2})


def test_random_probe_inside_ball(rng):
    for G in (matrix_log(3), padic_congruence(1, 5)):
        for lvl in ("A", "Z"):
            assert G.contains(random_probe(G, rng, lvl), lvl)
