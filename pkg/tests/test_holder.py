import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holderlie.core import DomainError, SeminormFamily
from holderlie.extraction import ExtractionConfig, lambda_limit
from holderlie.groups import abelian, heisenberg, padic_congruence, random_probe
from holderlie.holder import (bootstrap_constants, bootstrap_iterate, bootstrap_verify,
                              default_directions, estimate_holder, globalize_check,
                              group_operation, holder_at_point, lipschitz_of_c1_check,
                              normalized_seminorm, translated)
from holderlie.homomorphisms import (conjugation, corpus, determinant, heisenberg_chart_change,
                                     linear, power, power_norm_fixture)

MAX1 = SeminormFamily.standard(1)["max"]


def test_default_directions():
    d = default_directions(2)
    assert len(d) == 8
    assert len(default_directions(3, padic=True)) == 9


@pytest.mark.parametrize("beta", [0.5, 0.7, 0.9])
def test_estimate_power_norm_fixture(beta):
    g = power_norm_fixture(beta, [1.0])
    est = estimate_holder(g, np.zeros(1), MAX1, MAX1)
    assert est.exponent == pytest.approx(beta, abs=1e-9)
    assert est.constant == pytest.approx(1.0, rel=1e-9)


def test_estimate_sqrt_worst_direction():
    # |x|^(1/2) in the first coordinate, linear in the second
    fam = SeminormFamily.standard(2)

    def g(x):
        return np.array([np.sqrt(abs(x[0])) + x[1]])

    est = estimate_holder(g, np.zeros(2), MAX1, fam["max"])
    assert est.exponent == pytest.approx(0.5, abs=0.02)


def test_estimate_linear_is_one():
    g = linear([[2.0, -1.0]], abelian(2), abelian(1))
    est = estimate_holder(g, np.zeros(2), MAX1, SeminormFamily.standard(2)["max"])
    assert est.exponent == pytest.approx(1.0, abs=1e-9)
    assert 1.0 <= est.constant <= 3.0 + 1e-9


def test_estimate_clamped_at_one():
    g = power_norm_fixture(1.0, [1.0])
    sq = lambda x: g(x) ** 2  # noqa: E731
    est = estimate_holder(sq, np.zeros(1), MAX1, MAX1)
    assert est.exponent == 1.0 and est.raw_slope == pytest.approx(2.0, abs=1e-9)


def test_estimate_locally_constant():
    est = estimate_holder(lambda x: np.array([3.0]), np.zeros(1), MAX1, MAX1)
    assert est.locally_constant and est.exponent is None


def test_estimate_needs_four_scales():
    with pytest.raises(ValueError):
        estimate_holder(lambda x: x, np.zeros(1), MAX1, MAX1, scales=range(3))


@pytest.mark.parametrize("g", corpus(), ids=lambda g: g.name)
def test_corpus_is_lipschitz_at_identity(g):
    est = estimate_holder(g, g.source.zero(), g.target.seminorm, g.source.seminorm,
                          radius=float(g.source.radius_of("A")))
    assert est.locally_constant or est.exponent >= 0.95


def test_padic_power7_exponent_one():
    g = power(7, padic_congruence(1, 5))
    est = estimate_holder(g, g.source.zero(), g.target.seminorm, g.source.seminorm)
    assert est.exponent == pytest.approx(1.0, abs=1e-9)


def test_holder_at_point_and_normalization():
    g = power_norm_fixture(0.7, [1.0])
    assert holder_at_point(g, np.zeros(1), MAX1, MAX1, 0.7, 1.0, 0.5)
    assert not holder_at_point(g, np.zeros(1), MAX1, MAX1, 0.7, 0.5, 0.5)
    p2 = normalized_seminorm(MAX1, 4.0, 0.25, 0.5)
    assert p2(np.array([1.0])) == 16.0
    with pytest.raises(ValueError):
        normalized_seminorm(MAX1, 0.0, 1.0, 0.5)


# -- bootstrap -------------------------------------------------------------------


@pytest.mark.parametrize("alpha,c,K1,K", [
    # frozen from a 30-digit mpmath evaluation of 2^(1-3a/2) / (2^(1-3a/2) - 1) and so on
    (0.3, 3.1547744494955625, 2.3908719483520726, 3.3908719483520726),
    (0.4, 4.1298129601266696, 3.5952109987459061, 4.5952109987459061),
    (0.5, 6.2852135078832452, 6.2852135078832452, 7.2852135078832452),
])
def test_bootstrap_constants(alpha, c, K1, K):
    const = bootstrap_constants(alpha)
    assert const["c"] == pytest.approx(c, rel=1e-14)
    assert const["K1"] == pytest.approx(K1, rel=1e-14)
    assert const["K"] == pytest.approx(K, rel=1e-14)
    assert const["beta"] == pytest.approx(1.5 * alpha)


def test_bootstrap_constants_range():
    with pytest.raises(ValueError):
        bootstrap_constants(0.6)


@pytest.mark.parametrize("a0,k,beta", [(0.6, 0, 0.6), (0.3, 2, 0.6749999999999999), (0.5, 1, 0.75)])
def test_bootstrap_iterate_examples(a0, k, beta):
    assert bootstrap_iterate(a0) == (k, beta)


@given(st.floats(1e-3, 1.0))
def test_bootstrap_iterate_minimal(a0):
    k, beta = bootstrap_iterate(a0)
    assert beta > 0.5
    assert beta == pytest.approx(1.5 ** k * a0)
    if k > 0:
        assert 1.5 ** (k - 1) * a0 <= 0.5 + 1e-12


def test_bootstrap_ledger_heisenberg(rng):
    g = heisenberg_chart_change("exp_to_entries")
    probes = [random_probe(g.source, rng, "A") for _ in range(3)]
    led = bootstrap_verify(g, 0.5, g.target.seminorm, probes, n_max=12)
    assert led.status == "pass"
    kinds = {r[0] for r in led.rows}
    assert kinds == {"premise", "decay", "holder_gain"}
    assert led.to_csv().splitlines()[0] == "check,probe,n,lhs,rhs,pass"


def test_bootstrap_premise_failure_is_separate(rng):
    # a tight q with a short scale search leaves no dominating p
    g = heisenberg_chart_change("exp_to_entries")
    q = g.target.seminorm.scaled(1e12)
    probes = [random_probe(g.source, rng, "A")]
    led = bootstrap_verify(g, 0.5, q, probes, n_max=4, config=ExtractionConfig(max_scale_power=2))
    assert led.status == "premise-failure" and not led.premise_ok


def test_bootstrap_then_extract(rng):
    g = determinant(2)
    x = random_probe(g.source, rng, "A")
    lam, rep = lambda_limit(g, x, ExtractionConfig(alpha=0.4, bootstrap=True))
    assert rep.alpha == pytest.approx(0.6) and rep.converged
    assert lam[0] == pytest.approx(x[0] + x[3], abs=1e-8)


def test_bootstrap_padic_rejected():
    g = power(7, padic_congruence(1, 5))
    with pytest.raises(ValueError):
        bootstrap_verify(g, 0.5, g.target.seminorm, [])


# -- globalization ---------------------------------------------------------------


@pytest.mark.parametrize("g", [determinant(2), conjugation([[1.0, 1.0], [0.0, 1.0]]),
                               heisenberg_chart_change("entries_to_exp")], ids=lambda g: g.name)
def test_globalize_matches(g, rng):
    x0 = random_probe(g.source, rng, "A")
    rep = globalize_check(g, x0, alpha=1.0)
    assert rep.passed, rep.message
    assert rep.difference <= 0.05


def test_globalize_power_norm_fixture():
    g = power_norm_fixture(0.7, [1.0])
    rep = globalize_check(g, np.array([0.001]))
    assert rep.at_identity.exponent == pytest.approx(0.7, abs=1e-6)


def test_translated_is_identity_for_homomorphism(rng):
    g = heisenberg_chart_change("entries_to_exp")
    x0 = random_probe(g.source, rng, "A")
    y = random_probe(g.source, rng, "A")
    assert np.allclose(translated(g, x0)(y), g(y), atol=1e-12)


def test_globalize_outside_domain():
    g = determinant(2)
    with pytest.raises(DomainError, match="translated domain empty"):
        globalize_check(g, np.full(4, 10.0))


# -- Lipschitz -------------------------------------------------------------------


@pytest.mark.parametrize("name", ["mu", "iota", "sigma", "tau"])
def test_group_operations_lipschitz(name, rng):
    G = heisenberg("exp")
    f = group_operation(G, name)
    fam_in = SeminormFamily.standard(G.dim * f.arity)
    x0 = np.concatenate([random_probe(G, rng, "A") for _ in range(f.arity)])
    rep = lipschitz_of_c1_check(f, x0, G.seminorm, fam_in["max"])
    assert rep.passed


def test_lipschitz_fails_for_sqrt():
    rep = lipschitz_of_c1_check(lambda x: np.sqrt(np.abs(x)), np.zeros(1), MAX1, MAX1)
    assert not rep.passed


def test_unknown_group_operation():
    with pytest.raises(ValueError):
        group_operation(heisenberg(), "xi")
