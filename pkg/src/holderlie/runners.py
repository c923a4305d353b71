"""Experiment drivers behind the CLI commands. Each returns a :class:`Report`."""

from __future__ import annotations

import math

import numpy as np

from .config import ConfigError, ExperimentConfig
from .core import SeminormFamily
from .differentiability import abs_counterexample, chain_rule_test, feeble_check, tangency_check
from .extraction import (ExtractionConfig, additivity_defect, additivity_slope, dyadic_partial,
                         effective_alpha, lambda_limit, linearize, padic_partial, total_diff_residual)
from .groups import matrix_log, random_probe
from .holder import (bootstrap_constants, bootstrap_iterate, bootstrap_verify, estimate_holder,
                     globalize_check, group_operation, lipschitz_of_c1_check)
from .homomorphisms import corpus, padic_corpus, power_norm_fixture
from .padic import as_fraction, vector_valuation
from .reports import Report
from .taylor import fd_jacobian

TELESCOPING_TOL = 1e-9
TELESCOPING_DEPTH = 20
PADIC_DEPTH = 6
RATE_TOL = 0.15
LAMBDA_TOL = 1e-6
HOLDER_TOL = 0.05


def _maxabs(v) -> float:
    return float(np.max(np.abs(np.asarray(v, float)))) if np.size(v) else 0.0


def _extraction_config(cfg: ExperimentConfig, seed: int) -> ExtractionConfig:
    return ExtractionConfig(tol=cfg.tol, n_max=cfg.n_max, alpha=cfg.alpha, bootstrap=cfg.bootstrap,
                            seed=seed)


def _alpha_or_config_error(g, ecfg: ExtractionConfig) -> float:
    try:
        return effective_alpha(g, ecfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# shared row emitters


def telescoping_rows(report: Report, g, x, label, depth: int = TELESCOPING_DEPTH) -> None:
    """Direct and series sides of the dyadic identity for every n <= depth."""
    ps = dyadic_partial(g, x, depth)
    gx = g(x)
    acc = gx
    for n in range(depth + 1):
        if n > 0:
            acc = acc - ps.summands[n - 1]
        direct = 2.0 ** n * g(x * 2.0 ** (-n))
        err = _maxabs(direct - acc)
        report.add("telescoping", label, n, err, TELESCOPING_TOL, err <= TELESCOPING_TOL)


def padic_identity_rows(report: Report, g, x, label, depth: int = PADIC_DEPTH) -> None:
    for n in range(depth + 1):
        ps = padic_partial(g, x, n)
        v = vector_valuation(ps.direct - ps.series, g.field.p)
        report.add("padic_identity", label, n, v, "inf", v == math.inf)


def extraction_rows(report: Report, g, x, label, ecfg: ExtractionConfig, alpha: float):
    lam, rep = lambda_limit(g, x, ecfg)
    if rep.degenerate:
        report.add("convergence", label, 0, 0.0, ecfg.tol, True)
        return lam, rep
    report.add("convergence", label, rep.n_converged, len(rep.partials) - 1, ecfg.n_max or "default",
               rep.converged)
    cert = rep.certificate
    worst = max(cert.witness.values())
    report.add("certificate", label, f"a={cert.gauge}", worst, cert.cap, cert.passed)
    for qname, n, m, lhs, rhs, ok in rep.tail_rows:
        report.add("tail", f"{label}:{qname}", f"{n},{m}", lhs, rhs, ok)
    for qname, c in rep.constants.items():
        if isinstance(c, dict) and c.get("p") is None:
            report.add("summand_bound", f"{label}:{qname}", "", "none", "found", False)
    if rep.decay_slope is not None and not g.field.is_padic:
        expected = 1 - 2 * alpha
        report.add("summand_slope", label, "k", rep.decay_slope, expected + RATE_TOL,
                   rep.decay_slope <= expected + RATE_TOL)
    return lam, rep


def lambda_rows(report: Report, M, expected, tol, exact: bool) -> bool:
    ok = True
    for (i, j), val in np.ndenumerate(np.asarray(M, dtype=object)):
        ref = expected[i][j]
        if exact:
            good = as_fraction(val) == as_fraction(ref)
        else:
            good = abs(float(val) - float(ref)) <= tol
        ok &= report.add("lambda", f"[{i},{j}]", "", val, ref, good)
    return ok


# ---------------------------------------------------------------------------
# commands


def run_extract(cfg: ExperimentConfig, seed: int | None = None) -> Report:
    seed = cfg.seed if seed is None else seed
    g = cfg.build_homomorphism()
    if g.field.is_padic:
        raise ConfigError("p-adic homomorphisms are handled by the `padic` command")
    report = Report(cfg.experiment, "extract", seed)
    ecfg = _extraction_config(cfg, seed)
    alpha = _alpha_or_config_error(g, ecfg)
    ecfg.alpha = alpha
    report.note("map", g.name)
    report.note("alpha", alpha)
    S = g.source
    rng = np.random.default_rng(seed)
    probes = [random_probe(S, rng, "A") for _ in range(cfg.probe_count)]
    for i, x in enumerate(probes):
        telescoping_rows(report, g, x, i, min(TELESCOPING_DEPTH, ecfg.n_max or TELESCOPING_DEPTH))
        lam, rep = extraction_rows(report, g, x, i, ecfg, alpha)
        if not rep.degenerate:
            half, _ = lambda_limit(g, 0.5 * x, ecfg)
            err = max(float(q(2 * half - lam)) for q in g.target.family)
            scale = max(1.0, max(float(q(lam)) for q in g.target.family))
            report.add("halving", i, 1, err, 10 * ecfg.tol * scale, err <= 10 * ecfg.tol * scale)
    zprobes = [random_probe(S, rng, "Z") for _ in range(2)]
    for n in range(0, 13):
        d = additivity_defect(g, zprobes[0], zprobes[1], n)
        err = _maxabs(d.direct - d.via_r)
        report.add("additivity", "0+1", n, err, TELESCOPING_TOL, err <= TELESCOPING_TOL)
    D = linearize(g, ecfg)
    report.add("validation", "held-out", "", D.worst, 1e-8, D.passed)
    expected = cfg.expected.get("lambda")
    if expected is None and g.reference is not None:
        expected = np.asarray(g.reference).tolist()
        report.note("lambda_reference", "closed form of the built-in")
    if expected is not None:
        lambda_rows(report, D.matrix, expected, float(cfg.expected.get("lambda_tol", LAMBDA_TOL)), False)
    if alpha > 0.5:
        rr = total_diff_residual(g, D.matrix, probes, alpha)
        for qname, idx, n, res, rhs, ok in rr.rows:
            report.add("residual", f"{idx}:{qname}", n, res, rhs, ok)
        for (qname, idx), s in sorted(rr.slopes.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            if s is not None:
                report.add("residual_slope", f"{idx}:{qname}", "", s, 2 * alpha - 0.1, s >= 2 * alpha - 0.1)
    return report.finish()


def run_padic(cfg: ExperimentConfig, seed: int | None = None) -> Report:
    seed = cfg.seed if seed is None else seed
    g = cfg.build_homomorphism()
    if not g.field.is_padic:
        raise ConfigError("the `padic` command needs a p-adic homomorphism")
    report = Report(cfg.experiment, "padic", seed)
    ecfg = _extraction_config(cfg, seed)
    alpha = _alpha_or_config_error(g, ecfg)
    ecfg.alpha = alpha
    report.note("map", g.name)
    report.note("p", g.field.p)
    report.note("prec", g.field.prec)
    rng = np.random.default_rng(seed)
    for i in range(cfg.probe_count):
        x = random_probe(g.source, rng, "A")
        padic_identity_rows(report, g, x, i, min(PADIC_DEPTH, ecfg.n_max or PADIC_DEPTH))
        extraction_rows(report, g, x, i, ecfg, alpha)
    D = linearize(g, ecfg)
    report.add("validation", "held-out", "", D.worst, 0, D.passed)
    expected = cfg.expected.get("lambda")
    if expected is None and g.reference is not None:
        expected = [[str(v) for v in row] for row in np.asarray(g.reference, dtype=object)]
    if expected is not None:
        lambda_rows(report, D.matrix, expected, 0, True)
    return report.finish()


def run_holder(cfg: ExperimentConfig, seed: int | None = None) -> Report:
    seed = cfg.seed if seed is None else seed
    g = cfg.build_homomorphism()
    report = Report(cfg.experiment, "holder", seed)
    S, T = g.source, g.target
    radius = None if S.field.is_padic else float(S.radius_of("P")) / 2
    est = estimate_holder(g, S.zero(), T.seminorm, S.seminorm, **({} if radius is None else {"radius": radius}))
    tol = float(cfg.expected.get("alpha_tol", HOLDER_TOL))
    target = cfg.expected.get("alpha", cfg.alpha if cfg.alpha is not None else g.alpha)
    report.note("map", g.name)
    if est.locally_constant:
        report.add("holder", "0", "locally constant", "undefined", target, target is None)
        return report.finish()
    ok = est.exponent is not None and (target is None or abs(est.exponent - float(target)) <= tol)
    report.add("holder", "0", f"{est.scales[0]}..{est.scales[-1]}", est.exponent,
               "-" if target is None else float(target), ok)
    report.note("constant", est.constant)
    report.note("regression_residual", est.residual)
    if g.spec.get("map") != "power_norm" and not S.field.is_padic:
        rng = np.random.default_rng(seed)
        for i in range(cfg.probe_count):
            x0 = random_probe(S, rng, "V", fraction=0.5)
            gr = globalize_check(g, x0)
            report.add("globalize", i, "", gr.at_x0.exponent, gr.at_identity.exponent, gr.passed)
    return report.finish()


def run_bootstrap(cfg: ExperimentConfig, seed: int | None = None) -> Report:
    seed = cfg.seed if seed is None else seed
    g = cfg.build_homomorphism()
    alpha = cfg.alpha if cfg.alpha is not None else g.alpha
    if alpha is None:
        raise ConfigError("the `bootstrap` command needs a declared alpha")
    if not alpha <= 0.5:
        raise ConfigError(f"alpha = {alpha} > 1/2 needs no bootstrap; use `extract`")
    if g.field.is_padic:
        raise ConfigError("the bootstrap ledger is implemented for real groups")
    report = Report(cfg.experiment, "bootstrap", seed)
    k, beta = bootstrap_iterate(alpha)
    report.add("bootstrap_iterate", "", k, beta, "]1/2,1]", 0.5 < beta <= 1)
    const = bootstrap_constants(alpha)
    report.add("constants", "c", "", const["c"], 1.0, const["c"] > 1)
    report.add("constants", "K", "", const["K"], 1.0, const["K"] > 1)
    report.note("K1", const["K1"])
    S = g.source
    rng = np.random.default_rng(seed)
    probes = [random_probe(S, rng, "A") for _ in range(cfg.probe_count)]
    ledger = bootstrap_verify(g, alpha, g.target.seminorm, probes, cfg.n_max or 20,
                              ExtractionConfig(seed=seed))
    report.note("ledger_status", ledger.status)
    report.note("p", ledger.p)
    for kind, idx, n, lhs, rhs, ok in ledger.rows:
        report.add(kind, idx, n, lhs, rhs, ok)
    ecfg = _extraction_config(cfg, seed)
    ecfg.bootstrap = True
    ecfg.alpha = alpha
    for i, x in enumerate(probes):
        _, rep = lambda_limit(g, x, ecfg)
        report.add("convergence", i, rep.n_converged, rep.alpha, beta, rep.converged)
    return report.finish()


# ---------------------------------------------------------------------------
# invariant suite


def run_verify(cfg: ExperimentConfig | None = None, seed: int | None = None) -> Report:
    if seed is None:
        seed = cfg.seed if cfg is not None else 0
    count = cfg.probe_count if cfg is not None else 3
    report = Report(cfg.experiment if cfg is not None else "verify", "verify", seed)
    rng = np.random.default_rng(seed)
    ecfg = ExtractionConfig(alpha=1.0, seed=seed)
    real = corpus()

    for g in real:
        probes = [random_probe(g.source, rng, "A") for _ in range(count)]
        for i, x in enumerate(probes):
            telescoping_rows(report, g, x, f"{g.name}:{i}")
            extraction_rows(report, g, x, f"{g.name}:{i}", ecfg, 1.0)
        D = linearize(g, ecfg)
        report.add("validation", g.name, "", D.worst, 1e-8, D.passed)
        err = _maxabs(D.matrix - g.reference)
        report.add("lambda_reference", g.name, "", err, LAMBDA_TOL, err <= LAMBDA_TOL)
        if not g.source.abelian:
            zp = [random_probe(g.source, rng, "Z") for _ in range(2)]
            s = additivity_slope(g, zp[0], zp[1], range(2, 16))
            if s is not None:
                report.add("additivity_slope", g.name, "n", s, -1.0, abs(s + 1.0) <= RATE_TOL)
        rr = total_diff_residual(g, D.matrix, probes[:1], 1.0)
        report.add("residual", g.name, "", sum(not r[-1] for r in rr.rows), 0, rr.passed)

    for g in padic_corpus():
        for i in range(count):
            x = random_probe(g.source, rng, "A")
            padic_identity_rows(report, g, x, f"{g.name}:{i}")
        D = linearize(g, ecfg)
        ok = bool(np.all(D.matrix == g.reference))
        report.add("padic_lambda", g.name, "", str(D.matrix[0, 0]), str(g.reference[0, 0]), ok and D.passed)

    for alpha in (0.3, 0.4, 0.5):
        k, beta = bootstrap_iterate(alpha)
        report.add("bootstrap_iterate", alpha, k, beta, "]1/2,1]", 0.5 < beta <= 1)
    for g in real:
        probes = [random_probe(g.source, rng, "A") for _ in range(2)]
        ledger = bootstrap_verify(g, 0.5, g.target.seminorm, probes, 12, ExtractionConfig(seed=seed))
        report.add("bootstrap_ledger", g.name, len(ledger.rows), ledger.status, "pass",
                   ledger.status == "pass")

    fam = SeminormFamily.standard(2)
    for beta in (0.3, 0.5, 0.7, 1.0):
        g = power_norm_fixture(beta, [1.0, -2.0], 2)
        est = estimate_holder(g, np.zeros(2), fam["max"], fam["max"], radius=0.5)
        report.add("holder_calibration", beta, "", est.exponent, beta,
                   est.exponent is not None and abs(est.exponent - beta) <= HOLDER_TOL)
    for g in real:
        x0 = random_probe(g.source, rng, "V", fraction=0.5)
        gr = globalize_check(g, x0)
        report.add("globalize", g.name, "", gr.at_x0.exponent, gr.at_identity.exponent, gr.passed)

    G = matrix_log(2)
    for name in ("mu", "iota", "sigma", "tau"):
        f = group_operation(G, name)
        dim = G.dim * f.arity
        fam_d = SeminormFamily.standard(dim)
        lr = lipschitz_of_c1_check(f, np.zeros(dim), G.seminorm, fam_d["max"], radius=1e-3)
        report.add("lipschitz", name, "", lr.estimate.exponent, 0.95, lr.passed)

    for g in real:
        S, T = g.source, g.target
        r = float(S.radius_of("V")) / 4
        for x in (S.zero(), random_probe(S, rng, "V", fraction=0.5)):
            J = fd_jacobian(g, x)
            tan = tangency_check(lambda y: g(x + y) - g(x), T.seminorm, S.seminorm, J, radius=r)
            feeb = feeble_check(g, x, J, scale=r / 3)
            report.add("tangency", g.name, "", min(tan.deltas.values()), 0.0, tan.passed)
            report.add("feeble", g.name, "", len(feeb.probes), "all", feeb.passed)
            report.add("total_implies_feeble", g.name, "", tan.passed, feeb.passed,
                       (not tan.passed) or feeb.passed)
    cx = feeble_check(abs_counterexample, [0.0], [[0.0]])
    report.add("abs_counterexample", "0", "", cx.passed, False, not cx.passed)

    x0 = np.array([0.01, 0.02, -0.01, 0.005])
    ch = chain_rule_test(lambda y: G.mul(x0, y), G.inv, np.zeros(4))
    report.add("chain_rule", "mu,iota", "", ch.fd_error, LAMBDA_TOL, ch.passed)
    ch = chain_rule_test(lambda t: t ** 2, lambda t: t ** 3, np.array([1.0]))
    report.add("chain_rule", "x^2,x^3", "", float(ch.derivative[0, 0]), 6.0,
               ch.passed and abs(ch.derivative[0, 0] - 6.0) <= LAMBDA_TOL)
    return report.finish()


COMMANDS = {
    "extract": run_extract,
    "holder": run_holder,
    "bootstrap": run_bootstrap,
    "padic": run_padic,
    "verify": run_verify,
}
