"""Derivative extraction from a black-box homomorphism.

Real case: the dyadic partial values 2^n g(2^-n x) and their series form

    2^n g(2^-n x) = g(x) - sum_{k=1}^n 2^(k-1) (h(2^(1-k) x) + R(g(2^-k x), h(2^(1-k) x)))

with h(x) = g((x/2)^-2 * x) and R the quadratic part of sigma(x, y) = x*x*y.

p-adic case: g(p^n x) / p^n with the summands p^-k (h(p^(k-1) x) + R(...)) ADDED,
h(x) = g(x^-p * p x) and sigma(x, y) = x^p * y. The two cases are separate
code paths on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (DEFAULT_WITNESS_CAP, MackeyCauchyCertificate, Seminorm, default_padic_theta,
                   default_real_gauge, domination_constant, mackey_cauchy_certify, padic_gauge)
from .groups import j_defect, squaring_defect
from .homomorphisms import BlackBoxHomomorphism
from .padic import padic_round, vector_valuation
from .taylor import defect_D, defect_R

REAL_N_MAX = 40
RESIDUAL_FLOOR = 1e-12  # relative size below which a residual counts as rounding noise


@dataclass
class ExtractionConfig:
    tol: float = 1e-10
    n_max: int | None = None
    alpha: float | None = None
    bootstrap: bool = False
    cap: float = DEFAULT_WITNESS_CAP
    digits: int | None = None  # p-adic relative precision; default prec - 2
    seed: int = 0
    max_scale_power: int = 40
    lanull_probes: int = 16


def _n_max(g: BlackBoxHomomorphism, config: ExtractionConfig) -> int:
    if config.n_max is not None:
        return config.n_max
    return g.field.prec - 2 if g.field.is_padic else REAL_N_MAX


def _digits(g: BlackBoxHomomorphism, config: ExtractionConfig) -> int:
    return config.digits if config.digits is not None else g.field.prec - 2


def _check_field(g: BlackBoxHomomorphism, padic: bool, op: str) -> None:
    if g.source.field.is_padic != padic or g.target.field.is_padic != padic:
        kind = "p-adic" if padic else "real"
        raise ValueError(f"{op} needs {kind} source and target groups")


# ---------------------------------------------------------------------------
# defect maps


def defect_h(g: BlackBoxHomomorphism, x):
    """h(x) = g((x/2)^-2 * x) for x in the A-ball (real)."""
    _check_field(g, False, "defect_h")
    g.source.require(x, "A", "h")
    out = g(squaring_defect(g.source, x))
    g.target.require(out, "W", "h (value)")
    return out


def defect_h_padic(g: BlackBoxHomomorphism, x):
    """h(x) = g(x^-p * p x) for x in the A-ball (p-adic)."""
    _check_field(g, True, "defect_h_padic")
    g.source.require(x, "A", "h")
    out = g(squaring_defect(g.source, x))
    g.target.require(out, "W", "h (value)")
    return out


def lanull_term(g: BlackBoxHomomorphism, x):
    """h(x) + R(g(x/2), h(x)) (real) or h(x) + R(g(x), h(x)) (p-adic)."""
    if g.field.is_padic:
        hx = defect_h_padic(g, x)
        return hx + defect_R(g.target, g(x), hx)
    hx = defect_h(g, x)
    return hx + defect_R(g.target, g(0.5 * x), hx)


def dyadic_summand(g: BlackBoxHomomorphism, x, k: int):
    """2^(k-1) (h(2^(1-k) x) + R(g(2^-k x), h(2^(1-k) x)))."""
    y = x * 2.0 ** (1 - k)
    hy = defect_h(g, y)
    return 2.0 ** (k - 1) * (hy + defect_R(g.target, g(x * 2.0 ** (-k)), hy))


def padic_summand(g: BlackBoxHomomorphism, x, k: int):
    """p^-k (h(p^(k-1) x) + R(g(p^(k-1) x), h(p^(k-1) x)))."""
    P = Fraction(g.field.p)
    y = x * P ** (k - 1)
    hy = defect_h_padic(g, y)
    return (hy + defect_R(g.target, g(y), hy)) / P ** k


@dataclass
class PartialSums:
    direct: np.ndarray
    series: np.ndarray
    summands: list


def dyadic_partial(g: BlackBoxHomomorphism, x, n: int, n_max: int = REAL_N_MAX) -> PartialSums:
    """Both sides of the dyadic telescoping identity at depth n."""
    _check_field(g, False, "dyadic_partial")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > n_max:
        raise OverflowError(f"n = {n} exceeds n_max = {n_max}")
    g.source.require(x, "A", "dyadic_partial")
    direct = 2.0 ** n * g(x * 2.0 ** (-n))
    summands = [dyadic_summand(g, x, k) for k in range(1, n + 1)]
    series = g(x) - sum(summands, g.target.zero())
    return PartialSums(direct, series, summands)


def padic_partial(g: BlackBoxHomomorphism, x, n: int, n_max: int | None = None) -> PartialSums:
    """Both sides of the p-adic identity g(p^n x)/p^n = g(x) + sum of summands."""
    _check_field(g, True, "padic_partial")
    n_max = g.field.prec - 2 if n_max is None else n_max
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > n_max:
        raise OverflowError(f"n = {n} exceeds n_max = {n_max}")
    g.source.require(x, "A", "padic_partial")
    P = Fraction(g.field.p)
    direct = g(x * P ** n) / P ** n
    summands = [padic_summand(g, x, k) for k in range(1, n + 1)]
    series = g(x) + sum(summands, g.target.zero())
    return PartialSums(direct, series, summands)


def one_parameter_extract(xi, target, n: int) -> PartialSums:
    """xi(2^-n)/2^-n = xi(1) - sum_k 2^(k-1) R(xi(2^-k)), R(u) = u*u - 2u."""
    if n < 0:
        raise ValueError("n must be nonnegative")

    def R(u):
        target.require(u, "W", "one_parameter_extract")
        return target.mul(u, u) - 2 * u

    direct = 2.0 ** n * xi(2.0 ** (-n))
    summands = [2.0 ** (k - 1) * R(xi(2.0 ** (-k))) for k in range(1, n + 1)]
    series = xi(1.0) - sum(summands, target.zero())
    return PartialSums(direct, series, summands)


# ---------------------------------------------------------------------------
# constants from the convergence proof


def tail_ratio(alpha: float) -> float:
    """2^-(2 alpha - 1)."""
    return 2.0 ** (-(2 * alpha - 1))


def tail_constant_K(alpha: float, N: int) -> float:
    """K = C 2^(2 alpha - 1) / (1 - 2^-(2 alpha - 1)) with C = 2^(2 alpha N)."""
    return 2.0 ** (2 * alpha * N) * 2.0 ** (2 * alpha - 1) / (1 - tail_ratio(alpha))


def residual_constant(alpha: float, terms: int | None = None) -> float:
    """c = 2^(2a-1) sum_{k>=1} 2^(-(2a-1)k), summed until terms stop mattering."""
    rho = tail_ratio(alpha)
    if not rho < 1:
        raise ValueError("the residual series needs alpha > 1/2")
    total, k = 0.0, 1
    while True:
        term = rho ** k
        total += term
        if term < 1e-17 * total or (terms is not None and k >= terms):
            break
        k += 1
    return 2.0 ** (2 * alpha - 1) * total


# ---------------------------------------------------------------------------
# seminorm search for the summand bound


@dataclass
class SummandBound:
    """Scaled source seminorm p for which ||summand(x)||_q <= ||x||_p^(2 alpha)
    and ||g(x)||_q <= ||x||_p^alpha hold on every probe of B_1^p(0)."""

    q: str
    p: Seminorm | None
    scale: float | None
    rows: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.p is not None


def _ball_probes(g: BlackBoxHomomorphism, p: Seminorm, rng, count: int) -> list:
    S = g.source
    probes = []
    for _ in range(count):
        d = rng.standard_normal(S.dim)
        probes.append(d * rng.uniform(0.05, 0.999) / p(d))
    return probes


def summand_bound(g: BlackBoxHomomorphism, q: Seminorm, alpha: float, extra_probes=(),
                  config: ExtractionConfig | None = None) -> SummandBound:
    """Search p = 2^s * (designated source seminorm), real case."""
    config = config or ExtractionConfig()
    S = g.source
    base = S.seminorm
    radius_A = S.radius_of("A")
    for s in range(config.max_scale_power + 1):
        scale = 2.0 ** s
        p = base.scaled(scale, name=f"2^{s}*{base.name}")
        if domination_constant(base, p) >= radius_A:
            continue
        rng = np.random.default_rng(config.seed)
        probes = [y for y in extra_probes if p(y) < 1] + _ball_probes(g, p, rng, config.lanull_probes)
        rows, ok = [], True
        for y in probes:
            py = p(y)
            lhs1 = q(lanull_term(g, y))
            lhs2 = q(g(y))
            ok1 = lhs1 <= py ** (2 * alpha)
            ok2 = lhs2 <= py ** alpha
            rows.append((y, py, lhs1, py ** (2 * alpha), ok1, lhs2, py ** alpha, ok2))
            if not (ok1 and ok2):
                ok = False
                break
        if ok:
            return SummandBound(q.name, p, scale, rows)
    return SummandBound(q.name, None, None, [])


# ---------------------------------------------------------------------------
# the limit lambda(x)


@dataclass
class ExtractionReport:
    x: np.ndarray
    alpha: float | None
    partials: list
    series: list
    summands: list
    telescoping_error: float
    n_converged: int | None
    converged: bool
    value: np.ndarray
    certificate: MackeyCauchyCertificate | None
    decay_slope: float | None
    constants: dict = field(default_factory=dict)
    tail_rows: list = field(default_factory=list)
    degenerate: bool = False
    message: str = ""

    @property
    def tail_ok(self) -> bool:
        return all(r[-1] for r in self.tail_rows)


def effective_alpha(g: BlackBoxHomomorphism, config: ExtractionConfig) -> float:
    """Declared exponent, else estimated at 0; capped at 1; bootstrapped if asked."""
    alpha = config.alpha if config.alpha is not None else g.alpha
    if alpha is None:
        from .holder import estimate_holder
        est = estimate_holder(g, g.source.zero(), g.target.seminorm, g.source.seminorm,
                              radius=g.source.radius_of("A") / 2)
        if est.exponent is None:
            alpha = 1.0
        else:
            alpha = est.exponent
    alpha = min(float(alpha), 1.0)
    if alpha <= 0.5:
        if not config.bootstrap:
            raise ValueError(
                f"effective alpha = {alpha} <= 1/2: the extraction series is not known to converge; "
                "raise the exponent first with the holder module (`bootstrap` command or bootstrap=True)")
        from .holder import bootstrap_iterate
        _, alpha = bootstrap_iterate(alpha)
    return alpha


def _slope(xs, ys) -> float | None:
    if len(xs) < 3:
        return None
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def decay_slope(summands, norm, base: float = 2.0) -> float | None:
    """log_base-slope of ||summand_k|| against k over nonzero summands."""
    ks, logs = [], []
    for k, s in enumerate(summands, start=1):
        v = float(norm(s))
        if v > 0:
            ks.append(k)
            logs.append(math.log(v, base))
    return _slope(ks, logs)


def lambda_limit(g: BlackBoxHomomorphism, x, config: ExtractionConfig | None = None):
    """Return (lambda(x), report)."""
    config = config or ExtractionConfig()
    if g.field.is_padic:
        return _lambda_limit_padic(g, x, config)
    return _lambda_limit_real(g, x, config)


def _lambda_limit_real(g, x, config):
    _check_field(g, False, "lambda_limit")
    S, T = g.source, g.target
    S.require(x, "A", "lambda_limit")
    alpha = effective_alpha(g, config)
    n_max = _n_max(g, config)
    if all(float(q(x)) == 0 for q in S.family):
        zero = T.zero()
        return zero, ExtractionReport(x, alpha, [zero], [zero], [], 0.0, 0, True, zero, None, None,
                                      degenerate=True, message="degenerate probe: lambda(x) := 0")

    partials = [g(x)]
    n_conv = None
    n = 0
    while n < n_max:
        n += 1
        partials.append(2.0 ** n * g(x * 2.0 ** (-n)))
        diff = partials[-1] - partials[-2]
        if n_conv is None and all(q(diff) < config.tol for q in T.family):
            n_conv = n - 1
        if n_conv is not None and len(partials) >= max(3, n_conv + 3):
            break
    value = partials[n_conv] if n_conv is not None else partials[-1]

    summands = [dyadic_summand(g, x, k) for k in range(1, len(partials))]
    series, acc = [partials[0]], partials[0]
    for s in summands:
        acc = acc - s
        series.append(acc)
    tele = max(float(np.max(np.abs(d - s))) for d, s in zip(partials, series))

    a = default_real_gauge(alpha)
    cert = mackey_cauchy_certify(partials, a, T.family, cap=config.cap)
    converged = n_conv is not None and cert.passed
    slope = decay_slope(summands, T.seminorm)

    constants, tail_rows = {}, []
    orbit = [x * 2.0 ** (1 - k) for k in range(1, len(partials) + 1)]
    for q in T.family:
        sb = summand_bound(g, q, alpha, orbit, config)
        if not sb.found:
            constants[q.name] = {"p": None}
            continue
        px = float(sb.p(x))
        N = 1
        while 2.0 ** (-N) * px >= 1:
            N += 1
        K = tail_constant_K(alpha, N)
        constants[q.name] = {"p": sb.p.name, "scale": sb.scale, "N": N, "C": 2.0 ** (2 * alpha * N), "K": K}
        rho = tail_ratio(alpha)
        for i in range(N, len(partials)):
            for j in range(i + 1, len(partials)):
                lhs = float(q(partials[j] - partials[i]))
                rhs = K * rho ** (i + 1)
                tail_rows.append((q.name, i, j, lhs, rhs, lhs <= rhs))
    if n_conv is None:
        msg = f"no convergence within n_max = {n_max}"
    else:
        msg = "" if cert.passed else f"certificate failed: {cert.reason}"
    return value, ExtractionReport(x, alpha, partials, series, summands, tele, n_conv, converged,
                                   value, cert, slope, constants, tail_rows, message=msg)


def _lambda_limit_padic(g, x, config):
    _check_field(g, True, "lambda_limit")
    S, T = g.source, g.target
    S.require(x, "A", "lambda_limit")
    p = g.field.p
    P = Fraction(p)
    alpha = effective_alpha(g, config)
    n_max = _n_max(g, config)
    digits = _digits(g, config)
    vx = vector_valuation(x, p)
    if vx == math.inf:
        zero = T.zero()
        return zero, ExtractionReport(x, alpha, [zero], [zero], [], 0.0, 0, True, zero, None, None,
                                      degenerate=True, message="degenerate probe: lambda(x) := 0")
    partials = [g(x)]
    n_conv = None
    n = 0
    while n < n_max:
        n += 1
        partials.append(g(x * P ** n) / P ** n)
        if n_conv is None and vector_valuation(partials[-1] - partials[-2], p) - vx >= digits:
            n_conv = n - 1
        if n_conv is not None and len(partials) >= max(3, n_conv + 3):
            break
    value = partials[n_conv] if n_conv is not None else partials[-1]
    summands = [padic_summand(g, x, k) for k in range(1, len(partials))]
    series, acc = [partials[0]], partials[0]
    for s in summands:
        acc = acc + s
        series.append(acc)
    exact = all(np.all(d == s) for d, s in zip(partials, series))
    theta = default_padic_theta(alpha)
    cert = mackey_cauchy_certify(partials, P, T.family, cap=config.cap,
                                 gauge=lambda n_, m_: padic_gauge(theta, n_, m_, p))
    converged = n_conv is not None and cert.passed
    slope = decay_slope(summands, T.seminorm, base=float(p))
    if n_conv is None:
        msg = f"no stabilisation to {digits} digits within n_max = {n_max}"
    else:
        msg = "" if cert.passed else f"certificate failed: {cert.reason}"
    return value, ExtractionReport(x, alpha, partials, series, summands, 0.0 if exact else math.inf,
                                   n_conv, converged, value, cert, slope,
                                   {"theta": str(theta), "digits": digits}, [], message=msg)


# ---------------------------------------------------------------------------
# additivity


@dataclass
class AdditivityDefect:
    direct: np.ndarray
    via_r: np.ndarray
    n: int


def additivity_defect(g: BlackBoxHomomorphism, x, y, n: int) -> AdditivityDefect:
    """2^n [g(2^-n(x+y)) - g(2^-n x) - g(2^-n y)], directly and as 2^n r_n.

    r_n = g(j(x', y')) + D(g(x'), g(y'), g(j(x', y'))) with x' = 2^-n x. The
    p-adic version uses p^n x and the factor p^-n.
    """
    S, T = g.source, g.target
    if g.field.is_padic:
        P = Fraction(g.field.p)
        s, back = P ** n, P ** (-n)
    else:
        s, back = 2.0 ** (-n), 2.0 ** n
    xs, ys = x * s, y * s
    direct = back * (g(xs + ys) - g(xs) - g(ys))
    gj = g(j_defect(S, xs, ys))
    via = back * (gj + defect_D(T, g(xs), g(ys), gj))
    return AdditivityDefect(direct, via, n)


def additivity_slope(g: BlackBoxHomomorphism, x, y, ns) -> float | None:
    """log_2-slope of ||2^n r_n|| against n (real).

    Values below RESIDUAL_FLOOR * max(||x||, ||y||) are rounding noise of an
    exactly additive map and are left out; None if fewer than 3 remain.
    """
    q = g.target.seminorm
    floor = RESIDUAL_FLOOR * max(float(g.source.seminorm(x)), float(g.source.seminorm(y)))
    xs, ls = [], []
    for n in ns:
        v = float(q(additivity_defect(g, x, y, n).via_r))
        if v > floor:
            xs.append(n)
            ls.append(math.log2(v))
    return _slope(xs, ls)


# ---------------------------------------------------------------------------
# linearization and total differentiability


@dataclass
class DerivativeCandidate:
    matrix: np.ndarray
    reports: list
    validation: list
    worst: float
    worst_probe: np.ndarray | None
    passed: bool


def basis_scale(g: BlackBoxHomomorphism, i: int):
    """Scalar r with r e_i inside half of the A-ball."""
    S = g.source
    e = S.zero()
    e[i] = S.scalar_one()
    if S.field.is_padic:
        P = Fraction(S.field.p)
        k = 0
        half = Fraction(S.radius_of("A")) / 2
        while S.seminorm(e * P ** k) >= half:
            k += 1
        return P ** k
    return S.radius_of("A") / 2 / float(S.seminorm(e))


def linearize(g: BlackBoxHomomorphism, config: ExtractionConfig | None = None, probes=None,
              n_probes: int = 5, val_tol: float = 1e-8) -> DerivativeCandidate:
    """Assemble Lambda column by column from lambda(r e_i) / r and validate it."""
    from .groups import random_probe

    config = config or ExtractionConfig()
    S, T = g.source, g.target
    padic = S.field.is_padic
    cols, reports = [], []
    for i in range(S.dim):
        r = basis_scale(g, i)
        e = S.zero()
        e[i] = S.scalar_one()
        lam, rep = lambda_limit(g, e * r, config)
        reports.append(rep)
        cols.append(lam / r)
    if padic:
        digits = _digits(g, config)
        M = np.empty((T.dim, S.dim), dtype=object)
        for i, c in enumerate(cols):
            for k in range(T.dim):
                M[k, i] = padic_round(c[k], S.field.p, digits)
    else:
        M = np.column_stack(cols)
    if probes is None:
        rng = np.random.default_rng(config.seed + 1)
        probes = [random_probe(S, rng, "A") for _ in range(n_probes)]
    rows, worst, worst_probe, ok = [], 0.0, None, True
    for x in probes:
        lam, rep = lambda_limit(g, x, config)
        diff = lam - M @ x
        if padic:
            p = S.field.p
            slack = vector_valuation(diff, p) - vector_valuation(x, p)
            good = slack >= _digits(g, config) - 1
            err = float(T.seminorm(diff))
        else:
            err = max(float(q(diff)) for q in T.family)
            good = err <= val_tol
        rows.append((x, err, good))
        if err >= worst:
            worst, worst_probe = err, x
        ok &= bool(good) and rep.converged
    ok &= all(r.converged for r in reports)
    return DerivativeCandidate(M, reports, rows, worst, worst_probe, ok)


@dataclass
class ResidualReport:
    alpha: float
    c: float
    rows: list
    slopes: dict
    bound_ok: bool
    slope_ok: bool

    @property
    def passed(self) -> bool:
        return self.bound_ok and self.slope_ok


def total_diff_residual(g: BlackBoxHomomorphism, Lam, probes, alpha: float,
                        scales=range(0, 12), config: ExtractionConfig | None = None) -> ResidualReport:
    """Check ||g(x) - Lambda x||_q <= c ||x||_p^(2 alpha) along dyadic rays.

    p is the scaled source seminorm from :func:`summand_bound` for each target
    seminorm q. The residual exponent is the log-log slope of the residual
    against ||x||_p per probe; residuals below RESIDUAL_FLOOR * ||x|| are
    treated as exact and carry no slope.
    """
    if g.field.is_padic:
        raise ValueError("total_diff_residual is implemented for real groups")
    if not alpha > 0.5:
        raise ValueError("total differentiability bound needs alpha > 1/2")
    config = config or ExtractionConfig()
    T = g.target
    c = residual_constant(alpha)
    rows, slopes, bound_ok = [], {}, True
    for q in T.family:
        orbit = [x * 2.0 ** (-n) for x in probes for n in scales]
        sb = summand_bound(g, q, alpha, orbit, config)
        if not sb.found:
            bound_ok = False
            rows.append((q.name, None, None, None, None, False))
            continue
        for idx, x in enumerate(probes):
            lx, lr = [], []
            for n in scales:
                y = x * 2.0 ** (-n)
                py = float(sb.p(y))
                if not py < 1:
                    continue
                res = float(q(g(y) - Lam @ y))
                rhs = c * py ** (2 * alpha)
                rows.append((q.name, idx, n, res, rhs, res <= rhs))
                bound_ok &= res <= rhs
                if res > RESIDUAL_FLOOR * py / sb.scale:
                    lx.append(math.log(py))
                    lr.append(math.log(res))
            slopes[(q.name, idx)] = _slope(lx, lr)
    measured = [s for s in slopes.values() if s is not None]
    slope_ok = all(s >= 2 * alpha - 0.1 for s in measured)
    return ResidualReport(alpha, c, rows, slopes, bound_ok, slope_ok)
