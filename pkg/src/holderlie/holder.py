"""Hölder exponent estimation, the 3/2 bootstrap, and globalization checks."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import DomainError, Seminorm
from .groups import LocalChartGroup, iota, mu, sigma, tau
from .homomorphisms import BlackBoxHomomorphism

REAL_SCALES = range(4, 25)
PADIC_SCALES = range(1, 9)
CONSTANT_FLOOR = 1e-14


@dataclass
class HolderEstimate:
    exponent: float | None
    constant: float | None
    q: str
    p: str
    scales: tuple
    residual: float | None
    raw_slope: float | None = None
    direction: np.ndarray | None = None
    locally_constant: bool = False

    @property
    def delta(self):
        """Smallest probed scale (the realized neighbourhood size)."""
        return self.scales[-1] if self.scales else None


def default_directions(dim: int, padic: bool = False) -> list:
    """Basis vectors and pairwise diagonals, with both signs over the reals."""
    eye = [np.eye(dim)[i] for i in range(dim)]
    dirs = list(eye)
    for i, j in itertools.combinations(range(dim), 2):
        dirs.append(eye[i] + eye[j])
        dirs.append(eye[i] - eye[j])
    if padic:
        return [np.array([Fraction(int(v)) for v in d], dtype=object) for d in dirs]
    return dirs + [-d for d in dirs]


def _fit(logs_x, logs_y):
    A = np.vstack([logs_x, np.ones_like(logs_x)]).T
    coef, *_ = np.linalg.lstsq(A, logs_y, rcond=None)
    resid = logs_y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def estimate_holder(g: Callable, x0, q: Seminorm, p: Seminorm, radius: float = 1.0, scales=None,
                    directions=None) -> HolderEstimate:
    """Worst-direction log-log slope of ||g(x0 + s d) - g(x0)||_q against ||s d||_p.

    Real: s = 2^-n with each direction rescaled to ||d||_p = radius. p-adic
    (when ``p`` is p-adic): s = p^n on raw integer directions, regression in
    log base p. The exponent is clamped to at most 1.
    """
    padic = p.field.is_padic
    x0 = np.asarray(x0, dtype=object if padic else float)
    dim = x0.shape[0]
    if scales is None:
        scales = PADIC_SCALES if padic else REAL_SCALES
    scales = tuple(scales)
    if len(scales) < 4:
        raise ValueError("the Hölder fit needs at least 4 scales")
    directions = default_directions(dim, padic) if directions is None else list(directions)
    if not directions:
        raise ValueError("direction set is empty")
    if padic:
        P = Fraction(p.field.p)
        base = float(p.field.p)
        steps = [P ** n for n in scales]
    else:
        base = 2.0
        steps = [2.0 ** (-n) for n in scales]
    g0 = g(x0)
    worst = None
    any_nonconstant = False
    for d in directions:
        if not padic:
            nd = float(p(d))
            if nd == 0:
                continue
            d = np.asarray(d, float) * (radius / nd)
        lx, ly = [], []
        for s in steps:
            y = s * d
            diff = float(q(g(x0 + y) - g0))
            py = float(p(y))
            if diff > CONSTANT_FLOOR and py > 0:
                lx.append(math.log(py, base))
                ly.append(math.log(diff, base))
        if len(lx) >= 2:
            any_nonconstant = True
        if len(lx) < 4:
            continue
        slope, icpt, resid = _fit(np.array(lx), np.array(ly))
        if worst is None or slope < worst[0]:
            worst = (slope, icpt, resid, d)
    if not any_nonconstant:
        return HolderEstimate(None, None, q.name, p.name, scales, None, locally_constant=True)
    if worst is None:
        return HolderEstimate(None, None, q.name, p.name, scales, None)
    slope, icpt, resid, d = worst
    alpha = min(slope, 1.0)
    return HolderEstimate(alpha, float(base ** icpt), q.name, p.name, scales, resid, slope, d)


def holder_at_point(g: Callable, x0, q: Seminorm, p: Seminorm, alpha: float, C: float,
                    delta: float, n_probes: int = 64, seed: int = 0) -> bool:
    """Check ||g(y) - g(x0)||_q <= C ||y - x0||_p^alpha on random probes with ||y - x0||_p < delta."""
    rng = np.random.default_rng(seed)
    x0 = np.asarray(x0, float)
    g0 = g(x0)
    for _ in range(n_probes):
        d = rng.standard_normal(x0.shape[0])
        d *= delta * rng.uniform(1e-6, 0.999) / float(p(d))
        if float(q(g(x0 + d) - g0)) > C * float(p(d)) ** alpha:
            return False
    return True


def normalized_seminorm(p: Seminorm, C: float, delta: float, alpha: float) -> Seminorm:
    """Rescale p to s p, s = max(1/delta, C^(1/alpha)), so the Hölder bound holds with C = delta = 1."""
    if not (C > 0 and delta > 0 and alpha > 0):
        raise ValueError("C, delta and alpha must be positive")
    s = max(1.0 / delta, C ** (1.0 / alpha))
    return p.scaled(s, name=f"{s:g}*{p.name}")


# ---------------------------------------------------------------------------
# bootstrap


def bootstrap_constants(alpha: float) -> dict:
    """c = 2^(1-3a/2) / (2^(1-3a/2) - 1), K1 = c 2^(2a-1), K = 1 + K1."""
    if not 0 < alpha <= 0.5:
        raise ValueError("the bootstrap step needs alpha in ]0, 1/2]")
    t = 2.0 ** (1 - 1.5 * alpha)
    c = t / (t - 1)
    K1 = c * 2.0 ** (2 * alpha - 1)
    return {"alpha": alpha, "beta": 1.5 * alpha, "c": c, "K1": K1, "K": 1 + K1}


def bootstrap_iterate(alpha0: float) -> tuple[int, float]:
    """Minimal k with (3/2)^k alpha0 > 1/2, and beta = (3/2)^k alpha0."""
    if not 0 < alpha0 <= 1:
        raise ValueError("alpha0 must lie in ]0, 1]")
    k, beta = 0, float(alpha0)
    while beta <= 0.5:
        k += 1
        beta *= 1.5
    return k, beta


@dataclass
class BootstrapLedger:
    alpha: float
    beta: float
    c: float
    K1: float
    K: float
    p: str | None
    rows: list = field(default_factory=list)

    @property
    def premise_ok(self) -> bool:
        return self.p is not None and all(r[-1] for r in self.rows if r[0] == "premise")

    @property
    def conclusion_ok(self) -> bool:
        return all(r[-1] for r in self.rows if r[0] != "premise")

    @property
    def status(self) -> str:
        if not self.premise_ok:
            return "premise-failure"
        return "pass" if self.conclusion_ok else "conclusion-failure"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "probe", "n", "lhs", "rhs", "pass"])
        for r in self.rows:
            w.writerow([r[0], r[1], r[2], repr(r[3]), repr(r[4]), int(bool(r[5]))])
        return buf.getvalue()


def bootstrap_verify(g: BlackBoxHomomorphism, alpha: float, q: Seminorm, probes, n_max: int = 20,
                     config=None) -> BootstrapLedger:
    """Record every instance of the summand bound (premise) and of
    ||g(2^-n x)||_q <= K 2^(-3an/2) and ||g(y)||_q <= K 2^(3a/2) ||y||_p^(3a/2)."""
    from .extraction import ExtractionConfig, lanull_term, summand_bound

    if g.field.is_padic:
        raise ValueError("bootstrap_verify is implemented for real groups")
    const = bootstrap_constants(alpha)
    K, beta = const["K"], const["beta"]
    config = config or ExtractionConfig()
    probes = [np.asarray(x, float) for x in probes]
    sb = summand_bound(g, q, alpha, [], config)
    ledger = BootstrapLedger(alpha, beta, const["c"], const["K1"], K, sb.p.name if sb.found else None)
    if not sb.found:
        ledger.rows.append(("premise", -1, 0, math.inf, 1.0, False))
        return ledger
    p = sb.p
    scaled = []
    for x in probes:
        px = float(p(x))
        scaled.append(x * (0.99 / px) if px >= 1 else x)
    for idx, x in enumerate(scaled):
        for n in range(n_max + 1):
            y = x * 2.0 ** (-n)
            py = float(p(y))
            if py == 0:
                continue
            lhs = float(q(lanull_term(g, y)))
            ledger.rows.append(("premise", idx, n, lhs, py ** (2 * alpha), lhs <= py ** (2 * alpha)))
            lhs = float(q(g(y)))
            ledger.rows.append(("premise", idx, n, lhs, py ** alpha, lhs <= py ** alpha))
    for idx, x in enumerate(scaled):
        for n in range(n_max + 1):
            y = x * 2.0 ** (-n)
            lhs = float(q(g(y)))
            rhs = K * 2.0 ** (-beta * n)
            ledger.rows.append(("decay", idx, n, lhs, rhs, lhs <= rhs))
            rhs = K * 2.0 ** beta * float(p(y)) ** beta
            ledger.rows.append(("holder_gain", idx, n, lhs, rhs, lhs <= rhs))
    return ledger


# ---------------------------------------------------------------------------
# globalization and Lipschitz checks


@dataclass
class GlobalizeReport:
    x0: np.ndarray
    at_identity: HolderEstimate
    at_x0: HolderEstimate
    difference: float | None
    passed: bool
    message: str = ""


def translated(g: BlackBoxHomomorphism, x0) -> Callable:
    """y -> g(x0)^-1 * g(x0 * y)."""
    S, T = g.source, g.target
    inv_gx0 = T.inv(g(x0))
    return lambda y: T.mul(inv_gx0, g(S.mul(x0, y)))


def globalize_check(g: BlackBoxHomomorphism, x0, alpha: float | None = None, tol: float = 0.05,
                    radius: float | None = None, scales=None) -> GlobalizeReport:
    """Compare the Hölder exponent of g at 0 with that of its translate to x0."""
    S, T = g.source, g.target
    x0 = S.field.vector(x0)
    if not S.contains(x0, "V"):
        raise DomainError("translated domain empty: x0 must lie in the V-ball for x0 * y to be defined")
    if radius is None:
        radius = float(S.radius_of("V")) / 4
    q, p = T.seminorm, S.seminorm
    e0 = estimate_holder(g, S.zero(), q, p, radius, scales)
    try:
        e1 = estimate_holder(translated(g, x0), S.zero(), q, p, radius, scales)
    except DomainError as exc:
        raise DomainError(f"translated domain empty: {exc}") from None
    if e0.locally_constant and e1.locally_constant:
        return GlobalizeReport(x0, e0, e1, 0.0, True, "locally constant")
    if e0.exponent is None or e1.exponent is None:
        return GlobalizeReport(x0, e0, e1, None, False, "exponent undefined")
    diff = abs(e0.exponent - e1.exponent)
    ok = diff <= tol
    msg = ""
    if alpha is not None and e0.exponent < alpha - tol:
        ok, msg = False, f"estimate {e0.exponent:.3f} at 0 is below the declared {alpha}"
    return GlobalizeReport(x0, e0, e1, diff, ok, msg)


def group_operation(group: LocalChartGroup, name: str) -> Callable:
    """A chart operation as a map on stacked vectors (for Lipschitz checks)."""
    d = group.dim
    ops = {
        "mu": (2, lambda v: mu(group, v[:d], v[d:])),
        "iota": (1, lambda v: iota(group, v)),
        "sigma": (2, lambda v: sigma(group, v[:d], v[d:])),
        "tau": (3, lambda v: tau(group, v[:d], v[d:2 * d], v[2 * d:])),
    }
    if name not in ops:
        raise ValueError(f"unknown group operation {name!r}")
    arity, f = ops[name]
    f.arity = arity
    return f


@dataclass
class LipschitzReport:
    estimate: HolderEstimate
    passed: bool


def lipschitz_of_c1_check(f: Callable, x0, q: Seminorm, p: Seminorm, radius: float = 1e-2,
                          threshold: float = 0.95) -> LipschitzReport:
    """A C^1 map is Lipschitz: the estimated exponent at x0 must be at least ``threshold``."""
    est = estimate_holder(f, x0, q, p, radius)
    ok = est.locally_constant or (est.exponent is not None and est.exponent >= threshold)
    return LipschitzReport(est, ok)
