"""Executable differentiability predicates on finite geometric grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import REAL, Field, Seminorm, SeminormFamily
from .holder import default_directions
from .taylor import fd_jacobian

DEFAULT_EPS = (1.0, 1e-1, 1e-2, 1e-3, 1e-4)
RISE = 1.10  # allowed growth between consecutive grid scales


def _matrix(derivative, x):
    return derivative(x) if callable(derivative) else np.asarray(derivative)


def difference_quotient(f: Callable, x, y, t, derivative=None):
    """f^[1](x, y, t) = (f(x + t y) - f(x)) / t, and f'(x) y at t = 0."""
    if t == 0:
        if derivative is None:
            raise ValueError("t = 0 needs a supplied derivative")
        return _matrix(derivative, x) @ y
    return (f(x + t * y) - f(x)) / t


@dataclass
class GaugeFunction:
    """theta(t) sampled on a decreasing scale sequence, with its o(t) verdict."""

    ts: tuple
    values: tuple
    floor: float = 0.0

    @property
    def ratios(self) -> list:
        return [v / abs(t) for t, v in zip(self.ts, self.values)]

    @property
    def is_little_o(self) -> bool:
        return _vanishes(self.ratios, self.floor)


def _vanishes(seq, floor: float, reduction: float = 1e-3) -> bool:
    """Monotone (within RISE) decay to below reduction * start, or to the floor."""
    seq = list(seq)
    if not seq:
        return False
    for a, b in zip(seq, seq[1:]):
        if b > RISE * a and b > floor:
            return False
    return seq[-1] <= max(reduction * seq[0], floor)


# ---------------------------------------------------------------------------
# tangency


@dataclass
class TangencyReport:
    deltas: dict
    gauge: GaugeFunction
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(d > 0 for d in self.deltas.values())


def tangency_check(h: Callable, q: Seminorm, p: Seminorm, candidate=None, eps=DEFAULT_EPS,
                   radius: float = 1.0, scales=range(0, 27), directions=None,
                   n_random: int = 8, seed: int = 0, floor: float = 1e-8) -> TangencyReport:
    """For each eps, the largest probed delta with ||r(y)||_q <= eps ||y||_p on B_delta^p(0).

    r(y) = h(y) - candidate y (candidate None means zero). Probes lie on the
    spheres of radius radius * 2^-n along fixed and seeded random directions.
    ``floor`` is the ratio below which the gauge counts as vanished (rounding
    and finite-difference error in the candidate).
    """
    dim = p.dim
    dirs = default_directions(dim) if directions is None else list(directions)
    rng = np.random.default_rng(seed)
    dirs = dirs + [rng.standard_normal(dim) for _ in range(n_random)]
    dirs = [d / float(p(d)) for d in dirs if float(p(d)) > 0]
    M = None if candidate is None else np.asarray(candidate, float)

    def r(y):
        out = np.asarray(h(y), float)
        return out - M @ y if M is not None else out

    radii = [radius * 2.0 ** (-n) for n in scales]
    sup_ratio, rows = [], []
    for rad in radii:
        worst = 0.0
        for d in dirs:
            y = rad * d
            ratio = float(q(r(y))) / float(p(y))
            worst = max(worst, ratio)
        sup_ratio.append(worst)
        rows.append((rad, worst))
    deltas = {}
    for e in eps:
        delta = 0.0
        # B_delta contains every smaller sphere, so scan from the inside out
        for rad, worst in zip(reversed(radii), reversed(sup_ratio)):
            if worst <= e:
                delta = rad
            else:
                break
        deltas[e] = delta
    gauge = GaugeFunction(tuple(radii), tuple(s * rr for s, rr in zip(sup_ratio, radii)), floor=floor)
    return TangencyReport(deltas, gauge, rows)


# ---------------------------------------------------------------------------
# feeble differentiability


@dataclass
class FeebleProbe:
    y: np.ndarray
    w: np.ndarray
    ts: tuple
    errors: tuple
    limit: np.ndarray
    passed: bool


@dataclass
class FeebleReport:
    x: np.ndarray
    probes: list
    linear_ok: bool

    @property
    def passed(self) -> bool:
        return self.linear_ok and all(pr.passed for pr in self.probes)


def _grid_scalars(fld: Field, n_range) -> list:
    if fld.is_padic:
        P = Fraction(fld.p)
        return [P ** n for n in n_range]
    ts = []
    for n in n_range:
        ts.extend([2.0 ** (-n), -(2.0 ** (-n))])
    return ts


def feeble_check(f: Callable, x, derivative, ys=None, n_range=range(1, 21), fld: Field = REAL,
                 q: Seminorm | None = None, seed: int = 0, scale=1) -> FeebleReport:
    """Continuity of (y, t) -> f^[1](x, y, t) at each (y, 0), with value f'(x) y there.

    Each base point y is approached along (y + t w, t) for t = +-2^-n (real) or
    p^n (p-adic). The distance to f'(x) y must shrink monotonically within 10%
    per step and end below 1e-3 of its start or below the rounding floor.
    ``scale`` shrinks the default base points and approach directions so the
    grid stays inside the domain of f.
    """
    padic = fld.is_padic
    x = fld.vector(x)
    dim = x.shape[0]
    D = _matrix(derivative, x)
    if padic:
        D = np.asarray(D, dtype=object)
    if ys is None:
        ys = default_directions(dim, padic)
        if not padic:
            ys = ys + [0.5 * d for d in ys[:dim]]
        ys = [scale * d for d in ys]
    rng = np.random.default_rng(seed)
    if padic:
        ws = [scale * fld.vector([int(v) for v in rng.integers(-3, 4, dim)]) for _ in ys]
    else:
        ws = [scale * rng.standard_normal(dim) for _ in ys]
    qn = q if q is not None else SeminormFamily.standard(len(np.atleast_1d(f(x))), fld)["max"]
    ts = _grid_scalars(fld, n_range)
    fx = f(x)
    probes = []
    for y, w in zip(ys, ws):
        y = fld.vector(y)
        limit = D @ y
        errs = []
        for t in ts:
            yt = y + t * w
            val = (f(x + t * yt) - fx) / t
            errs.append(float(qn(val - limit)))
        floor = 0.0 if padic else 1e-8 * (1.0 + float(qn(limit)) + float(qn(fx)))
        # pair the +t and -t samples so the sign of t does not count as a rise
        if padic:
            seq = errs
        else:
            seq = [max(a, b) for a, b in zip(errs[0::2], errs[1::2])]
        probes.append(FeebleProbe(y, w, tuple(ts), tuple(errs), limit, _vanishes(seq, floor)))
    linear_ok = _t0_row_linear(D, ys, fld)
    return FeebleReport(x, probes, linear_ok)


def _t0_row_linear(D, ys, fld: Field) -> bool:
    if len(ys) < 2:
        return True
    a, b = fld.vector(ys[0]), fld.vector(ys[1])
    lhs = D @ (a + b)
    rhs = D @ a + D @ b
    if fld.is_padic:
        return bool(np.all(lhs == rhs))
    return bool(np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14))


# ---------------------------------------------------------------------------
# chain rule


@dataclass
class ChainRuleReport:
    derivative: np.ndarray
    tangency: TangencyReport
    fd_error: float
    passed: bool


def chain_rule_test(f: Callable, g: Callable, x, df=None, dg=None, eps=DEFAULT_EPS,
                    radius: float = 1e-2, fd_tol: float = 1e-6) -> ChainRuleReport:
    """(g o f)'(x) = g'(f(x)) f'(x): tangency of the composite residual.

    Missing derivatives are replaced by central finite differences. The
    product is also compared with a finite-difference Jacobian of g o f.
    """
    x = np.asarray(x, float)
    fx = np.asarray(f(x), float)
    Jf = fd_jacobian(f, x) if df is None else np.atleast_2d(_matrix(df, x))
    Jg = fd_jacobian(g, fx) if dg is None else np.atleast_2d(_matrix(dg, fx))
    J = Jg @ Jf

    def comp(z):
        return np.atleast_1d(np.asarray(g(f(z)), float))

    base = comp(x)
    fam_src = SeminormFamily.standard(x.shape[0])
    fam_tgt = SeminormFamily.standard(base.shape[0])
    rep = tangency_check(lambda y: comp(x + y) - base, fam_tgt["max"], fam_src["max"], J, eps,
                         radius=radius, scales=range(0, 18))
    fd_err = float(np.max(np.abs(fd_jacobian(comp, x) - J)))
    ok = rep.passed and fd_err <= fd_tol * max(1.0, float(np.max(np.abs(J))))
    return ChainRuleReport(J, rep, fd_err, ok)


def abs_counterexample(x):
    """|x| componentwise: continuous, not feebly differentiable at 0."""
    return np.abs(np.asarray(x, float))

