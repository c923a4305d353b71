"""Taylor coefficients, exact defect maps, and the quadratic remainder bound."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import REAL, Ball, Field, Seminorm, SeminormFamily, domination_constant
from .groups import LocalChartGroup, sigma, tau
from .padic import fraction_array, fraction_inverse


def _sample_scalars(k: int, fld: Field, t0=None) -> list:
    if fld.is_padic:
        base = Fraction(1) if t0 is None else Fraction(t0)
        return [base * Fraction(fld.p) ** i for i in range(k + 1)]
    base = 1e-3 if t0 is None else float(t0)
    return [base * 2.0 ** (-i) for i in range(k + 1)]


def _solve_coefficients(f, x, y, samples, fld: Field) -> list:
    """Fit f(x + t y) - f(x) = sum_{j=1}^{m} t^j b_j through m = len(samples) points."""
    m = len(samples)
    if len(set(samples)) != m or any(t == 0 for t in samples):
        raise ValueError("singular sample system: sample scalars must be distinct and nonzero")
    fx = f(x)
    rhs = [f(x + t * y) - fx for t in samples]
    if fld.is_padic:
        V = fraction_array([[t ** j for j in range(1, m + 1)] for t in samples])
        Vinv = fraction_inverse(V)
        F = np.array(rhs, dtype=object)
        return [sum(Vinv[j, i] * F[i] for i in range(m)) for j in range(m)]
    t0 = samples[0]
    s = np.array(samples) / t0
    V = np.vander(s, m + 1, increasing=True)[:, 1:]
    if abs(np.linalg.det(V)) < 1e-300:
        raise ValueError("singular sample system")
    B = np.linalg.solve(V, np.array(rhs, dtype=float).reshape(m, -1))
    return [B[j] / t0 ** (j + 1) for j in range(m)]


@dataclass(frozen=True, eq=False)
class TaylorExpansion:
    """Order-k expansion f(x + t y) - f(x) = sum t^j a_j(x, y) + t^k R_k(x, y, t).

    Coefficients are fitted from k + 1 geometric samples; the extra fitted
    order absorbs the leading truncation error and is discarded. The
    remainder is defined by subtraction, so the identity holds by construction
    and R_k(x, y, 0) = 0.
    """

    f: Callable
    x: np.ndarray
    y: np.ndarray
    k: int
    samples: tuple
    field: Field = REAL
    coeffs: tuple = dc_field(default=())

    def a(self, j: int, y=None):
        if not 1 <= j <= self.k:
            raise ValueError(f"coefficient index must be in 1..{self.k}")
        if y is None:
            return self.coeffs[j - 1]
        return self.coefficients(y)[j - 1]

    def coefficients(self, y=None) -> list:
        if y is None:
            return list(self.coeffs)
        return _solve_coefficients(self.f, self.x, np.asarray(y), self.samples, self.field)[: self.k]

    def remainder(self, t, y=None):
        """R_k(x, y, t)."""
        y = self.y if y is None else np.asarray(y)
        coeffs = self.coefficients(None if y is self.y else y)
        if t == 0:
            return 0 * coeffs[0]
        poly = sum(t ** j * c for j, c in enumerate(coeffs, start=1))
        return (self.f(self.x + t * y) - self.f(self.x) - poly) / t ** self.k

    def reconstruction_error(self, t, y=None):
        """f(x + t y) - f(x) - sum t^j a_j - t^k R_k, which should vanish."""
        y = self.y if y is None else np.asarray(y)
        coeffs = self.coefficients(None if y is self.y else y)
        poly = sum(t ** j * c for j, c in enumerate(coeffs, start=1))
        return self.f(self.x + t * y) - self.f(self.x) - poly - t ** self.k * self.remainder(t, y)


def taylor_coefficients(f: Callable, x, y, k: int, t_samples=None, fld: Field = REAL) -> TaylorExpansion:
    if k < 1:
        raise ValueError("order k must be at least 1")
    samples = tuple(t_samples) if t_samples is not None else tuple(_sample_scalars(k, fld))
    if len(samples) < k:
        raise ValueError(f"need at least {k} sample scalars")
    x, y = np.asarray(x), np.asarray(y)
    coeffs = _solve_coefficients(f, x, y, list(samples), fld)[:k]
    return TaylorExpansion(f, x, y, k, samples, fld, tuple(coeffs))


# ---------------------------------------------------------------------------
# exact defect maps


def defect_R(group: LocalChartGroup, x, y):
    """sigma(x, y) minus its linear part (2x + y real, px + y p-adic)."""
    lead = group.field.p if group.field.is_padic else 2
    return sigma(group, x, y) - (lead * x + y)


def defect_D(group: LocalChartGroup, x, y, z):
    """tau(x, y, z) - (x + y + z)."""
    return tau(group, x, y, z) - (x + y + z)


def sigma_linear(group: LocalChartGroup) -> np.ndarray:
    """Matrix of sigma'(0,0) acting on the stacked vector (u, v)."""
    lead = group.field.p if group.field.is_padic else 2
    eye = np.eye(group.dim)
    return np.hstack([lead * eye, eye])


def tau_linear(group: LocalChartGroup) -> np.ndarray:
    eye = np.eye(group.dim)
    return np.hstack([eye, eye, eye])


def mu_linear(group: LocalChartGroup) -> np.ndarray:
    eye = np.eye(group.dim)
    return np.hstack([eye, eye])


def fd_jacobian(f: Callable, x, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference Jacobian (real maps)."""
    x = np.asarray(x, float)
    cols = []
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e), float) - np.asarray(f(x - e), float)) / (2 * h))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# quadratic remainder bound


@dataclass
class QuadraticBound:
    p: Seminorm | None
    scale: float | None
    passed: bool
    rows: list


def _probe_in_ball(rng, p: Seminorm, dim: int, radius_fraction: float) -> np.ndarray:
    d = rng.standard_normal(dim)
    nd = p(d)
    return d * (radius_fraction / nd) if nd > 0 else d


def quadratic_bound_check(f: Callable, df: Callable, x0, q: Seminorm, family: SeminormFamily,
                          C: float, domain: Ball | None = None, n_probes: int = 24,
                          max_power: int = 20, seed: int = 0) -> QuadraticBound:
    """Search p = 2^s * member with ||f(x+y) - f(x) - df(x) y||_q <= C ||y||_p^2.

    Probes: x in B_1^p(x0), y in B_1^p(0), radii sampled in [0.05, 0.99].
    ``df(x)`` must return the Jacobian at x. B_2^p(x0) has to fit inside
    ``domain`` (checked through domination constants). Failure is reported,
    not raised.
    """
    x0 = np.asarray(x0, float)
    dim = x0.shape[0]
    for member in family:
        for s in range(max_power + 1):
            scale = 2.0 ** s
            p = member.scaled(scale, name=f"2^{s}*{member.name}")
            if domain is not None:
                kappa = domination_constant(domain.seminorm, p)
                if not domain.seminorm(x0 - domain.center) + 2 * kappa < domain.radius:
                    continue
            rng = np.random.default_rng(seed)
            rows, ok = [], True
            for _ in range(n_probes):
                x = x0 + _probe_in_ball(rng, p, dim, rng.uniform(0.0, 0.99))
                y = _probe_in_ball(rng, p, dim, rng.uniform(0.05, 0.99))
                lhs = q(f(x + y) - f(x) - df(x) @ y)
                rhs = C * p(y) ** 2
                rows.append((x, y, lhs, rhs, lhs <= rhs))
                ok &= lhs <= rhs
            if ok:
                return QuadraticBound(p, scale, True, rows)
    return QuadraticBound(None, None, False, [])
