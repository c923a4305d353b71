"""Scalars, vectors, seminorm families and Mackey-Cauchy certificates.

Real vectors are float64 numpy arrays. p-adic vectors are object arrays of
:class:`~fractions.Fraction`; their seminorms are exact rationals.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .padic import as_fraction, fraction_array, padic_abs, padic_close, valuation

DEFAULT_PADIC_PRECISION = 24
DEFAULT_WITNESS_CAP = 1e6


class DomainError(ValueError):
    """An argument left the neighbourhood an operation is defined on."""


# ---------------------------------------------------------------------------
# scalar fields


@dataclass(frozen=True)
class RealField:
    kind: str = "real"

    @property
    def is_padic(self) -> bool:
        return False

    @property
    def contraction(self) -> float:
        """The scalar whose powers drive the extraction (1/2)."""
        return 0.5

    def abs(self, x) -> float:
        return abs(float(x))

    def scalar(self, x) -> float:
        return float(x)

    def vector(self, values) -> np.ndarray:
        return np.array(values, dtype=float)

    def zeros(self, dim: int) -> np.ndarray:
        return np.zeros(dim)

    def close(self, a, b, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.asarray(a, float) - np.asarray(b, float)) <= tol))

    def to_json(self):
        return "real"

    def format(self, x) -> str:
        return repr(float(x))


@dataclass(frozen=True)
class PAdicField:
    p: int
    prec: int = DEFAULT_PADIC_PRECISION

    def __post_init__(self):
        if self.p < 2 or any(self.p % d == 0 for d in range(2, math.isqrt(self.p) + 1)):
            raise ValueError(f"p={self.p} is not a prime")
        if self.prec < 2:
            raise ValueError("precision must be at least 2 digits")

    @property
    def kind(self) -> str:
        return "padic"

    @property
    def is_padic(self) -> bool:
        return True

    @property
    def contraction(self) -> Fraction:
        return Fraction(self.p)

    def abs(self, x) -> Fraction:
        return padic_abs(x, self.p)

    def valuation(self, x):
        return valuation(x, self.p)

    def scalar(self, x) -> Fraction:
        return as_fraction(x)

    def vector(self, values) -> np.ndarray:
        return fraction_array(values)

    def zeros(self, dim: int) -> np.ndarray:
        return fraction_array([0] * dim)

    def close(self, a, b, digits: int | None = None) -> bool:
        digits = self.prec if digits is None else digits
        return all(padic_close(u, v, self.p, digits) for u, v in zip(np.ravel(a), np.ravel(b)))

    def to_json(self):
        return {"p": self.p, "prec": self.prec}

    def format(self, x) -> str:
        return str(as_fraction(x))


Field = RealField | PAdicField
REAL = RealField()


def field_from_json(spec) -> Field:
    if spec in (None, "real"):
        return REAL
    if isinstance(spec, dict) and "p" in spec:
        return PAdicField(int(spec["p"]), int(spec.get("prec", DEFAULT_PADIC_PRECISION)))
    raise ValueError(f"unknown field spec {spec!r}")


# ---------------------------------------------------------------------------
# seminorms

_KINDS = ("max", "l1", "l2", "opinf")


@dataclass(frozen=True)
class Seminorm:
    """Weighted coordinate seminorm.

    ``max``: max_i w_i |x_i|; ``l1``: sum_i w_i |x_i|; ``l2``: sqrt(sum (w_i x_i)^2);
    ``opinf``: operator norm on l-infinity of the row-major n x n matrix
    (max row sum of w_ij |x_ij|). Zero weights give genuine seminorms.
    Over Q_p only ``max`` is available (it is the ultrametric one).
    """

    name: str
    kind: str
    weights: tuple
    field: Field = REAL

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown seminorm kind {self.kind!r}")
        if self.field.is_padic and self.kind != "max":
            raise ValueError("p-adic seminorms must be of kind 'max'")
        if any(w < 0 for w in self.weights):
            raise ValueError("seminorm weights must be nonnegative")
        if self.kind == "opinf" and math.isqrt(len(self.weights)) ** 2 != len(self.weights):
            raise ValueError("opinf seminorm needs n*n weights")

    @property
    def dim(self) -> int:
        return len(self.weights)

    def __call__(self, x):
        x = np.ravel(x)
        if x.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: seminorm {self.name} has dim {self.dim}, got {x.shape[0]}")
        if self.field.is_padic:
            p = self.field.p
            return max((as_fraction(w) * padic_abs(c, p) for w, c in zip(self.weights, x)),
                       default=Fraction(0))
        w = np.asarray(self.weights, float)
        a = np.abs(np.asarray(x, float))
        if self.kind == "max":
            return float(np.max(w * a))
        if self.kind == "l1":
            return float(np.sum(w * a))
        if self.kind == "l2":
            return float(math.sqrt(np.sum((w * a) ** 2)))
        n = math.isqrt(self.dim)
        return float(np.max(np.sum((w * a).reshape(n, n), axis=1)))

    def scaled(self, c, name: str | None = None) -> "Seminorm":
        if self.field.is_padic:
            c = as_fraction(c)
            weights = tuple(as_fraction(w) * c for w in self.weights)
        else:
            weights = tuple(float(w) * float(c) for w in self.weights)
        return Seminorm(name or f"{c}*{self.name}", self.kind, weights, self.field)

    def extreme_points(self) -> list[np.ndarray]:
        """Extreme points of the closed unit ball (polytopal kinds, positive weights)."""
        w = np.asarray(self.weights, float)
        if np.any(w == 0):
            raise ValueError("unit ball is unbounded for a degenerate seminorm")
        d = self.dim
        if self.kind == "max":
            return [np.array(s) / w for s in itertools.product((-1.0, 1.0), repeat=d)]
        if self.kind == "l1":
            pts = []
            for i in range(d):
                for s in (-1.0, 1.0):
                    e = np.zeros(d)
                    e[i] = s / w[i]
                    pts.append(e)
            return pts
        if self.kind == "opinf":
            n = math.isqrt(d)
            rows = []
            for i in range(n):
                choices = []
                for j in range(n):
                    for s in (-1.0, 1.0):
                        choices.append((j, s / w[i * n + j]))
                rows.append(choices)
            pts = []
            for combo in itertools.product(*rows):
                m = np.zeros((n, n))
                for i, (j, v) in enumerate(combo):
                    m[i, j] = v
                pts.append(m.ravel())
            return pts
        raise ValueError("l2 unit ball has no finite set of extreme points")

    def to_json(self) -> dict:
        weights = [str(w) if isinstance(w, Fraction) else w for w in self.weights]
        return {"name": self.name, "kind": self.kind, "weights": weights}


def domination_constant(q: Seminorm, p: Seminorm) -> float:
    """sup { q(u) : p(u) <= 1 }, so that q <= constant * p; ``inf`` if unbounded."""
    if q.dim != p.dim:
        raise ValueError("dimension mismatch")
    if q.field.is_padic:
        out = 0.0
        for wq, wp in zip(q.weights, p.weights):
            if wq == 0:
                continue
            if wp == 0:
                return math.inf
            out = max(out, float(as_fraction(wq) / as_fraction(wp)))
        return out
    wp = np.asarray(p.weights, float)
    wq = np.asarray(q.weights, float)
    if np.any((wp == 0) & (wq > 0)):
        return math.inf
    if np.any(wp == 0):
        # q ignores these coordinates, so any positive weight gives the same sup
        p = Seminorm(p.name, p.kind, tuple(np.where(wp == 0, 1.0, wp)), p.field)
        wp = np.asarray(p.weights, float)
    if p.kind != "l2":
        return max(q(u) for u in p.extreme_points())
    r = wq / wp
    if q.kind in ("max", "l2"):
        return float(np.max(r))
    if q.kind == "l1":
        return float(math.sqrt(np.sum(r ** 2)))
    n = math.isqrt(q.dim)
    return float(np.max(np.sqrt(np.sum((r ** 2).reshape(n, n), axis=1))))


def standard_seminorms(dim: int, field: Field = REAL, matrix: bool = False) -> list[Seminorm]:
    ones = tuple([Fraction(1)] * dim) if field.is_padic else tuple([1.0] * dim)
    if field.is_padic:
        return [Seminorm("max", "max", ones, field)]
    out = [Seminorm("max", "max", ones, field), Seminorm("l2", "l2", ones, field),
           Seminorm("l1", "l1", ones, field)]
    if matrix:
        out.insert(1, Seminorm("opinf", "opinf", ones, field))
    return out


@dataclass(frozen=True)
class SeminormFamily:
    """A finite, nonempty family of seminorms on one space.

    The "for every q there is a dominating p" quantifier is made concrete by
    :meth:`dominating`, which names a member p with q <= p.
    """

    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ValueError("a seminorm family must be nonempty")
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise ValueError("seminorm names must be unique")
        if len({m.dim for m in self.members}) != 1:
            raise ValueError("all seminorms must live on the same space")
        if len({m.field for m in self.members}) != 1:
            raise ValueError("all seminorms must share one field")

    @classmethod
    def standard(cls, dim: int, field: Field = REAL, matrix: bool = False) -> "SeminormFamily":
        return cls(tuple(standard_seminorms(dim, field, matrix)))

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def field(self) -> Field:
        return self.members[0].field

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, name: str) -> Seminorm:
        for m in self.members:
            if m.name == name:
                return m
        raise KeyError(name)

    def names(self) -> list[str]:
        return [m.name for m in self.members]

    def dominates(self, p: Seminorm, q: Seminorm, tol: float = 1e-12) -> bool:
        """q <= p pointwise."""
        return domination_constant(q, p) <= 1 + tol

    def dominating(self, q: Seminorm) -> Seminorm:
        for p in self.members:
            if self.dominates(p, q):
                return p
        raise LookupError(f"no family member dominates {q.name}")

    def evaluate(self, x) -> dict:
        return {m.name: m(x) for m in self.members}

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "dim": self.dim,
                "seminorms": [m.to_json() for m in self.members]}

    @classmethod
    def from_json(cls, data) -> "SeminormFamily":
        if isinstance(data, str):
            data = json.loads(data)
        fld = field_from_json(data.get("field", "real"))
        dim = int(data["dim"])
        members = []
        for s in data["seminorms"]:
            weights = s.get("weights", [1] * dim)
            if len(weights) != dim:
                raise ValueError(f"seminorm {s['name']} has {len(weights)} weights, expected {dim}")
            weights = tuple(as_fraction(w) for w in weights) if fld.is_padic else tuple(float(w) for w in weights)
            members.append(Seminorm(s["name"], s.get("kind", "max"), weights, fld))
        return cls(tuple(members))


def seminorm_eval(q: Seminorm, x):
    return q(x)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float
    seminorm: Seminorm

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def contains(self, y) -> bool:
        return self.seminorm(np.asarray(y) - self.center) < self.radius


def vector_to_json(x, fld: Field) -> list:
    if fld.is_padic:
        return [str(as_fraction(c)) for c in np.ravel(x)]
    return [float(c) for c in np.ravel(x)]


def vector_from_json(values, fld: Field) -> np.ndarray:
    return fld.vector(values)


# ---------------------------------------------------------------------------
# Mackey-Cauchy certification


@dataclass(frozen=True)
class MackeyCauchyCertificate:
    """Measured witness that a finite sequence is Mackey-Cauchy.

    ``factors[M]`` is |mu_{n,m}| for pairs with min(n, m) = M; ``level_sups[q][M]``
    is the largest ||mu_{n,m}^{-1}(v_n - v_m)||_q among those pairs and
    ``witness[q]`` the sup over all pairs (the measured size of Omega).
    """

    gauge: object
    factors: tuple
    witness: dict
    level_sups: dict
    cap: float
    passed: bool
    reason: str = ""


def padic_gauge(theta, n: int, m: int, p: int) -> Fraction:
    """r_{n,m} = p^[theta (min(n, m) + 1)] with [.] the floor."""
    theta = as_fraction(theta)
    if theta <= 0:
        raise ValueError("theta must be positive")
    return Fraction(p) ** math.floor(theta * (min(n, m) + 1))


def mackey_cauchy_certify(v: Sequence, a, family: SeminormFamily,
                          cap: float = DEFAULT_WITNESS_CAP,
                          gauge: Callable[[int, int], object] | None = None,
                          rel_floor: float | None = None) -> MackeyCauchyCertificate:
    """Certify v_n - v_m in mu_{n,m} * Omega with mu_{n,m} = a^(min(n,m)+1).

    ``gauge`` may replace the power law (e.g. the p-adic Gauss-bracket gauge).
    Differences below ``rel_floor`` times the largest ||v_k||_q are rounding
    noise and count as zero (default 1e-13 over the reals, 0 p-adically).
    Passing requires every witness sup to be finite and below ``cap``, and the
    per-level sups not to grow over the last third of the levels, which is how
    an unbounded Omega shows up on a finite sequence.
    """
    fld = family.field
    if len(v) == 0:
        raise ValueError("empty sequence")
    if len(v) < 3:
        raise ValueError("need at least 3 terms")
    if not fld.abs(a) < 1:
        raise ValueError("gauge scalar must satisfy |a| < 1")
    if gauge is None:
        def gauge(n, m):
            return a ** (min(n, m) + 1)
    if rel_floor is None:
        rel_floor = 0.0 if fld.is_padic else 1e-13
    L = len(v)
    factors = tuple(float(fld.abs(gauge(M, M))) for M in range(L - 1))
    level_sups: dict = {}
    witness: dict = {}
    for q in family:
        floor = rel_floor * max(float(q(np.asarray(x))) for x in v)
        sups = []
        for M in range(L - 1):
            best = max(float(q(np.asarray(v[m]) - np.asarray(v[M]))) for m in range(M + 1, L))
            if best <= floor:
                best = 0.0
            sups.append(best / factors[M] if factors[M] > 0 else math.inf)
        level_sups[q.name] = tuple(sups)
        witness[q.name] = max(sups)
    passed, reason = True, ""
    for name, w in witness.items():
        if not math.isfinite(w):
            passed, reason = False, f"witness for {name} is not finite"
            break
        if w > cap:
            passed, reason = False, f"witness for {name} = {w:.3g} exceeds cap {cap:.3g}"
            break
        sups = level_sups[name]
        cut = max(1, (2 * len(sups)) // 3)
        head, tail = max(sups[:cut]), max(sups[cut:], default=0.0)
        if tail > head * (1 + 1e-9) + 1e-300:
            passed, reason = False, f"witness for {name} still growing ({head:.3g} -> {tail:.3g})"
            break
    return MackeyCauchyCertificate(a, factors, witness, level_sups, cap, passed, reason)


def default_real_gauge(alpha: float) -> float:
    """Midpoint of ]2^-(2 alpha - 1), 1[."""
    return (2.0 ** (-(2 * alpha - 1)) + 1) / 2


def default_padic_theta(alpha: float) -> Fraction:
    """theta with p^-theta in ]p^-(2 alpha - 1), 1[: half of 2 alpha - 1."""
    return Fraction(2 * alpha - 1).limit_denominator(1000) / 2


def as_vectors(values: Iterable, fld: Field) -> list[np.ndarray]:
    return [fld.vector(v) for v in values]
