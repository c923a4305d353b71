"""Local Lie groups in a chart at the identity.

A :class:`LocalChartGroup` carries the chart multiplication and inversion plus
a chain of nested balls. The chain U > V > W (target role) and
P > Q > B > A > Z (source role) is derived from one outer radius by shrinking
with a factor 1/4 per level.

Products of more than two factors are always formed from left to right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import REAL, DomainError, Field, PAdicField, Seminorm, SeminormFamily, field_from_json
from .padic import as_fraction, fraction_array, fraction_inverse

SHRINK = 4
LEVELS = {"U": 0, "V": 1, "W": 2, "P": 0, "Q": 1, "B": 2, "A": 3, "Z": 4}


@dataclass(frozen=True, eq=False)
class LocalChartGroup:
    name: str
    field: Field
    dim: int
    mul: Callable
    inv: Callable
    radius: float
    seminorm: Seminorm
    family: SeminormFamily
    spec: dict = field(default_factory=dict)
    abelian: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.seminorm.dim != self.dim or self.family.dim != self.dim:
            raise ValueError("seminorms must live on the chart space")

    def radius_of(self, level: str) -> float:
        return self.radius / SHRINK ** LEVELS[level]

    @property
    def radii(self) -> dict:
        return {k: self.radius_of(k) for k in LEVELS}

    def norm(self, x):
        return self.seminorm(x)

    def contains(self, x, level: str = "U") -> bool:
        return self.seminorm(x) < self.radius_of(level)

    def require(self, x, level: str, op: str) -> None:
        if np.ravel(x).shape[0] != self.dim:
            raise DomainError(f"{op}: expected a vector of dimension {self.dim}")
        if not self.contains(x, level):
            raise DomainError(
                f"{op}: argument with {self.seminorm.name}-norm {float(self.seminorm(x)):.4g} "
                f"outside the {level}-ball of radius {self.radius_of(level):.4g} in {self.name}")

    def zero(self) -> np.ndarray:
        return self.field.zeros(self.dim)

    def vector(self, values) -> np.ndarray:
        return self.field.vector(values)

    def scalar_one(self):
        return Fraction(1) if self.field.is_padic else 1.0


# ---------------------------------------------------------------------------
# chart operations


def mu(group: LocalChartGroup, x, y):
    """x * y in chart coordinates, for x, y in the V-ball."""
    group.require(x, "V", "mu")
    group.require(y, "V", "mu")
    return group.mul(x, y)


def iota(group: LocalChartGroup, x):
    group.require(x, "V", "iota")
    return group.inv(x)


def star_product(group: LocalChartGroup, *factors):
    """Left-associated product ((x1 * x2) * x3) * ..."""
    if not factors:
        return group.zero()
    out = factors[0]
    for f in factors[1:]:
        out = group.mul(out, f)
    return out


def star_power(group: LocalChartGroup, x, k: int):
    """k-fold left-associated product of x (k >= 0); negative k uses the inverse."""
    if k < 0:
        return star_power(group, group.inv(x), -k)
    return star_product(group, *([x] * k)) if k else group.zero()


def sigma_real(group: LocalChartGroup, x, y):
    """sigma(x, y) = x * x * y."""
    if group.field.is_padic:
        raise ValueError("sigma_real needs a real group; use sigma_padic")
    group.require(x, "W", "sigma")
    group.require(y, "W", "sigma")
    return star_product(group, x, x, y)


def sigma_padic(group: LocalChartGroup, x, y):
    """sigma(x, y) = x^p * y with the p-fold power formed left to right."""
    if not group.field.is_padic:
        raise ValueError("sigma_padic needs a p-adic group")
    group.require(x, "W", "sigma")
    group.require(y, "W", "sigma")
    return star_product(group, *([x] * group.field.p), y)


def sigma(group: LocalChartGroup, x, y):
    return sigma_padic(group, x, y) if group.field.is_padic else sigma_real(group, x, y)


def tau(group: LocalChartGroup, x, y, z):
    """tau(x, y, z) = x * y * z."""
    for v in (x, y, z):
        group.require(v, "W", "tau")
    return star_product(group, x, y, z)


def j_defect(group: LocalChartGroup, x, y):
    """j(x, y) = y^-1 * x^-1 * (x + y); vanishes identically for abelian charts."""
    group.require(x, "Z", "j")
    group.require(y, "Z", "j")
    s = x + y
    group.require(s, "A", "j")
    return star_product(group, group.inv(y), group.inv(x), s)


def squaring_defect(group: LocalChartGroup, x):
    """(x/2)^-2 * x for real groups, x^-p * (p x) for p-adic ones."""
    if group.field.is_padic:
        p = group.field.p
        return group.mul(star_power(group, group.inv(x), p), x * Fraction(p))
    half = group.inv(0.5 * x)
    return star_product(group, half, half, x)


# ---------------------------------------------------------------------------
# matrix exponential and logarithm by adaptive series

_SERIES_RTOL = 1e-17
_MAX_TERMS = 4000


def expm1_series(X: np.ndarray) -> np.ndarray:
    """exp(X) - I, summed until the next term is negligible."""
    term = X.copy()
    total = X.copy()
    k = 1
    while True:
        k += 1
        term = term @ X / k
        total = total + term
        if np.max(np.abs(term)) <= _SERIES_RTOL * max(np.max(np.abs(total)), 1e-300) or k > _MAX_TERMS:
            return total


def log1p_series(A: np.ndarray) -> np.ndarray:
    """log(I + A) for ||A|| < 1."""
    if np.max(np.sum(np.abs(A), axis=1)) >= 1:
        raise DomainError("matrix logarithm series needs ||g - I|| < 1")
    power = A.copy()
    total = A.copy()
    k = 1
    while True:
        k += 1
        power = power @ A
        term = power * ((-1) ** (k + 1) / k)
        total = total + term
        if np.max(np.abs(term)) <= _SERIES_RTOL * max(np.max(np.abs(total)), 1e-300) or k > _MAX_TERMS:
            return total


def matrix_chart_product(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """log(exp X exp Y), keeping relative precision for small arguments."""
    EX, EY = expm1_series(X), expm1_series(Y)
    return log1p_series(EX + EY + EX @ EY)


# ---------------------------------------------------------------------------
# built-in groups


def abelian(dim: int, fld: Field = REAL, radius: float | None = None) -> LocalChartGroup:
    """(K^dim, +) in the identity chart."""
    if radius is None:
        radius = fld.p if fld.is_padic else 1.0
    fam = SeminormFamily.standard(dim, fld)
    return LocalChartGroup(
        name=f"abelian({dim})", field=fld, dim=dim,
        mul=lambda x, y: x + y, inv=lambda x: -x,
        radius=radius, seminorm=fam["max"], family=fam,
        spec={"group": "abelian", "dim": dim, "field": fld.to_json(), "radius": radius},
        abelian=True)


def matrix_log(n: int, radius: float = 0.2) -> LocalChartGroup:
    """GL(n, R) in the chart X = log(g), flattened row-major."""
    fam = SeminormFamily.standard(n * n, REAL, matrix=True)

    def mul(x, y):
        return matrix_chart_product(np.reshape(x, (n, n)), np.reshape(y, (n, n))).ravel()

    return LocalChartGroup(
        name=f"matrix_log({n})", field=REAL, dim=n * n,
        mul=mul, inv=lambda x: -x,
        radius=radius, seminorm=fam["opinf"], family=fam,
        spec={"group": "matrix_log", "n": n, "radius": radius})


def heisenberg(chart: str = "entries", radius: float = 1.0) -> LocalChartGroup:
    """Unipotent upper-triangular 3x3 matrices.

    ``entries`` uses (a, b, c) -> [[1, a, c], [0, 1, b], [0, 0, 1]];
    ``exp`` uses exponential coordinates a X + b Y + c Z with [X, Y] = Z.
    """
    fam = SeminormFamily.standard(3)
    if chart == "entries":
        def mul(x, y):
            return np.array([x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]])

        def inv(x):
            return np.array([-x[0], -x[1], -x[2] + x[0] * x[1]])
    elif chart == "exp":
        def mul(x, y):
            return np.array([x[0] + y[0], x[1] + y[1],
                             x[2] + y[2] + 0.5 * (x[0] * y[1] - x[1] * y[0])])

        def inv(x):
            return -np.asarray(x, float)
    else:
        raise ValueError(f"unknown heisenberg chart {chart!r}")
    return LocalChartGroup(
        name=f"heisenberg[{chart}]", field=REAL, dim=3, mul=mul, inv=inv,
        radius=radius, seminorm=fam["max"], family=fam,
        spec={"group": "heisenberg", "chart": chart, "radius": radius})


def multiplicative(radius: float = 0.5) -> LocalChartGroup:
    """(R_{>0}, *) in the chart t -> t - 1."""
    fam = SeminormFamily.standard(1)
    return LocalChartGroup(
        name="multiplicative", field=REAL, dim=1,
        mul=lambda x, y: x + y + x * y, inv=lambda x: -x / (1 + x),
        radius=radius, seminorm=fam["max"], family=fam,
        spec={"group": "multiplicative", "radius": radius}, abelian=True)


def padic_congruence(n: int, p: int, prec: int = 24, radius=None) -> LocalChartGroup:
    """1 + p M_n(Z_p) in the chart g -> (g - 1)/p, in exact rational arithmetic."""
    fld = PAdicField(p, prec)
    fam = SeminormFamily.standard(n * n, fld)
    P = Fraction(p)
    eye = fraction_array(np.eye(n, dtype=int))

    def mul(x, y):
        X, Y = np.reshape(x, (n, n)), np.reshape(y, (n, n))
        return (X + Y + P * (X @ Y)).ravel()

    def inv(x):
        X = np.reshape(x, (n, n))
        return (-(X @ fraction_inverse(eye + P * X))).ravel()

    radius = as_fraction(p) if radius is None else as_fraction(radius)
    return LocalChartGroup(
        name=f"padic_congruence({n},{p})", field=fld, dim=n * n,
        mul=mul, inv=inv, radius=radius, seminorm=fam["max"], family=fam,
        spec={"group": "padic_congruence", "n": n, "p": p, "prec": prec, "radius": str(radius)},
        abelian=(n == 1))


def group_from_spec(spec: dict) -> LocalChartGroup:
    """Build a built-in group from its JSON description."""
    if not isinstance(spec, dict) or "group" not in spec:
        raise ValueError(f"group spec needs a 'group' key: {spec!r}")
    kind = spec["group"]
    if kind == "abelian":
        fld = field_from_json(spec.get("field", "real"))
        radius = spec.get("radius")
        if radius is not None and fld.is_padic:
            radius = as_fraction(radius)
        return abelian(int(spec.get("dim", 1)), fld, radius)
    if kind == "matrix_log":
        return matrix_log(int(spec.get("n", 2)), float(spec.get("radius", 0.2)))
    if kind == "heisenberg":
        return heisenberg(spec.get("chart", "entries"), float(spec.get("radius", 1.0)))
    if kind == "multiplicative":
        return multiplicative(float(spec.get("radius", 0.5)))
    if kind == "padic_congruence":
        return padic_congruence(int(spec.get("n", 1)), int(spec["p"]), int(spec.get("prec", 24)),
                                spec.get("radius"))
    raise ValueError(f"unknown built-in group {kind!r}")


def random_probe(group: LocalChartGroup, rng: np.random.Generator, level: str = "A",
                 fraction: float = 0.9):
    """A random vector well inside the given ball.

    Real: uniform direction rescaled to ``fraction`` of the radius times a
    uniform factor in [0.25, 1]. p-adic: random integers times the largest
    power of p that lands inside the ball.
    """
    r = group.radius_of(level)
    if group.field.is_padic:
        p = group.field.p
        k = 0
        while Fraction(p) ** (-k) >= r:
            k += 1
        while True:
            coords = [int(c) for c in rng.integers(-(p ** 3), p ** 3 + 1, size=group.dim)]
            if any(c % p for c in coords):
                break
        return fraction_array([Fraction(c) * Fraction(p) ** k for c in coords])
    d = rng.standard_normal(group.dim)
    nd = group.seminorm(d)
    scale = fraction * r * rng.uniform(0.25, 1.0) / nd
    return d * scale
