"""Black-box homomorphisms g = phi o f o psi^-1 between chart groups.

Each built-in exposes only its chart evaluator to the extraction code. The
``reference`` matrix is a closed-form derivative kept for reports and tests;
the extraction never reads it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .core import DomainError, field_from_json
from .groups import (LocalChartGroup, abelian, expm1_series, group_from_spec, heisenberg,
                     log1p_series, matrix_log, multiplicative, padic_congruence)
from .padic import fraction_array


@dataclass(frozen=True)
class Noise:
    """Additive perturbation eta(x) = eps * ||x||^beta * v."""

    eps: float
    beta: float
    direction: tuple

    def __call__(self, x, norm) -> np.ndarray:
        return self.eps * float(norm(x)) ** self.beta * np.asarray(self.direction, float)


@dataclass(frozen=True, eq=False)
class BlackBoxHomomorphism:
    name: str
    source: LocalChartGroup
    target: LocalChartGroup
    evaluator: Callable
    alpha: float | None = None
    noise: Noise | None = None
    reference: np.ndarray | None = None
    spec: dict = field(default_factory=dict)

    def __call__(self, x):
        self.source.require(x, "P", self.name)
        y = self.evaluator(x)
        if self.noise is not None:
            y = y + self.noise(x, self.source.seminorm)
        return y

    @property
    def field(self):
        return self.target.field

    def with_noise(self, eps: float, beta: float, direction) -> "BlackBoxHomomorphism":
        if self.source.field.is_padic:
            raise ValueError("noise models are only defined over the reals")
        return replace(self, noise=Noise(eps, beta, tuple(direction)), name=f"{self.name}+noise")


def check_homomorphism(g: BlackBoxHomomorphism, probes, tol: float = 1e-9) -> float:
    """Largest ||g(x*y) - g(x)*g(y)|| over probe pairs; raises if above tol."""
    if g.noise is not None:
        return 0.0
    worst = 0.0
    S, T = g.source, g.target
    for x, y in itertools.combinations(probes, 2):
        lhs = g(S.mul(x, y))
        rhs = T.mul(g(x), g(y))
        worst = max(worst, float(T.seminorm(lhs - rhs)))
    if worst > tol:
        raise ValueError(f"{g.name} fails the homomorphism identity by {worst:.3g}")
    return worst


# ---------------------------------------------------------------------------
# built-in maps


def identity(group: LocalChartGroup) -> BlackBoxHomomorphism:
    return BlackBoxHomomorphism("identity", group, group, lambda x: np.array(x, copy=True),
                                reference=np.eye(group.dim), spec={"map": "identity"})


def linear(L, source: LocalChartGroup, target: LocalChartGroup) -> BlackBoxHomomorphism:
    """x -> L x between abelian charts."""
    if not (source.abelian and target.abelian):
        raise ValueError("linear maps are homomorphisms only between abelian charts")
    if source.field.is_padic:
        M = fraction_array(L)
    else:
        M = np.asarray(L, float)
    if M.shape != (target.dim, source.dim):
        raise ValueError(f"L must have shape {(target.dim, source.dim)}")
    return BlackBoxHomomorphism("linear", source, target, lambda x: M @ x, reference=M,
                                spec={"map": "linear", "L": [[str(v) for v in row] for row in M]
                                      if source.field.is_padic else M.tolist()})


def conjugation(S, radius: float = 0.2) -> BlackBoxHomomorphism:
    """X -> log(S exp(X) S^-1) on matrix_log(n)."""
    S = np.asarray(S, float)
    n = S.shape[0]
    Sinv = np.linalg.inv(S)
    G = matrix_log(n, radius)

    def g(x):
        E = expm1_series(np.reshape(x, (n, n)))
        return log1p_series(S @ E @ Sinv).ravel()

    return BlackBoxHomomorphism("conjugation", G, G, g, reference=np.kron(S, Sinv.T),
                                spec={"map": "conjugation", "S": S.tolist(), "radius": radius})


def _det1m(E: np.ndarray) -> float:
    """det(I + E) - 1 as the sum of principal minors of E."""
    n = E.shape[0]
    total = 0.0
    for r in range(1, n + 1):
        for idx in itertools.combinations(range(n), r):
            total += np.linalg.det(E[np.ix_(idx, idx)]) if r > 1 else E[idx[0], idx[0]]
    return total


def determinant(n: int = 2, radius: float = 0.2, target_radius: float = 0.5) -> BlackBoxHomomorphism:
    """det: GL(n) -> R_{>0}, from the log chart to the chart t -> t - 1."""
    G = matrix_log(n, radius)
    H = multiplicative(target_radius)

    def g(x):
        return np.array([_det1m(expm1_series(np.reshape(x, (n, n))))])

    return BlackBoxHomomorphism("det", G, H, g, reference=np.eye(n).reshape(1, -1),
                                spec={"map": "det", "n": n, "radius": radius})


def power(m: int, group: LocalChartGroup) -> BlackBoxHomomorphism:
    """t -> t^m on the multiplicative chart or on the 1 x 1 congruence group."""
    if group.dim != 1:
        raise ValueError("power maps are built for one-dimensional groups")
    if group.field.is_padic:
        P = Fraction(group.field.p)

        def g(x):
            return fraction_array([((1 + P * x[0]) ** m - 1) / P])
    elif group.name == "multiplicative":
        def g(x):
            return np.array([np.expm1(m * np.log1p(x[0]))])
    else:
        raise ValueError("power maps need the multiplicative or padic_congruence(1, p) group")
    ref = fraction_array([[m]]) if group.field.is_padic else np.array([[float(m)]])
    return BlackBoxHomomorphism(f"power{m}", group, group, g, reference=ref,
                                spec={"map": "power", "m": m})


def heisenberg_chart_change(direction: str = "entries_to_exp", radius: float = 1.0) -> BlackBoxHomomorphism:
    """The identity of the Heisenberg group written between its two charts."""
    E, X = heisenberg("entries", radius), heisenberg("exp", radius)
    if direction == "entries_to_exp":
        def g(x):
            return np.array([x[0], x[1], x[2] - 0.5 * x[0] * x[1]])
        src, tgt = E, X
    elif direction == "exp_to_entries":
        def g(x):
            return np.array([x[0], x[1], x[2] + 0.5 * x[0] * x[1]])
        src, tgt = X, E
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return BlackBoxHomomorphism(f"heisenberg[{direction}]", src, tgt, g, reference=np.eye(3),
                                spec={"map": "heisenberg_chart", "direction": direction})


def table(pairs, source: LocalChartGroup, target: LocalChartGroup) -> BlackBoxHomomorphism:
    """Exact-lookup evaluator built from (input, output) pairs; no interpolation."""
    fld = source.field
    lookup = {}
    for inp, out in pairs:
        key = tuple(fld.vector(inp).tolist())
        lookup[key] = target.field.vector(out)
    zero = tuple(source.zero().tolist())
    lookup.setdefault(zero, target.zero())

    def g(x):
        key = tuple(fld.vector(x).tolist())
        try:
            return lookup[key].copy()
        except KeyError:
            raise DomainError(f"table evaluator has no entry for {list(key)}") from None

    return BlackBoxHomomorphism("table", source, target, g, spec={"map": "table"})


def power_norm_fixture(beta: float, v, dim: int = 1) -> BlackBoxHomomorphism:
    """g(x) = ||x||_max^beta * v on abelian charts: exactly H_beta at 0.

    Not a homomorphism; it calibrates the Hölder estimator.
    """
    v = np.asarray(v, float)
    src, tgt = abelian(dim), abelian(v.shape[0])

    def g(x):
        return float(np.max(np.abs(x))) ** beta * v

    return BlackBoxHomomorphism(f"norm^{beta}", src, tgt, g, alpha=beta,
                                spec={"map": "power_norm", "beta": beta, "v": v.tolist(), "dim": dim})


def one_parameter_exp(Xgen, radius: float = 0.2) -> Callable:
    """t -> chart of exp(t X) in matrix_log(n) (equal to t X)."""
    Xgen = np.asarray(Xgen, float)
    n = Xgen.shape[0]

    def xi(t):
        E = expm1_series(t * Xgen)
        return log1p_series(E).ravel()

    xi.target = matrix_log(n, radius)
    return xi


def one_parameter_multiplicative(c: float, radius: float = 0.5) -> Callable:
    """t -> exp(c t) - 1 in the multiplicative chart."""
    def xi(t):
        return np.array([np.expm1(c * t)])

    xi.target = multiplicative(radius)
    return xi


def from_spec(spec: dict, base_dir: Path | None = None) -> BlackBoxHomomorphism:
    """Build a homomorphism from its JSON description."""
    kind = spec.get("map")
    if kind == "identity":
        return identity(group_from_spec(spec["group"]))
    if kind == "linear":
        src = group_from_spec(spec.get("source", {"group": "abelian", "dim": len(spec["L"][0])}))
        tgt = group_from_spec(spec.get("target", {"group": "abelian", "dim": len(spec["L"]),
                                                  "field": src.field.to_json()}))
        return linear(spec["L"], src, tgt)
    if kind == "conjugation":
        return conjugation(spec["S"], float(spec.get("radius", 0.2)))
    if kind == "det":
        return determinant(int(spec.get("n", 2)), float(spec.get("radius", 0.2)),
                           float(spec.get("target_radius", 0.5)))
    if kind == "power":
        return power(int(spec["m"]), group_from_spec(spec["group"]))
    if kind == "heisenberg_chart":
        return heisenberg_chart_change(spec.get("direction", "entries_to_exp"),
                                       float(spec.get("radius", 1.0)))
    if kind == "power_norm":
        return power_norm_fixture(float(spec["beta"]), spec.get("v", [1.0]), int(spec.get("dim", 1)))
    if kind == "table":
        pairs = spec.get("pairs")
        if pairs is None:
            path = Path(spec["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            pairs = json.loads(path.read_text())
        return table(pairs, group_from_spec(spec["source"]), group_from_spec(spec["target"]))
    raise ValueError(f"unknown homomorphism {kind!r}")


def corpus() -> list[BlackBoxHomomorphism]:
    """The built-in real homomorphisms used by the invariant suite."""
    return [
        identity(abelian(2)),
        linear([[1.0, 2.0], [-0.5, 3.0]], abelian(2), abelian(2)),
        conjugation([[1.0, 1.0], [0.0, 1.0]]),
        determinant(2),
        power(3, multiplicative()),
        heisenberg_chart_change("entries_to_exp"),
        heisenberg_chart_change("exp_to_entries"),
        identity(heisenberg("entries")),
    ]


def padic_corpus(p: int = 5, prec: int = 24) -> list[BlackBoxHomomorphism]:
    fld = field_from_json({"p": p, "prec": prec})
    A1 = abelian(1, fld)
    return [
        linear([[3]], A1, A1),
        power(7, padic_congruence(1, p, prec)),
        identity(padic_congruence(1, p, prec)),
    ]
