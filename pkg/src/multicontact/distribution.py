"""Distributions in adapted coordinates.

A distribution ``C`` of rank ``r`` and codimension ``n`` is given on a chart
``(x^1..x^r, z^1..z^n)`` by the frame ``C_i = d/dx^i + C_i^a d/dz^a``.  All
other data (annihilator, curvature, characteristic distribution, symmetry
conditions) is derived from the coefficient matrix ``C_i^a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .expr import (
    ONE,
    ZERO,
    EvaluationError,
    Expr,
    SamplingPolicy,
    differentiate,
    evaluate_at_samples,
    parse_expr,
    probably_equal,
    sample_points,
    _eval_vec,
    _name,
)
from .forms import Chart, DifferentialForm, VectorField
from .linalg import null_space, numeric_rank

__all__ = [
    "AdaptedChart",
    "CurvatureTensor",
    "SectionOfN",
    "Classification",
    "frame_fields",
    "annihilator_forms",
    "curvature",
    "characteristic_matrix_at",
    "characteristic_rank_at",
    "characteristic_kernel_at",
    "classify",
    "symmetry_residual",
    "theta_of",
    "hamiltonian_defect",
    "frame_components",
    "field_from_frame",
    "is_symmetry",
    "find_symmetries",
]


class AdaptedChart:
    """Coordinates ``x`` (along C), ``z`` (transverse) and coefficients ``C[i][a]``."""

    def __init__(self, x: Sequence, z: Sequence, coeffs: Sequence[Sequence]):
        self.x = tuple(_name(v) for v in x)
        self.z = tuple(_name(v) for v in z)
        if not self.x or not self.z:
            raise ValueError("an adapted chart needs rank >= 1 and codimension >= 1")
        if set(self.x) & set(self.z):
            raise ValueError("x and z coordinates must be disjoint")
        self.chart = Chart(self.x + self.z)
        if len(coeffs) != len(self.x) or any(len(row) != len(self.z) for row in coeffs):
            raise ValueError(f"coefficient matrix must be {len(self.x)} x {len(self.z)}")
        vocab = set(self.chart.coords)
        rows = []
        for row in coeffs:
            out = []
            for c in row:
                e = parse_expr(c, vocab) if isinstance(c, str) else Expr._coerce(c)
                if not e.free_variables() <= vocab:
                    raise ValueError(f"coefficient {e} uses variables outside the chart")
                out.append(e)
            rows.append(tuple(out))
        self.C = tuple(rows)
        self._curvature = None

    @property
    def rank(self) -> int:
        return len(self.x)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def coords(self) -> tuple:
        return self.chart.coords

    def frame_operator(self, i: int, f: Expr) -> Expr:
        """C_i(f) for the i-th frame field (0-based)."""
        out = differentiate(f, self.x[i])
        for a, za in enumerate(self.z):
            if not self.C[i][a].is_zero():
                out = out + self.C[i][a] * differentiate(f, za)
        return out

    def divergence_coefficient(self, i: int) -> Expr:
        """Sum over a of dC_i^a/dz^a."""
        out = ZERO
        for a, za in enumerate(self.z):
            out = out + differentiate(self.C[i][a], za)
        return out

    def rename(self, mapping: Mapping[str, str]) -> "AdaptedChart":
        sub = {k: Expr._coerce(v) for k, v in mapping.items()}
        return AdaptedChart([mapping.get(v, v) for v in self.x], [mapping.get(v, v) for v in self.z],
                            [[c.substitute(sub) for c in row] for row in self.C])

    def to_json(self) -> dict:
        return {"x": list(self.x), "z": list(self.z), "C": [[str(c) for c in row] for row in self.C]}

    @classmethod
    def from_json(cls, data: Mapping) -> "AdaptedChart":
        try:
            return cls(data["x"], data["z"], [[str(c) for c in row] for row in data["C"]])
        except KeyError as err:
            raise ValueError(f"chart file is missing key {err}") from None

    def __repr__(self):
        return f"AdaptedChart(x={self.x}, z={self.z}, C={[[str(c) for c in r] for r in self.C]})"


@dataclass(frozen=True)
class CurvatureTensor:
    """Entries R^a_ij stored for i < j (0-based indices)."""

    chart: AdaptedChart
    entries: Mapping[tuple, Expr]

    def __call__(self, a: int, i: int, j: int) -> Expr:
        if i == j:
            return ZERO
        if i < j:
            return self.entries.get((a, i, j), ZERO)
        return -self.entries.get((a, j, i), ZERO)

    def nonzero(self) -> dict:
        return {k: v for k, v in self.entries.items() if not v.is_zero()}

    def is_structurally_zero(self) -> bool:
        return not self.nonzero()


@dataclass(frozen=True)
class SectionOfN:
    """Section of the normal bundle, components relative to theta(d/dz^a)."""

    chart: AdaptedChart
    components: tuple

    def __post_init__(self):
        comps = tuple(Expr._coerce(c) for c in self.components)
        if len(comps) != self.chart.n:
            raise ValueError(f"expected {self.chart.n} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)


def frame_fields(chart: AdaptedChart) -> list:
    fields = []
    for i, xi in enumerate(chart.x):
        comps = {xi: ONE}
        for a, za in enumerate(chart.z):
            comps[za] = chart.C[i][a]
        fields.append(VectorField(chart.chart, comps))
    return fields


def annihilator_forms(chart: AdaptedChart) -> list:
    forms = []
    for a, za in enumerate(chart.z):
        coeffs = {(chart.chart.index(za),): ONE}
        for i, xi in enumerate(chart.x):
            if not chart.C[i][a].is_zero():
                coeffs[(chart.chart.index(xi),)] = -chart.C[i][a]
        forms.append(DifferentialForm(chart.chart, 1, coeffs))
    return forms


def curvature(chart: AdaptedChart) -> CurvatureTensor:
    if chart._curvature is None:
        entries = {}
        for a in range(chart.n):
            for i in range(chart.rank):
                for j in range(i + 1, chart.rank):
                    entries[(a, i, j)] = (chart.frame_operator(i, chart.C[j][a])
                                          - chart.frame_operator(j, chart.C[i][a]))
        chart._curvature = CurvatureTensor(chart, entries)
    return chart._curvature


def characteristic_matrix_at(chart: AdaptedChart, pt: Mapping[str, float]) -> np.ndarray:
    """The (n*rank x rank) matrix [R^a_ij(pt)] acting on zeta^j."""
    R = curvature(chart)
    rank = chart.rank
    env = {_name(k): np.array([float(v)]) for k, v in pt.items()}
    mat = np.zeros((chart.n * rank, rank))
    cache: dict = {}
    with np.errstate(all="ignore"):
        for (a, i, j), e in R.nonzero().items():
            vals, bad = _eval_vec(e, env, cache, 1)
            if bad[0]:
                raise EvaluationError(f"curvature entry {e} is singular at {dict(pt)}")
            mat[a * rank + i, j] = vals[0]
            mat[a * rank + j, i] = -vals[0]
    return mat


def characteristic_rank_at(chart: AdaptedChart, pt: Mapping[str, float]) -> int:
    """Dimension of the characteristic distribution D at ``pt``."""
    return chart.rank - numeric_rank(characteristic_matrix_at(chart, pt))


def characteristic_kernel_at(chart: AdaptedChart, pt: Mapping[str, float]) -> np.ndarray:
    """Numeric basis (rows) of {zeta : R^a_ij zeta^j = 0} at ``pt``."""
    return null_space(characteristic_matrix_at(chart, pt))


@dataclass(frozen=True)
class Classification:
    kind: str  # "multicontact" | "pre_multicontact" | "irregular"
    n: int
    char_rank: int | None = None
    ranks: tuple = field(default=(), compare=False)

    def __str__(self):
        if self.kind == "multicontact":
            return f"multicontact({self.n})"
        if self.kind == "pre_multicontact":
            return f"pre_multicontact({self.n}, char_rank={self.char_rank})"
        return "irregular"


def probe_points(names: Sequence[str], policy: SamplingPolicy) -> list:
    """Random sample points plus structured probes.

    Besides ``num_samples`` random points this includes the origin and, for
    each coordinate, one random point with that coordinate set to zero, so
    that rank drops on coordinate hyperplanes are seen.
    """
    env = sample_points(names, policy)
    pts = [{n: float(env[n][s]) for n in names} for s in range(policy.num_samples)]
    pts.append({n: 0.0 for n in names})
    for k, n in enumerate(names):
        pt = dict(pts[k % policy.num_samples])
        pt[n] = 0.0
        pts.append(pt)
    return pts


def classify(chart: AdaptedChart, policy: SamplingPolicy | None = None) -> Classification:
    policy = policy or SamplingPolicy()
    ranks = []
    for pt in probe_points(chart.coords, policy):
        try:
            ranks.append(characteristic_rank_at(chart, pt))
        except EvaluationError:
            continue
    distinct = set(ranks)
    if len(distinct) != 1:
        return Classification("irregular", chart.n, None, tuple(ranks))
    (r,) = distinct
    if r == 0:
        return Classification("multicontact", chart.n, 0, tuple(ranks))
    return Classification("pre_multicontact", chart.n, r, tuple(ranks))


def _coerce_list(values, expected: int, what: str) -> list:
    out = [Expr._coerce(v) for v in values]
    if len(out) != expected:
        raise ValueError(f"{what} needs {expected} entries, got {len(out)}")
    return out


def symmetry_residual(chart: AdaptedChart, X_a: Sequence, X_i: Sequence) -> list:
    """Residuals C_i(X^a) - dC_i^a/dz^b X^b + R^a_ij X^j, ordered (a, i)."""
    X_a = _coerce_list(X_a, chart.n, "X_a")
    X_i = _coerce_list(X_i, chart.rank, "X_i")
    R = curvature(chart)
    out = []
    for a in range(chart.n):
        for i in range(chart.rank):
            res = chart.frame_operator(i, X_a[a])
            for b, zb in enumerate(chart.z):
                res = res - differentiate(chart.C[i][a], zb) * X_a[b]
            for j in range(chart.rank):
                res = res + R(a, i, j) * X_i[j]
            out.append(res)
    return out


def is_symmetry(chart: AdaptedChart, X_a, X_i, policy: SamplingPolicy | None = None) -> bool:
    return all(probably_equal(r, ZERO, policy) for r in symmetry_residual(chart, X_a, X_i))


def theta_of(chart: AdaptedChart, X_a: Sequence, X_i: Sequence) -> SectionOfN:
    _coerce_list(X_i, chart.rank, "X_i")
    return SectionOfN(chart, tuple(_coerce_list(X_a, chart.n, "X_a")))


def hamiltonian_defect(chart: AdaptedChart, nu: SectionOfN, X_i: Sequence) -> list:
    """Residuals dC_i^a/dz^b nu^b - C_i(nu^a) - R^a_ij X^j, ordered (a, i)."""
    X_i = _coerce_list(X_i, chart.rank, "X_i")
    R = curvature(chart)
    out = []
    for a in range(chart.n):
        for i in range(chart.rank):
            res = -chart.frame_operator(i, nu.components[a])
            for b, zb in enumerate(chart.z):
                res = res + differentiate(chart.C[i][a], zb) * nu.components[b]
            for j in range(chart.rank):
                res = res - R(a, i, j) * X_i[j]
            out.append(res)
    return out


def frame_components(chart: AdaptedChart, X: VectorField) -> tuple:
    """Split a raw-coordinate field as X = X^a d/dz^a + X^i C_i; returns (X_a, X_i)."""
    X_i = [X[x] for x in chart.x]
    X_a = []
    for a, za in enumerate(chart.z):
        val = X[za]
        for i in range(chart.rank):
            if not chart.C[i][a].is_zero():
                val = val - chart.C[i][a] * X_i[i]
        X_a.append(val)
    return X_a, X_i


def field_from_frame(chart: AdaptedChart, X_a: Sequence, X_i: Sequence, target: Chart | None = None) -> VectorField:
    """Raw-coordinate field X^a d/dz^a + X^i C_i (optionally on a larger chart)."""
    X_a = _coerce_list(X_a, chart.n, "X_a")
    X_i = _coerce_list(X_i, chart.rank, "X_i")
    comps = {x: X_i[i] for i, x in enumerate(chart.x)}
    for a, za in enumerate(chart.z):
        val = X_a[a]
        for i in range(chart.rank):
            val = val + chart.C[i][a] * X_i[i]
        comps[za] = val
    return VectorField(target or chart.chart, comps)


def find_symmetries(chart: AdaptedChart, policy: SamplingPolicy | None = None,
                    max_fields: int | None = None) -> list:
    """Search for multicontact fields among combinations of simple raw fields.

    Candidates are ``d/dc`` and ``c' d/dc`` for chart coordinates ``c, c'``.
    The symmetry residual is linear in the combination weights, so a null
    space of the sampled residual matrix gives symmetric combinations.
    Weights are rounded to small rationals and every returned field is
    re-verified with :func:`is_symmetry`.  Returns a list of ``(X_a, X_i)``.
    """
    policy = policy or SamplingPolicy()
    coords = chart.coords
    candidates = []
    for c in coords:
        candidates.append(VectorField(chart.chart, {c: ONE}))
        for c2 in coords:
            candidates.append(VectorField(chart.chart, {c: Expr._coerce(c2)}))
    residuals = [symmetry_residual(chart, *frame_components(chart, X)) for X in candidates]
    flat = [r for res in residuals for r in res]
    values, _ = evaluate_at_samples(flat, policy.with_(num_samples=max(policy.num_samples, 8)),
                                    extra_names=coords)
    per = len(residuals[0])
    # rows: (residual index, sample); columns: candidates
    mat = np.concatenate([values[k * per:(k + 1) * per].reshape(-1, 1) for k in range(len(candidates))], axis=1)
    basis = null_space(mat, rtol=1e-9)
    found = []
    for vec in basis:
        weights = [Fraction(w).limit_denominator(1000) for w in vec]
        X = VectorField(chart.chart)
        for w, cand in zip(weights, candidates):
            if w:
                X = X + cand * Expr._coerce(w)
        if X.is_zero():
            continue
        X_a, X_i = frame_components(chart, X)
        if is_symmetry(chart, X_a, X_i, policy):
            found.append((X_a, X_i))
        if max_fields is not None and len(found) >= max_fields:
            break
    return found
