"""Exterior calculus on a single coordinate chart.

Forms are stored sparsely: a map from strictly increasing coordinate-index
tuples to coefficient expressions.  Vector fields map coordinate names to
component expressions.  Zero coefficients are dropped eagerly; the check is
structural, never probabilistic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .expr import (
    ONE,
    ZERO,
    Expr,
    SamplingPolicy,
    differentiate,
    evaluate_at_samples,
    _name,
)

__all__ = [
    "Chart",
    "ChartMismatchError",
    "VectorField",
    "DifferentialForm",
    "wedge",
    "exterior_derivative",
    "interior_product",
    "lie_derivative",
    "lie_bracket",
    "forms_probably_equal",
    "max_residual",
]


class ChartMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    coords: tuple

    def __init__(self, coords: Iterable):
        names = tuple(_name(c) for c in coords)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        object.__setattr__(self, "coords", names)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name) -> int:
        return self._index[_name(name)]

    def __contains__(self, name) -> bool:
        return _name(name) in self._index

    def d(self, name) -> "DifferentialForm":
        """The coordinate 1-form ``d<name>``."""
        return DifferentialForm(self, 1, {(self.index(name),): ONE})

    def partial(self, name) -> "VectorField":
        return VectorField(self, {_name(name): ONE})

    def function(self, f) -> "DifferentialForm":
        return DifferentialForm(self, 0, {(): Expr._coerce(f)})


def _same_chart(a, b):
    if a.chart != b.chart:
        raise ChartMismatchError(f"{a.chart.coords} vs {b.chart.coords}")


def _sort_sign(idx: tuple):
    """Sort ``idx``; return (sorted tuple, sign) or (None, 0) on a repeat."""
    if len(set(idx)) != len(idx):
        return None, 0
    inversions = sum(1 for a, b in combinations(range(len(idx)), 2) if idx[a] > idx[b])
    return tuple(sorted(idx)), (-1 if inversions % 2 else 1)


class VectorField:
    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Mapping[str, Expr] | None = None):
        comps = {}
        for k, v in (components or {}).items():
            k = _name(k)
            if k not in chart:
                raise KeyError(f"{k!r} is not a coordinate of the chart")
            v = Expr._coerce(v)
            if not v.is_zero():
                comps[k] = v
        self.chart = chart
        self.components = comps

    def __getitem__(self, name) -> Expr:
        return self.components.get(_name(name), ZERO)

    def __call__(self, f: Expr) -> Expr:
        """Directional derivative X(f)."""
        f = Expr._coerce(f)
        out = ZERO
        free = f.free_variables()
        for c, comp in self.components.items():
            if c in free:
                out = out + comp * differentiate(f, c)
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self, other)
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps.get(k, ZERO) + v
        return VectorField(self.chart, comps)

    def __neg__(self):
        return VectorField(self.chart, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f) -> "VectorField":
        f = Expr._coerce(f)
        return VectorField(self.chart, {k: f * v for k, v in self.components.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.components

    def substitute(self, mapping) -> "VectorField":
        return VectorField(self.chart, {k: v.substitute(mapping) for k, v in self.components.items()})

    def __repr__(self):
        body = " + ".join(f"({v})*d/d{k}" for k, v in self.components.items()) or "0"
        return f"VectorField({body})"


class DifferentialForm:
    __slots__ = ("chart", "degree", "coefficients")

    def __init__(self, chart: Chart, degree: int, coefficients: Mapping[tuple, Expr] | None = None):
        if not 0 <= degree:
            raise ValueError("degree must be non-negative")
        coeffs = {}
        for idx, c in (coefficients or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing of length {degree}")
            c = Expr._coerce(c)
            if not c.is_zero():
                coeffs[idx] = c
        self.chart = chart
        self.degree = degree
        self.coefficients = coeffs

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "DifferentialForm":
        return cls(chart, degree)

    @classmethod
    def from_names(cls, chart: Chart, terms: Mapping[tuple, Expr]) -> "DifferentialForm":
        """Build from ``{(name, ...): coeff}`` with arbitrary name order."""
        degree = None
        acc: dict = {}
        for names, c in terms.items():
            names = tuple(names)
            degree = len(names) if degree is None else degree
            if len(names) != degree:
                raise ValueError("mixed degrees")
            idx, sign = _sort_sign(tuple(chart.index(n) for n in names))
            if idx is None:
                continue
            acc[idx] = acc.get(idx, ZERO) + Expr._coerce(c) * sign
        return cls(chart, degree or 0, acc)

    def __getitem__(self, names) -> Expr:
        """Coefficient on ``d<names[0]>^d<names[1]>^...`` (any order, signed)."""
        if isinstance(names, str):
            names = (names,)
        idx, sign = _sort_sign(tuple(self.chart.index(n) for n in names))
        if idx is None:
            return ZERO
        return self.coefficients.get(idx, ZERO) * sign

    def is_zero(self) -> bool:
        return not self.coefficients

    def _check(self, other):
        _same_chart(self, other)
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        coeffs = dict(self.coefficients)
        for k, v in other.coefficients.items():
            coeffs[k] = coeffs.get(k, ZERO) + v
        return DifferentialForm(self.chart, self.degree, coeffs)

    def __neg__(self):
        return DifferentialForm(self.chart, self.degree, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f) -> "DifferentialForm":
        f = Expr._coerce(f)
        return DifferentialForm(self.chart, self.degree, {k: f * v for k, v in self.coefficients.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def substitute(self, mapping) -> "DifferentialForm":
        return DifferentialForm(self.chart, self.degree,
                                {k: v.substitute(mapping) for k, v in self.coefficients.items()})

    def to_names(self) -> dict:
        return {tuple(self.chart.coords[i] for i in idx): c for idx, c in self.coefficients.items()}

    def __repr__(self):
        if not self.coefficients:
            return f"DifferentialForm(0, degree={self.degree})"
        parts = []
        for names, c in self.to_names().items():
            basis = "^".join("d" + n for n in names)
            parts.append(f"({c})" + (f"*{basis}" if basis else ""))
        return "DifferentialForm(" + " + ".join(parts) + ")"


def wedge(alpha: DifferentialForm, beta: DifferentialForm) -> DifferentialForm:
    _same_chart(alpha, beta)
    deg = alpha.degree + beta.degree
    if deg > alpha.chart.dim:
        return DifferentialForm(alpha.chart, deg)
    acc: dict = {}
    for I, a in alpha.coefficients.items():
        for J, b in beta.coefficients.items():
            idx, sign = _sort_sign(I + J)
            if idx is None:
                continue
            term = a * b
            acc[idx] = acc.get(idx, ZERO) + (term if sign > 0 else -term)
    return DifferentialForm(alpha.chart, deg, acc)


def exterior_derivative(alpha: DifferentialForm) -> DifferentialForm:
    chart = alpha.chart
    acc: dict = {}
    for I, c in alpha.coefficients.items():
        for name in c.free_variables():
            if name not in chart:
                continue
            k = chart.index(name)
            if k in I:
                continue
            pos = sum(1 for i in I if i < k)
            idx = I[:pos] + (k,) + I[pos:]
            dc = differentiate(c, name)
            acc[idx] = acc.get(idx, ZERO) + (dc if pos % 2 == 0 else -dc)
    return DifferentialForm(chart, alpha.degree + 1, acc)


def interior_product(X: VectorField, alpha: DifferentialForm) -> DifferentialForm:
    """Contraction of ``X`` into the first slot of ``alpha``."""
    _same_chart(X, alpha)
    if alpha.degree == 0:
        raise ValueError("interior product of a 0-form")
    chart = alpha.chart
    comps = {chart.index(k): v for k, v in X.components.items()}
    acc: dict = {}
    for I, c in alpha.coefficients.items():
        for r, i in enumerate(I):
            comp = comps.get(i)
            if comp is None:
                continue
            idx = I[:r] + I[r + 1:]
            term = comp * c
            acc[idx] = acc.get(idx, ZERO) + (term if r % 2 == 0 else -term)
    return DifferentialForm(chart, alpha.degree - 1, acc)


def lie_derivative(X: VectorField, alpha: DifferentialForm) -> DifferentialForm:
    """L_X alpha via the Cartan formula i_X d + d i_X."""
    _same_chart(X, alpha)
    out = interior_product(X, exterior_derivative(alpha))
    if alpha.degree > 0:
        out = out + exterior_derivative(interior_product(X, alpha))
    return out


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    _same_chart(X, Y)
    comps = {}
    for c in X.chart.coords:
        val = X(Y[c]) - Y(X[c])
        if not val.is_zero():
            comps[c] = val
    return VectorField(X.chart, comps)


def _coefficient_pairs(a: DifferentialForm, b: DifferentialForm):
    keys = sorted(set(a.coefficients) | set(b.coefficients))
    return [a.coefficients.get(k, ZERO) for k in keys], [b.coefficients.get(k, ZERO) for k in keys]


def forms_probably_equal(a: DifferentialForm, b: DifferentialForm,
                         policy: SamplingPolicy | None = None) -> bool:
    """Coefficientwise randomised equality of two forms."""
    a._check(b)
    policy = policy or SamplingPolicy()
    left, right = _coefficient_pairs(a, b)
    diffs = [l - r for l, r in zip(left, right)]
    if all(d.is_zero() for d in diffs):
        return True
    values, _ = evaluate_at_samples(left + right, policy)
    v1, v2 = values[: len(left)], values[len(left):]
    bound = policy.abs_tol + policy.rel_tol * np.maximum(np.abs(v1), np.abs(v2))
    return bool(np.all(np.abs(v1 - v2) <= bound))


def max_residual(obj, policy: SamplingPolicy | None = None) -> float:
    """Max |coefficient| of a form, field, expression, or list of them, over sample points."""
    exprs = list(_flatten_exprs(obj))
    exprs = [e for e in exprs if not e.is_zero()]
    if not exprs:
        return 0.0
    values, _ = evaluate_at_samples(exprs, policy or SamplingPolicy())
    return float(np.max(np.abs(values)))


def _flatten_exprs(obj):
    if isinstance(obj, Expr):
        yield obj
    elif isinstance(obj, DifferentialForm):
        yield from obj.coefficients.values()
    elif isinstance(obj, VectorField):
        yield from obj.components.values()
    elif obj is None:
        return
    else:
        for item in obj:
            yield from _flatten_exprs(item)


def evaluate_form(alpha: DifferentialForm, point: Mapping[str, float]) -> dict:
    """Numeric coefficients of ``alpha`` at a single point."""
    from .expr import evaluate

    return {idx: evaluate(c, point) for idx, c in alpha.coefficients.items()}
