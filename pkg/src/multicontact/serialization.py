"""JSON formats for charts, fields, forms, graded elements and jet specs.

Forms are maps from comma-joined coordinate names to expression strings, for
example ``{"x1,p": "x2"}`` for ``x2 dx1 ^ dp``; the empty key is a 0-form.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .distribution import AdaptedChart
from .expr import parse_expr
from .forms import Chart, DifferentialForm, VectorField
from .jet import JetSpec
from .linfty import GradedElement, LinftyContext, element_from_symmetry, element_of_positive_degree

__all__ = [
    "InputError",
    "load_json",
    "chart_from_json",
    "field_from_json",
    "form_from_json",
    "form_to_json",
    "vector_field_to_json",
    "element_from_json",
    "elements_from_json",
    "jet_spec_from_json",
    "base_field_from_json",
]


class InputError(ValueError):
    """Malformed or inconsistent user input."""


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: invalid JSON ({err.msg} at line {err.lineno} column {err.colno})") from None


def _require(data, key, where):
    if not isinstance(data, Mapping) or key not in data:
        raise InputError(f"{where}: missing key {key!r}")
    return data[key]


def chart_from_json(data) -> AdaptedChart:
    x, z, C = (_require(data, k, "chart") for k in ("x", "z", "C"))
    if not isinstance(C, list) or len(C) != len(x) or any(not isinstance(r, list) or len(r) != len(z) for r in C):
        raise InputError(f"chart: C must be a {len(x)} x {len(z)} list of expression strings")
    return AdaptedChart(x, z, [[str(c) for c in row] for row in C])


def _expr_list(values, vocab, what):
    if not isinstance(values, list):
        raise InputError(f"{what} must be a list of expression strings")
    return [parse_expr(str(v), vocab) for v in values]


def field_from_json(chart: AdaptedChart, data) -> tuple:
    """``{"Xa": [...], "Xi": [...]}`` in the adapted frame; returns (X_a, X_i)."""
    vocab = set(chart.coords)
    X_a = _expr_list(_require(data, "Xa", "field"), vocab, "Xa")
    X_i = _expr_list(_require(data, "Xi", "field"), vocab, "Xi")
    if len(X_a) != chart.n or len(X_i) != chart.rank:
        raise InputError(f"field needs {chart.n} Xa entries and {chart.rank} Xi entries")
    return X_a, X_i


def form_from_json(chart: Chart, data: Mapping) -> DifferentialForm:
    if not isinstance(data, Mapping):
        raise InputError("form must be a JSON object")
    terms = {}
    for key, text in data.items():
        names = tuple(n.strip() for n in key.split(",")) if key.strip() else ()
        for n in names:
            if n not in chart:
                raise InputError(f"form key {key!r} uses unknown coordinate {n!r}")
        terms[names] = parse_expr(str(text), set(chart.coords))
    if len({len(k) for k in terms}) > 1:
        raise InputError("form mixes degrees")
    return DifferentialForm.from_names(chart, terms)


def form_to_json(form: DifferentialForm | None) -> dict:
    if form is None:
        return {}
    return {",".join(names): str(c) for names, c in sorted(form.to_names().items())}


def vector_field_to_json(X: VectorField) -> dict:
    return {name: str(X[name]) for name in X.chart.coords if not X[name].is_zero()}


def element_from_json(ctx: LinftyContext, data, check: bool = True) -> GradedElement:
    degree = _require(data, "degree", "element")
    if not isinstance(degree, int):
        raise InputError("element degree must be an integer")
    if "from_symmetry" in data:
        if degree != 0:
            raise InputError("from_symmetry elements have degree 0")
        X_a, X_i = field_from_json(ctx.h.base, data["from_symmetry"])
        return element_from_symmetry(ctx, X_a, X_i, check=check)
    form = form_from_json(ctx.h.chart, _require(data, "form", "element"))
    if degree == 0:
        raise InputError("degree-0 elements must be given as from_symmetry")
    return element_of_positive_degree(ctx, degree, form, check=check)


def elements_from_json(ctx: LinftyContext, data) -> list:
    if isinstance(data, Mapping):
        data = _require(data, "elements", "elements file")
    if not isinstance(data, list):
        raise InputError("elements file must hold a list of elements")
    return [element_from_json(ctx, item) for item in data]


def jet_spec_from_json(data) -> JetSpec:
    return JetSpec(*(int(_require(data, k, "jet spec")) for k in ("m", "n", "k")))


def base_field_from_json(spec: JetSpec, data) -> tuple:
    """``{"Xi": [...], "Xalpha": [...]}`` over x1..xm, u1..un."""
    vocab = {f"x{i}" for i in range(1, spec.m + 1)} | {f"u{a}" for a in range(1, spec.n + 1)}
    X_i = _expr_list(_require(data, "Xi", "base field"), vocab, "Xi")
    X_alpha = _expr_list(_require(data, "Xalpha", "base field"), vocab, "Xalpha")
    if len(X_i) != spec.m or len(X_alpha) != spec.n:
        raise InputError(f"base field needs {spec.m} Xi entries and {spec.n} Xalpha entries")
    return X_i, X_alpha
