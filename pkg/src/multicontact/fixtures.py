"""Reference charts and seeded random generators shared by tests, scripts and the CLI."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .distribution import AdaptedChart
from .expr import ZERO, Expr, const, differentiate, var
from .forms import DifferentialForm
from .jet import JetChart, build_jet_chart, prolong
from .symplectization import P, HomogeneousChart

# J^1 with m=1, n=2 is CHART-B after this renaming
JET_121_TO_B = {"x1": "x1", "u1_1": "x2", "u2_1": "x3", "u1": "z1", "u2": "z2"}


def chart_a() -> AdaptedChart:
    """Standard contact structure dz1 - x2 dx1."""
    return AdaptedChart(["x1", "x2"], ["z1"], [["x2"], ["0"]])


def chart_b() -> AdaptedChart:
    return AdaptedChart(["x1", "x2", "x3"], ["z1", "z2"], [["x2", "x3"], ["0", "0"], ["0", "0"]])


def chart_c() -> AdaptedChart:
    return AdaptedChart(["x1", "x2", "x3"], ["z1", "z2"], [["0", "0"]] * 3)


def chart_d() -> AdaptedChart:
    return AdaptedChart(["x1", "x2", "x3"], ["z1", "z2"], [["x2", "0"], ["0", "0"], ["0", "0"]])


def chart_irregular() -> AdaptedChart:
    """Curvature -2 x2 vanishes on x2 = 0, so the characteristic rank jumps there."""
    return AdaptedChart(["x1", "x2", "x3"], ["z1", "z2"], [["x2^2", "0"], ["0", "0"], ["0", "0"]])


FIXTURES = {"A": chart_a, "B": chart_b, "C": chart_c, "D": chart_d}
EXPECTED_CHAR_RANK = {"A": 0, "B": 0, "C": 3, "D": 1}


def random_polynomial(rng: random.Random, names: Sequence[str], degree: int = 2, terms: int = 4) -> Expr:
    out = ZERO
    for _ in range(terms):
        mono = const(Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
        for _ in range(rng.randint(0, degree)):
            mono = mono * var(rng.choice(list(names)))
        out = out + mono
    return out


def contact_field_a(nu: Expr) -> tuple:
    """The contact field on CHART-A with generating function ``nu``, as (X_a, X_i)."""
    x2 = var("x2")
    return ([nu], [-differentiate(nu, "x2"), differentiate(nu, "x1") + x2 * differentiate(nu, "z1")])


def random_contact_field_a(rng: random.Random, degree: int = 2) -> tuple:
    return contact_field_a(random_polynomial(rng, ("x1", "x2", "z1"), degree))


def random_point_field(rng: random.Random, m: int, n: int, degree: int = 2, terms: int = 3) -> tuple:
    """Random polynomial (X^i, X^alpha) on E with coordinates x1..xm, u1..un."""
    names = [f"x{i}" for i in range(1, m + 1)] + [f"u{a}" for a in range(1, n + 1)]
    X_i = [random_polynomial(rng, names, degree, terms) for _ in range(m)]
    X_alpha = [random_polynomial(rng, names, degree, terms) for _ in range(n)]
    return X_i, X_alpha


_JET_121: JetChart | None = None


def random_symmetry_b(rng: random.Random, degree: int = 2) -> tuple:
    """A multicontact field on CHART-B: a prolonged point field carried over from J^1(1, 2)."""
    global _JET_121
    if _JET_121 is None:
        _JET_121 = build_jet_chart(1, 2, 1)
    pr = prolong(_JET_121, *random_point_field(rng, 1, 2, degree))
    sub = {k: var(v) for k, v in JET_121_TO_B.items()}
    return ([c.substitute(sub) for c in pr.X_a], [c.substitute(sub) for c in pr.X_i])


def random_symmetry(rng: random.Random, name: str) -> tuple:
    if name == "A":
        return random_contact_field_a(rng)
    if name == "B":
        return random_symmetry_b(rng)
    raise ValueError(f"no symmetry generator for chart {name}")


def random_homogeneous_form(rng: random.Random, h: HomogeneousChart, degree: int, terms: int = 3) -> DifferentialForm:
    """Sum of terms p f dx^I and f dp ^ dx^J with f independent of p."""
    base = list(h.base.coords)
    out = DifferentialForm(h.chart, degree)
    p = var(P)
    for _ in range(terms):
        f = random_polynomial(rng, base, 2, 3)
        if degree == 0 or rng.random() < 0.5:
            idx = tuple(sorted(rng.sample(base, degree)))
            term = DifferentialForm.from_names(h.chart, {idx: p * f})
        else:
            idx = (P,) + tuple(sorted(rng.sample(base, degree - 1)))
            term = DifferentialForm.from_names(h.chart, {idx: f})
        out = out + term
    return out
