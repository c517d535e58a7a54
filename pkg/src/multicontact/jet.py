"""Jet spaces J^k(E, m) as adapted charts, prolongation and explicit brackets.

Coordinates are ``x{i}`` for the independent variables and ``u{alpha}`` /
``u{alpha}_{I}`` for the dependent ones, ``I`` a sorted multi-index written as
a digit string (``u1_12`` is d^2 u^1 / dx^1 dx^2).  Total derivatives act on
any jet variable, so they may produce variables of order ``k+1``; those only
appear in intermediate results of the prolongation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from math import comb
from typing import Sequence

from .distribution import AdaptedChart, frame_components
from .expr import ONE, ZERO, Expr, SamplingPolicy, differentiate, var
from .forms import DifferentialForm, VectorField, forms_probably_equal, interior_product, wedge
from .symplectization import (
    P,
    CrossCheckError,
    HomogeneousChart,
    PreconditionError,
    build_symplectization,
)

__all__ = [
    "JetSpecError",
    "AmbientLeakError",
    "MultiIndex",
    "JetSpec",
    "JetChart",
    "Prolongation",
    "build_jet_chart",
    "total_derivative",
    "prolong",
    "prolong_vector_field",
    "jet_omega_tilde",
    "closed_form_jet_bracket",
]

DEFAULT_CAP = 40
_U = re.compile(r"u(\d+)(?:_(\d+))?\Z")
_X = re.compile(r"x(\d+)\Z")


class JetSpecError(ValueError):
    pass


class AmbientLeakError(AssertionError):
    """A prolonged component still depends on order-(k+1) jet variables."""


def MultiIndex(entries: Sequence[int] = ()) -> tuple:
    """Canonical multi-index: a sorted tuple of 1-based independent-variable indices."""
    return tuple(sorted(entries))


def u_name(alpha: int, I: Sequence[int] = ()) -> str:
    I = MultiIndex(I)
    return f"u{alpha}" + (("_" + "".join(str(i) for i in I)) if I else "")


def x_name(i: int) -> str:
    return f"x{i}"


def parse_jet_name(name: str):
    """``('x', i)`` or ``('u', alpha, I)``; None for anything else."""
    mt = _X.match(name)
    if mt:
        return ("x", int(mt.group(1)))
    mt = _U.match(name)
    if mt:
        idx = MultiIndex(int(c) for c in (mt.group(2) or ""))
        return ("u", int(mt.group(1)), idx)
    return None


@dataclass(frozen=True)
class JetSpec:
    m: int
    n: int
    k: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.k < 1:
            raise JetSpecError("m, n and k must be positive")
        if self.m > 9:
            raise JetSpecError("at most 9 independent variables (single-digit index names)")
        if self.num_coords > self.cap:
            raise JetSpecError(f"J^{self.k} with m={self.m}, n={self.n} has {self.num_coords} coordinates,"
                               f" above the cap of {self.cap}")

    @property
    def num_coords(self) -> int:
        return self.m + self.n * comb(self.m + self.k, self.k)


def multi_indices(m: int, order: int) -> list:
    return [MultiIndex(c) for c in combinations_with_replacement(range(1, m + 1), order)]


class JetChart:
    def __init__(self, spec: JetSpec):
        self.spec = spec
        m, n, k = spec.m, spec.n, spec.k
        self.xs = [x_name(i) for i in range(1, m + 1)]
        self.top = [(alpha, K) for alpha in range(1, n + 1) for K in multi_indices(m, k)]
        self.lower = [(alpha, J) for order in range(k) for alpha in range(1, n + 1) for J in multi_indices(m, order)]
        x_coords = self.xs + [u_name(a, K) for a, K in self.top]
        z_coords = [u_name(a, J) for a, J in self.lower]
        coeffs = []
        for i in range(1, m + 1):
            coeffs.append([var(u_name(a, J + (i,))) for a, J in self.lower])
        for _ in self.top:
            coeffs.append([ZERO] * len(self.lower))
        self.adapted = AdaptedChart(x_coords, z_coords, coeffs)

    @property
    def coords(self) -> tuple:
        return self.adapted.coords

    def order(self, name: str) -> int | None:
        parsed = parse_jet_name(name)
        if parsed is None or parsed[0] != "u":
            return None
        return len(parsed[2])


def build_jet_chart(m: int, n: int, k: int, cap: int = DEFAULT_CAP) -> JetChart:
    return JetChart(JetSpec(m, n, k, cap))


def total_derivative(chart: JetChart, i: int, e: Expr) -> Expr:
    """D_i e = de/dx^i + sum over jet variables u_I of u_{Ii} de/du_I (i is 1-based)."""
    e = Expr._coerce(e)
    out = differentiate(e, x_name(i))
    for name in e.free_variables():
        parsed = parse_jet_name(name)
        if parsed is None or parsed[0] != "u":
            continue
        _, alpha, I = parsed
        out = out + var(u_name(alpha, I + (i,))) * differentiate(e, name)
    return out


def total_derivative_multi(chart: JetChart, I: Sequence[int], e: Expr) -> Expr:
    for i in I:
        e = total_derivative(chart, i, e)
    return e


@dataclass
class Prolongation:
    """A prolonged point field with the data the explicit bracket formula needs."""

    chart: JetChart
    base_xi: tuple  # X^i(x, u)
    base_xalpha: tuple  # X^alpha(x, u)
    chi: tuple  # characteristics X^alpha - u_i^alpha X^i
    field: VectorField  # on the jet chart's raw coordinates
    X_a: tuple  # adapted-frame components
    X_i: tuple

    def lower_component(self, alpha: int, J) -> Expr:
        """D_J chi^alpha for |J| < k (the theta-component)."""
        return self.field[u_name(alpha, J)] - _x_part(self, alpha, J)


def _x_part(pr: Prolongation, alpha: int, J) -> Expr:
    out = ZERO
    for i, xi in enumerate(pr.base_xi, start=1):
        out = out + xi * var(u_name(alpha, tuple(J) + (i,)))
    return out


def prolong(chart: JetChart, X_i: Sequence, X_alpha: Sequence) -> Prolongation:
    """Prolong the point field X^i d/dx^i + X^alpha d/du^alpha to J^k.

    Computes X^i D_i + sum_{|I| <= k} D_I chi^alpha d/du_I^alpha with full total
    derivatives and checks that no order-(k+1) variable survives.
    """
    spec = chart.spec
    X_i = tuple(Expr._coerce(v) for v in X_i)
    X_alpha = tuple(Expr._coerce(v) for v in X_alpha)
    if len(X_i) != spec.m or len(X_alpha) != spec.n:
        raise PreconditionError(f"need {spec.m} x-components and {spec.n} u-components")
    base_vars = set(chart.xs) | {u_name(a) for a in range(1, spec.n + 1)}
    for comp in X_i + X_alpha:
        if not comp.free_variables() <= base_vars:
            raise PreconditionError(f"{comp} is not a function on E (uses {comp.free_variables() - base_vars})")
    chi = []
    for alpha in range(1, spec.n + 1):
        c = X_alpha[alpha - 1]
        for i in range(1, spec.m + 1):
            c = c - var(u_name(alpha, (i,))) * X_i[i - 1]
        chi.append(c)
    comps = {x_name(i): X_i[i - 1] for i in range(1, spec.m + 1)}
    # D_I chi for every |I| <= k, built incrementally along sorted multi-indices
    cache = {(alpha, ()): chi[alpha - 1] for alpha in range(1, spec.n + 1)}
    for order in range(1, spec.k + 1):
        for alpha in range(1, spec.n + 1):
            for I in multi_indices(spec.m, order):
                cache[(alpha, I)] = total_derivative(chart, I[-1], cache[(alpha, I[:-1])])
    for order in range(spec.k + 1):
        for alpha in range(1, spec.n + 1):
            for I in multi_indices(spec.m, order):
                val = cache[(alpha, I)]
                for i in range(1, spec.m + 1):
                    val = val + X_i[i - 1] * var(u_name(alpha, I + (i,)))
                comps[u_name(alpha, I)] = val
    allowed = set(chart.coords)
    for name, comp in comps.items():
        leaked = {v for v in comp.free_variables() - allowed if (chart.order(v) or 0) > spec.k}
        for v in leaked:
            if not differentiate(comp, v).is_zero():
                raise AmbientLeakError(f"component {name} depends on {v}")
        if comp.free_variables() - allowed:
            raise AmbientLeakError(f"component {name} uses {comp.free_variables() - allowed}")
    field = VectorField(chart.adapted.chart, comps)
    X_a, X_fi = frame_components(chart.adapted, field)
    return Prolongation(chart, X_i, X_alpha, tuple(chi), field, tuple(X_a), tuple(X_fi))


def prolong_vector_field(chart: JetChart, X_i: Sequence, X_alpha: Sequence) -> VectorField:
    return prolong(chart, X_i, X_alpha).field


def _Theta_contracted(h: HomogeneousChart, names: Sequence[str]) -> DifferentialForm:
    """i_{d/d names[0]} ... i_{d/d names[-1]} Theta (innermost is the last name)."""
    form = h.Theta
    for name in reversed(names):
        if form.degree == 0:
            return DifferentialForm(h.chart, 0)
        form = interior_product(h.chart.partial(name), form)
    return form


def jet_omega_tilde(chart: JetChart, h: HomogeneousChart | None = None,
                    policy: SamplingPolicy | None = None) -> DifferentialForm:
    """dp ^ Theta - p sum_{|J|=k-1} du_{Ji}^alpha ^ dx^i ^ Theta_alpha^J.

    Cross-checked against d(p Theta) from the generic construction.
    """
    h = h or build_symplectization(chart.adapted, policy)
    spec = chart.spec
    c = h.chart
    p = var(P)
    out = wedge(c.d(P), h.Theta)
    for alpha in range(1, spec.n + 1):
        for J in multi_indices(spec.m, spec.k - 1):
            ThetaJ = _Theta_contracted(h, [u_name(alpha, J)])
            for i in range(1, spec.m + 1):
                two = wedge(c.d(u_name(alpha, J + (i,))), c.d(x_name(i)))
                out = out - wedge(two, ThetaJ) * p
    if not forms_probably_equal(out, h.omega_tilde, policy):
        raise CrossCheckError("jet formula for omega_tilde disagrees with d(p Theta)")
    return out


def closed_form_jet_bracket(chart: JetChart, h: HomogeneousChart, fields: Sequence[Prolongation],
                       as_displayed: bool = False) -> DifferentialForm:
    """Closed-form l-ary bracket of the degree-0 elements built from prolongations.

    With V_s = sum_{|I|<k} D_I chi_s d/du_I, W_s^{Ji} the d/du_{Ji} component of
    X_s^(k) (|Ji| = k), g_s = sum_{|I|<k} d(D_I chi_s)/du_I and
    Theta^{I_1..I_r}_{a_1..a_r} = i_{d/du_{I_1}^{a_1}} ... i_{d/du_{I_r}^{a_r}} Theta::

        lambda_l = sum_I prod_s D_{I_s}chi_s [ (-1)^l p du_{Ji} ^ dx^i ^ Theta^{I_1..I_l J}
                                              - dp ^ Theta^{I_1..I_l} ]
          + sum_s (-1)^s p prod_{t != s} D_{I_t}chi_t [ g_s Theta^{..^s..}
                + (-1)^l (X_s^i du_{Ji} - W_s^{Ji} dx^i) ^ Theta^{..^s.. J} ]
          + sum_{s<t} (-1)^(l+t-s+1) p prod_{r != s,t} D_{I_r}chi_r
                (X_s^i W_t^{Ji} - X_t^i W_s^{Ji}) Theta^{..^s..^t.. J}

    where J runs over |J| = k-1 and the products run over |I_r| < k.

    ``as_displayed=True`` drops the pair terms and the (-1)^l factor on the
    single-slot du/dx terms; that variant only agrees for vertical fields
    (all X^i = 0), and is kept to test exactly that.
    """
    spec = chart.spec
    ell = len(fields)
    c = h.chart
    p = var(P)
    lower = chart.lower
    top_J = [(alpha, J) for alpha in range(1, spec.n + 1) for J in multi_indices(spec.m, spec.k - 1)]
    theta_comp = [{(a, J): f.X_a[k] for k, (a, J) in enumerate(lower)} for f in fields]
    div = []
    for f in fields:
        g = ZERO
        for a, J in lower:
            g = g + differentiate(theta_comp[len(div)][(a, J)], u_name(a, J))
        div.append(g)

    def W(s, alpha, J, i):
        return fields[s].field[u_name(alpha, J + (i,))]

    def Xs(s, i):
        return fields[s].base_xi[i - 1]

    def weighted_sum(slots, body):
        """sum over (alpha_r, I_r) for r in slots of prod theta_comp * body(names)."""
        total = None
        for choice in product(lower, repeat=len(slots)):
            coeff = ONE
            for s, key in zip(slots, choice):
                coeff = coeff * theta_comp[s][key]
                if coeff.is_zero():
                    break
            if coeff.is_zero():
                continue
            names = [u_name(a, I) for a, I in choice]
            if len(set(names)) != len(names):
                continue
            term = body(names)
            if term is None or term.is_zero():
                continue
            term = term * coeff
            total = term if total is None else total + term
        return total

    sign_l = -1 if ell % 2 else 1
    parts = []

    def main_body(names):
        out = -wedge(c.d(P), _Theta_contracted(h, names))
        for alpha, J in top_J:
            TJ = _Theta_contracted(h, names + [u_name(alpha, J)])
            if TJ.is_zero():
                continue
            for i in range(1, spec.m + 1):
                two = wedge(c.d(u_name(alpha, J + (i,))), c.d(x_name(i)))
                out = out + wedge(two, TJ) * (p * sign_l)
        return out

    parts.append(weighted_sum(list(range(ell)), main_body))

    for s in range(ell):
        others = [t for t in range(ell) if t != s]
        sign_s = -1 if (s + 1) % 2 else 1

        def single_body(names, s=s):
            out = _Theta_contracted(h, names) * div[s]
            for alpha, J in top_J:
                TJ = _Theta_contracted(h, names + [u_name(alpha, J)])
                if TJ.is_zero():
                    continue
                one = DifferentialForm(c, 1)
                for i in range(1, spec.m + 1):
                    one = one + c.d(u_name(alpha, J + (i,))) * Xs(s, i) - c.d(x_name(i)) * W(s, alpha, J, i)
                out = out + wedge(one, TJ) * (1 if as_displayed else sign_l)
            return out * (p * sign_s)

        parts.append(weighted_sum(others, single_body))

    pairs = [] if as_displayed else [(s, t) for s in range(ell) for t in range(s + 1, ell)]
    for s, t in pairs:
        others = [r for r in range(ell) if r not in (s, t)]
        sign = -1 if (ell + (t - s) + 1) % 2 else 1

        def pair_body(names, s=s, t=t, sign=sign):
            out = None
            for alpha, J in top_J:
                TJ = _Theta_contracted(h, names + [u_name(alpha, J)])
                if TJ.is_zero():
                    continue
                coeff = ZERO
                for i in range(1, spec.m + 1):
                    coeff = coeff + Xs(s, i) * W(t, alpha, J, i) - Xs(t, i) * W(s, alpha, J, i)
                term = TJ * (p * sign * coeff)
                out = term if out is None else out + term
            return out

        parts.append(weighted_sum(others, pair_body))

    degree = h.n + 1 - ell
    total = DifferentialForm(c, max(degree, 0))
    if degree < 0:
        return total
    for part in parts:
        if part is not None:
            total = total + part
    return total
