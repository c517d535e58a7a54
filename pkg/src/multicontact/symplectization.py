"""The (pre-)multisymplectization of an adapted chart.

The chart ``(x, z, p)`` carries ``Theta = th^1 ^ ... ^ th^n`` (wedge of the
annihilator forms), ``theta_tilde = p Theta``, ``omega_tilde = d theta_tilde``
and the Euler field ``Delta = p d/dp``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .distribution import (
    AdaptedChart,
    SectionOfN,
    characteristic_kernel_at,
    curvature,
    field_from_frame,
    frame_fields,
    annihilator_forms,
    symmetry_residual,
)
from .expr import ZERO, Expr, SamplingPolicy, differentiate, evaluate, probably_equal, sample_points, var
from .forms import (
    Chart,
    DifferentialForm,
    VectorField,
    exterior_derivative,
    forms_probably_equal,
    interior_product,
    lie_derivative,
    wedge,
)
from .linalg import numeric_rank

__all__ = [
    "CrossCheckError",
    "PreconditionError",
    "HomogeneousChart",
    "build_symplectization",
    "is_homogeneous",
    "lift_multicontact",
    "kernel_rank_at",
    "contraction_matrix_at",
    "characteristic_lift_frame",
    "lift_frame_residual_at",
    "kernel_check_points",
    "section_tilde",
    "homogeneous_decompose",
]

P = "p"


class CrossCheckError(AssertionError):
    """Two independent constructions of the same object disagree."""


class PreconditionError(ValueError):
    pass


def lift_form(chart: Chart, alpha: DifferentialForm) -> DifferentialForm:
    """Re-index a form onto a chart containing all of its coordinates."""
    return DifferentialForm.from_names(chart, alpha.to_names()) if alpha.coefficients else DifferentialForm(chart, alpha.degree)


def lift_field(chart: Chart, X: VectorField) -> VectorField:
    return VectorField(chart, X.components)


@dataclass
class HomogeneousChart:
    base: AdaptedChart
    chart: Chart
    Theta: DifferentialForm
    theta_tilde: DifferentialForm
    omega_tilde: DifferentialForm
    euler: VectorField

    p: str = P

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dim(self) -> int:
        return self.chart.dim

    def d(self, name) -> DifferentialForm:
        return self.chart.d(name)

    def Theta_a(self, a: int) -> DifferentialForm:
        """i_{d/dz^a} Theta."""
        return interior_product(self.chart.partial(self.base.z[a]), self.Theta)

    def frame(self) -> list:
        return [lift_field(self.chart, C) for C in frame_fields(self.base)]


def closed_form_omega(h: HomogeneousChart) -> DifferentialForm:
    """(dp + p dC_i^a/dz^a dx^i) ^ Theta - 1/2 p R^a_ij dx^i ^ dx^j ^ Theta_a."""
    base, chart = h.base, h.chart
    p = var(P)
    one_form = chart.d(P)
    for i, xi in enumerate(base.x):
        div = base.divergence_coefficient(i)
        if not div.is_zero():
            one_form = one_form + chart.d(xi) * (p * div)
    out = wedge(one_form, h.Theta)
    R = curvature(base)
    for (a, i, j), r in R.nonzero().items():
        # i < j covers the 1/2 sum over ordered pairs
        term = wedge(wedge(chart.d(base.x[i]), chart.d(base.x[j])), h.Theta_a(a))
        out = out - term * (p * r)
    return out


def build_symplectization(base: AdaptedChart, policy: SamplingPolicy | None = None) -> HomogeneousChart:
    if P in base.coords:
        raise ValueError(f"the base chart already uses the fibre coordinate name {P!r}")
    chart = Chart(base.coords + (P,))
    thetas = [lift_form(chart, th) for th in annihilator_forms(base)]
    Theta = thetas[0]
    for th in thetas[1:]:
        Theta = wedge(Theta, th)
    theta_tilde = Theta * var(P)
    omega_tilde = exterior_derivative(theta_tilde)
    euler = VectorField(chart, {P: var(P)})
    h = HomogeneousChart(base, chart, Theta, theta_tilde, omega_tilde, euler)
    if not forms_probably_equal(omega_tilde, closed_form_omega(h), policy):
        raise CrossCheckError("d(p Theta) disagrees with the closed-form omega_tilde")
    return h


def _structurally_homogeneous(h: HomogeneousChart, mu: DifferentialForm) -> bool:
    ip = h.chart.index(P)
    for idx, c in mu.coefficients.items():
        want = 0 if ip in idx else 1
        if c.degree_in(P) != {want}:
            return False
    return True


def is_homogeneous(h: HomogeneousChart, mu: DifferentialForm, policy: SamplingPolicy | None = None) -> bool:
    """True iff L_Delta mu = mu (randomised, with a structural fast path)."""
    if mu.chart != h.chart:
        raise ValueError("form does not live on the symplectization chart")
    if _structurally_homogeneous(h, mu):
        return True
    return forms_probably_equal(lie_derivative(h.euler, mu), mu, policy)


def lift_multicontact(h: HomogeneousChart, X_a: Sequence, X_i: Sequence,
                      policy: SamplingPolicy | None = None, check: bool = True) -> VectorField:
    """The Hamiltonian lift X^a d_a + X^i C_i - (d_a X^a + d_a C_i^a X^i) Delta."""
    base = h.base
    X_a = [Expr._coerce(v) for v in X_a]
    X_i = [Expr._coerce(v) for v in X_i]
    if check and not all(probably_equal(r, ZERO, policy) for r in symmetry_residual(base, X_a, X_i)):
        raise PreconditionError("the field is not a multicontact symmetry")
    div = ZERO
    for a, za in enumerate(base.z):
        div = div + differentiate(X_a[a], za)
    for i in range(base.rank):
        div = div + base.divergence_coefficient(i) * X_i[i]
    X = field_from_frame(base, X_a, X_i, target=h.chart)
    lifted = X - h.euler * div
    if check:
        if not forms_probably_equal(lie_derivative(lifted, h.theta_tilde), DifferentialForm(h.chart, h.n), policy):
            raise CrossCheckError("lifted field does not preserve theta_tilde")
        if not forms_probably_equal(lie_derivative(lifted, h.omega_tilde), DifferentialForm(h.chart, h.n + 1), policy):
            raise CrossCheckError("lifted field does not preserve omega_tilde")
    return lifted


def contraction_matrix_at(h: HomogeneousChart, pt: Mapping[str, float]) -> np.ndarray:
    """Matrix of eta -> i_eta omega_tilde at a point; rows are n-tuples, columns coordinates."""
    n = h.n
    rows = {t: r for r, t in enumerate(combinations(range(h.dim), n))}
    mat = np.zeros((len(rows), h.dim))
    for idx, c in h.omega_tilde.coefficients.items():
        val = evaluate(c, pt)
        for r, col in enumerate(idx):
            rest = idx[:r] + idx[r + 1:]
            mat[rows[rest], col] += val if r % 2 == 0 else -val
    return mat


def kernel_rank_at(h: HomogeneousChart, pt: Mapping[str, float]) -> int:
    """dim ker omega_tilde at ``pt`` (which must assign ``p != 0``)."""
    if float(pt.get(P, 0.0)) == 0.0:
        raise ValueError("p must be assigned and nonzero")
    return h.dim - numeric_rank(contraction_matrix_at(h, pt))


def characteristic_lift_frame(h: HomogeneousChart, kernel_basis: Sequence[Sequence],
                              policy: SamplingPolicy | None = None, check: bool = True) -> list:
    """Lift characteristic directions Z^i C_i to Z^i (C_i - p d_aC_i^a d/dp)."""
    base = h.base
    R = curvature(base)
    frame = h.frame()
    p = var(P)
    out = []
    for Z in kernel_basis:
        Z = [Expr._coerce(z) for z in Z]
        if len(Z) != base.rank:
            raise ValueError(f"kernel vectors need {base.rank} entries")
        if check:
            for a in range(base.n):
                for i in range(base.rank):
                    acc = ZERO
                    for j in range(base.rank):
                        acc = acc + R(a, i, j) * Z[j]
                    if not probably_equal(acc, ZERO, policy):
                        raise PreconditionError("vector is not in the characteristic kernel")
        field = VectorField(h.chart)
        for i in range(base.rank):
            if Z[i].is_zero():
                continue
            Ci = frame[i] - VectorField(h.chart, {P: p * base.divergence_coefficient(i)})
            field = field + Ci * Z[i]
        if check:
            contracted = interior_product(field, h.omega_tilde)
            if not forms_probably_equal(contracted, DifferentialForm(h.chart, h.n), policy):
                raise CrossCheckError("lifted characteristic field does not contract omega_tilde to 0")
        out.append(field)
    return out


def lift_frame_residual_at(h: HomogeneousChart, pt: Mapping[str, float]) -> float:
    """Max |i_Z omega_tilde| at ``pt`` over lifts of a numeric basis of the characteristic kernel there.

    The kernel basis is computed at the base point, so this works for charts
    whose characteristic directions vary from point to point.
    """
    basis = characteristic_kernel_at(h.base, pt)
    if len(basis) == 0:
        return 0.0
    Zs = [[Fraction(float(z)) for z in row] for row in basis]
    worst = 0.0
    for field in characteristic_lift_frame(h, Zs, check=False):
        contracted = interior_product(field, h.omega_tilde)
        for c in contracted.coefficients.values():
            worst = max(worst, abs(evaluate(c, pt)))
    return worst


def kernel_check_points(h: HomogeneousChart, policy: SamplingPolicy, count: int) -> list:
    """``count`` seeded points on the symplectization chart (p away from 0)."""
    env = sample_points(h.chart.coords, policy.with_(num_samples=count))
    return [{name: float(env[name][s]) for name in h.chart.coords} for s in range(count)]


def section_tilde(h: HomogeneousChart, nu: SectionOfN) -> DifferentialForm:
    """p nu^a Theta_a, an (n-1)-form in the kernel of i_Delta."""
    out = DifferentialForm(h.chart, h.n - 1)
    for a, comp in enumerate(nu.components):
        if not comp.is_zero():
            out = out + h.Theta_a(a) * (var(P) * comp)
    return out


def homogeneous_decompose(h: HomogeneousChart, mu: DifferentialForm,
                          policy: SamplingPolicy | None = None) -> tuple:
    """Split a homogeneous form as (d i_Delta mu, i_Delta d mu)."""
    if not is_homogeneous(h, mu, policy):
        raise PreconditionError("form is not homogeneous")
    if mu.degree == 0:
        exact = DifferentialForm(h.chart, 0)
    else:
        exact = exterior_derivative(interior_product(h.euler, mu))
    return exact, interior_product(h.euler, exterior_derivative(mu))
