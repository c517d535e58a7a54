"""The L-infinity algebra of a multicontact structure.

Degree ``i`` elements (homological grading, ``0 <= i <= n-1``) are homogeneous
forms of form-degree ``n-1-i`` on the symplectization.  Degree-0 elements
carry a chosen projectable Hamiltonian vector field ``X`` with
``i_X omega_tilde = -d mu``.  Brackets:

* ``lambda_1`` is the de Rham differential (zero on degree 0),
* ``lambda_l(mu_1..mu_l) = -(-1)^l i_{X_1} ... i_{X_l} omega_tilde`` when all
  arguments have degree 0, and zero otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .distribution import curvature, theta_of
from .expr import SamplingPolicy, evaluate_at_samples
from .forms import (
    DifferentialForm,
    VectorField,
    exterior_derivative,
    forms_probably_equal,
    interior_product,
    lie_bracket,
)
from .symplectization import (
    HomogeneousChart,
    PreconditionError,
    is_homogeneous,
    lift_multicontact,
    section_tilde,
)

__all__ = [
    "HypothesisError",
    "LinftyContext",
    "GradedElement",
    "element_from_symmetry",
    "element_of_positive_degree",
    "lambda1",
    "lambda_ell",
    "bracket",
    "koszul_sign",
    "unshuffles",
    "jacobiator_residual",
    "induced_bracket_check",
]


class HypothesisError(ValueError):
    """The curvature vanishes identically, so the homogeneous brackets are not defined."""


@dataclass
class LinftyContext:
    h: HomogeneousChart
    policy: SamplingPolicy

    def __init__(self, h: HomogeneousChart, policy: SamplingPolicy | None = None):
        self.h = h
        self.policy = policy or SamplingPolicy()
        R = curvature(h.base).nonzero()
        if not R:
            raise HypothesisError("curvature R vanishes identically; brackets need R != 0")
        values, _ = evaluate_at_samples(list(R.values()), self.policy, extra_names=h.base.coords)
        if not np.any(np.abs(values) > self.policy.abs_tol):
            raise HypothesisError("curvature R vanishes at every sample point; brackets need R != 0")

    @property
    def n(self) -> int:
        return self.h.n


@dataclass
class GradedElement:
    """An element of degree ``degree``; ``form is None`` marks the zero element."""

    degree: int
    form: DifferentialForm | None
    ham_field: VectorField | None = None

    @property
    def is_zero(self) -> bool:
        return self.form is None or self.form.is_zero()

    @classmethod
    def zero(cls, degree: int) -> "GradedElement":
        return cls(degree, None, None)

    def field(self, ctx: LinftyContext) -> VectorField:
        return self.ham_field if self.ham_field is not None else VectorField(ctx.h.chart)

    def __neg__(self):
        if self.form is None:
            return self
        ham = -self.ham_field if self.ham_field is not None else None
        return GradedElement(self.degree, -self.form, ham)


def _in_range(ctx: LinftyContext, degree: int) -> bool:
    return 0 <= degree <= ctx.n - 1


def element_from_symmetry(ctx: LinftyContext, X_a: Sequence, X_i: Sequence,
                          check: bool = True) -> GradedElement:
    """Degree-0 element (p nu^a Theta_a, X_tilde) from a multicontact field."""
    X_tilde = lift_multicontact(ctx.h, X_a, X_i, ctx.policy, check=check)
    mu = section_tilde(ctx.h, theta_of(ctx.h.base, X_a, X_i))
    if check:
        lhs = interior_product(X_tilde, ctx.h.omega_tilde)
        if not forms_probably_equal(lhs, -exterior_derivative(mu), ctx.policy):
            raise PreconditionError("lifted field is not Hamiltonian for the lifted section")
    return GradedElement(0, mu, X_tilde)


def element_of_positive_degree(ctx: LinftyContext, degree: int, mu: DifferentialForm,
                               check: bool = True) -> GradedElement:
    if not 0 < degree <= ctx.n - 1:
        raise PreconditionError(f"degree must lie in 1..{ctx.n - 1}")
    if mu.degree != ctx.n - 1 - degree:
        raise PreconditionError(f"degree-{degree} elements are {ctx.n - 1 - degree}-forms, got a {mu.degree}-form")
    if check and not is_homogeneous(ctx.h, mu, ctx.policy):
        raise PreconditionError("form is not homogeneous")
    return GradedElement(degree, mu)


def lambda1(ctx: LinftyContext, e: GradedElement) -> GradedElement:
    if e.degree == 0 or e.form is None:
        return GradedElement.zero(e.degree - 1)
    # d(d mu) = 0, so the zero field is Hamiltonian for an exact image
    ham = VectorField(ctx.h.chart) if e.degree == 1 else None
    return GradedElement(e.degree - 1, exterior_derivative(e.form), ham)


def lambda_ell(ctx: LinftyContext, elements: Sequence[GradedElement]) -> GradedElement:
    ell = len(elements)
    if ell < 2:
        raise ValueError("lambda_ell needs at least two arguments")
    degree = sum(e.degree for e in elements) + ell - 2
    if any(e.degree > 0 for e in elements) or any(e.form is None for e in elements):
        return GradedElement.zero(degree)
    if not _in_range(ctx, degree):
        return GradedElement.zero(degree)
    form = ctx.h.omega_tilde
    for e in reversed(elements):
        form = interior_product(e.field(ctx), form)
    form = form * (1 if ell % 2 else -1)
    ham = None
    if ell == 2:
        ham = lie_bracket(elements[0].field(ctx), elements[1].field(ctx))
    return GradedElement(degree, form, ham)


def bracket(ctx: LinftyContext, elements: Sequence[GradedElement]) -> GradedElement:
    return lambda1(ctx, elements[0]) if len(elements) == 1 else lambda_ell(ctx, elements)


def koszul_sign(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign chi with v_sigma(1) ^ ... ^ v_sigma(l) = chi v_1 ^ ... ^ v_l.

    ``sigma`` is 0-based.  Each adjacent swap of ``v, w`` contributes
    ``-(-1)^(|v||w|)``.
    """
    if len(sigma) != len(degrees):
        raise ValueError("permutation and degree list differ in length")
    seq = list(sigma)
    sign = 1
    # bubble sort back to the identity
    for end in range(len(seq) - 1, 0, -1):
        for k in range(end):
            if seq[k] > seq[k + 1]:
                if (degrees[seq[k]] * degrees[seq[k + 1]]) % 2 == 0:
                    sign = -sign
                seq[k], seq[k + 1] = seq[k + 1], seq[k]
    return sign


def unshuffles(i: int, j: int) -> list:
    """All (i, j)-unshuffles of range(i+j) as 0-based tuples."""
    if i < 0 or j < 0:
        raise ValueError("i and j must be non-negative")
    n = i + j
    out = []
    for first in combinations(range(n), i):
        rest = tuple(k for k in range(n) if k not in first)
        out.append(first + rest)
    return out


def _residual_form_degree(ctx: LinftyContext, elements: Sequence[GradedElement]) -> int:
    out_degree = sum(e.degree for e in elements) + len(elements) - 3
    return ctx.n - 1 - out_degree


def jacobiator_residual(ctx: LinftyContext, elements: Sequence[GradedElement]) -> DifferentialForm:
    """Left-hand side of the generalized Jacobi identity on ``elements``.

    sum_{i+j=l} (-1)^(ij) sum_{sigma in Sh(i,j)} chi(sigma, v)
        lambda_{j+1}(lambda_i(v_sigma(1..i)), v_sigma(i+1..l))
    """
    ell = len(elements)
    if ell < 1:
        raise ValueError("need at least one element")
    degrees = [e.degree for e in elements]
    form_degree = max(_residual_form_degree(ctx, elements), 0)
    total = DifferentialForm(ctx.h.chart, form_degree)
    for i in range(1, ell + 1):
        j = ell - i
        outer = -1 if (i * j) % 2 else 1
        for sigma in unshuffles(i, j):
            chi = koszul_sign(sigma, degrees)
            inner = bracket(ctx, [elements[k] for k in sigma[:i]])
            if inner.form is None:
                continue
            result = bracket(ctx, [inner] + [elements[k] for k in sigma[i:]])
            if result.form is None or result.form.is_zero():
                continue
            total = total + result.form * (outer * chi)
    return total


def induced_bracket_check(ctx: LinftyContext, e1: GradedElement, e2: GradedElement) -> DifferentialForm:
    """d lambda_2(e1, e2) + i_[X1, X2] omega_tilde (zero when the bracket is induced)."""
    lam = lambda_ell(ctx, [e1, e2])
    Xb = lie_bracket(e1.field(ctx), e2.field(ctx))
    out = interior_product(Xb, ctx.h.omega_tilde)
    if lam.form is not None:
        out = out + exterior_derivative(lam.form)
    return out
