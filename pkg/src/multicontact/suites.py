"""Verification suites and the run report they feed.

Each suite returns a list of :class:`Check` records.  A check passes iff its
max residual is at most the tolerance it was evaluated against.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import characteristic_rank_at, find_symmetries
from .expr import ZERO, SamplingPolicy
from .fixtures import random_homogeneous_form, random_point_field
from .forms import (
    DifferentialForm,
    interior_product,
    lie_bracket,
    lie_derivative,
    max_residual,
)
from .jet import (
    JetChart,
    closed_form_jet_bracket,
    jet_omega_tilde,
    prolong,
)
from .linfty import (
    GradedElement,
    LinftyContext,
    element_from_symmetry,
    element_of_positive_degree,
    induced_bracket_check,
    jacobiator_residual,
    lambda_ell,
)
from .symplectization import (
    HomogeneousChart,
    build_symplectization,
    homogeneous_decompose,
    kernel_rank_at,
    lift_frame_residual_at,
    kernel_check_points,
)

__all__ = [
    "Check",
    "RunReport",
    "make_check",
    "kernel_rank_suite",
    "homogeneity_suite",
    "homotopy_suite",
    "symmetry_basis",
    "random_degree0_element",
    "random_element",
    "linfty_suite",
    "jet_crosscheck_suite",
]


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass" | "fail"
    max_residual: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "max_residual": self.max_residual, "samples": self.samples}


def make_check(name: str, residual: float, samples: int, tol: float) -> Check:
    return Check(name, "pass" if residual <= tol else "fail", float(residual), samples)


@dataclass
class RunReport:
    command: str
    inputs: dict
    seed: int
    checks: list = field(default_factory=list)
    result: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    elapsed_ms: int | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, include_timing: bool = False) -> str:
        doc = {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "result": self.result,
            "checks": [c.to_json() for c in self.checks],
            "notes": list(self.notes),
            "passed": self.passed,
        }
        if include_timing:
            doc["elapsed_ms"] = self.elapsed_ms
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"command: {self.command}"]
        for key, value in self.result.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            lines.append(f"{key}: {value}")
        for note in self.notes:
            lines.append(f"note: {note}")
        for c in self.checks:
            lines.append(f"[{c.status.upper()}] {c.name}  max_residual={c.max_residual:.3e}  samples={c.samples}")
        if self.checks:
            failed = sum(not c.passed for c in self.checks)
            lines.append(f"{len(self.checks) - failed}/{len(self.checks)} checks passed")
        if self.elapsed_ms is not None:
            lines.append(f"elapsed: {self.elapsed_ms} ms")
        return "\n".join(lines)


def kernel_rank_suite(h: HomogeneousChart, policy: SamplingPolicy, points: int | None = None) -> list:
    """Kernel rank of omega_tilde vs characteristic rank, and the lifted kernel frame."""
    points = points or policy.num_samples
    pts = kernel_check_points(h, policy, points)
    rank_gap = max(abs(kernel_rank_at(h, pt) - characteristic_rank_at(h.base, pt)) for pt in pts)
    frame = max(lift_frame_residual_at(h, pt) for pt in pts)
    return [
        make_check("kernel rank of omega_tilde equals characteristic rank", rank_gap, points, 0.0),
        make_check("lifted characteristic frame contracts omega_tilde to zero", frame, points, policy.abs_tol),
    ]


def homogeneity_suite(h: HomogeneousChart, policy: SamplingPolicy) -> list:
    tol, n = policy.abs_tol, policy.num_samples
    zero = DifferentialForm(h.chart, h.n - 1)
    cases = [
        ("i_Delta theta_tilde = 0", interior_product(h.euler, h.theta_tilde) - zero),
        ("L_Delta theta_tilde = theta_tilde", lie_derivative(h.euler, h.theta_tilde) - h.theta_tilde),
        ("i_Delta omega_tilde = theta_tilde", interior_product(h.euler, h.omega_tilde) - h.theta_tilde),
        ("L_Delta omega_tilde = omega_tilde", lie_derivative(h.euler, h.omega_tilde) - h.omega_tilde),
    ]
    return [make_check(name, max_residual(res, policy), n, tol) for name, res in cases]


def homotopy_suite(h: HomogeneousChart, policy: SamplingPolicy, per_degree: int = 5) -> list:
    """mu = d i_Delta mu + i_Delta d mu on random homogeneous forms of each degree 0..n."""
    rng = random.Random(policy.seed)
    checks = []
    for degree in range(h.n + 1):
        worst = 0.0
        for _ in range(per_degree):
            mu = random_homogeneous_form(rng, h, degree)
            exact, rest = homogeneous_decompose(h, mu, policy)
            worst = max(worst, max_residual(mu - exact - rest, policy))
        checks.append(make_check(f"contracting homotopy on {per_degree} random degree-{degree} forms",
                                 worst, policy.num_samples, policy.abs_tol))
    return checks


def symmetry_basis(h: HomogeneousChart, policy: SamplingPolicy) -> list:
    return find_symmetries(h.base, policy)


def random_degree0_element(ctx: LinftyContext, basis: list, rng: random.Random) -> GradedElement:
    """Element built from a random integer combination of symmetry fields."""
    n, r = ctx.h.base.n, ctx.h.base.rank
    X_a, X_i = [ZERO] * n, [ZERO] * r
    for a_part, i_part in basis:
        w = Fraction(rng.randint(-3, 3))
        X_a = [u + v * w for u, v in zip(X_a, a_part)]
        X_i = [u + v * w for u, v in zip(X_i, i_part)]
    return element_from_symmetry(ctx, X_a, X_i, check=False)


def random_element(ctx: LinftyContext, degree: int, basis: list, rng: random.Random) -> GradedElement:
    if degree == 0:
        return random_degree0_element(ctx, basis, rng)
    form = random_homogeneous_form(rng, ctx.h, ctx.n - 1 - degree)
    return element_of_positive_degree(ctx, degree, form, check=False)


def linfty_suite(ctx: LinftyContext, policy: SamplingPolicy, tuples: int = 5, max_ell: int | None = None,
                 basis: list | None = None) -> list:
    """Generalized Jacobi identities, induced bracket and lambda_2 closure on random elements.

    For each arity the first tuple is all degree 0 and the rest mix degrees.
    """
    rng = random.Random(policy.seed)
    basis = symmetry_basis(ctx.h, policy) if basis is None else basis
    max_ell = max_ell or ctx.n + 2
    n, samples, tol = ctx.n, policy.num_samples, policy.abs_tol
    checks = []
    for ell in range(1, max_ell + 1):
        worst = 0.0
        for t in range(tuples):
            degrees = [0] * ell if t == 0 else [rng.randint(0, n - 1) for _ in range(ell)]
            elements = [random_element(ctx, d, basis, rng) for d in degrees]
            worst = max(worst, max_residual(jacobiator_residual(ctx, elements), policy))
        checks.append(make_check(f"generalized Jacobi identity, arity {ell}", worst, samples, tol))
    induced, closure, antisym = 0.0, 0.0, 0.0
    for _ in range(tuples):
        e1 = random_degree0_element(ctx, basis, rng)
        e2 = random_degree0_element(ctx, basis, rng)
        induced = max(induced, max_residual(induced_bracket_check(ctx, e1, e2), policy))
        lam = lambda_ell(ctx, [e1, e2])
        lam_swapped = lambda_ell(ctx, [e2, e1])
        bracket = lie_bracket(e1.field(ctx), e2.field(ctx))
        if lam.ham_field is not None:
            closure = max(closure, max_residual(lam.ham_field - bracket, policy))
        if lam.form is not None and lam_swapped.form is not None:
            antisym = max(antisym, max_residual(lam.form + lam_swapped.form, policy))
    checks.append(make_check("d lambda_2 = -i_[X1,X2] omega_tilde", induced, samples, tol))
    checks.append(make_check("lambda_2 Hamiltonian field is the Lie bracket", closure, samples, tol))
    checks.append(make_check("lambda_2 is antisymmetric on degree 0", antisym, samples, tol))
    return checks


def jet_crosscheck_suite(chart: JetChart, policy: SamplingPolicy, ells=(2, 3), tuples: int = 5) -> list:
    """Jet omega_tilde and the closed-form brackets against the generic construction."""
    spec = chart.spec
    samples, tol = policy.num_samples, policy.abs_tol
    h = build_symplectization(chart.adapted, policy)
    omega = jet_omega_tilde(chart, h, policy)
    checks = [make_check("jet omega_tilde equals d(p Theta)", max_residual(omega - h.omega_tilde, policy),
                         samples, tol)]
    ctx = LinftyContext(h, policy)
    rng = random.Random(policy.seed)
    for ell in ells:
        if ell > h.n + 1:
            continue
        worst = 0.0
        for _ in range(tuples):
            prs = [prolong(chart, *random_point_field(rng, spec.m, spec.n)) for _ in range(ell)]
            elements = [element_from_symmetry(ctx, pr.X_a, pr.X_i, check=False) for pr in prs]
            generic = lambda_ell(ctx, elements).form
            closed = closed_form_jet_bracket(chart, h, prs)
            worst = max(worst, max_residual(closed - generic, policy))
        checks.append(make_check(f"closed-form bracket equals lambda_{ell}", worst, samples, tol))
    return checks

