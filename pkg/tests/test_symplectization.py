import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from multicontact.distribution import (
    AdaptedChart,
    characteristic_kernel_at,
    characteristic_rank_at,
    field_from_frame,
    frame_components,
    frame_fields,
    theta_of,
)
from multicontact.expr import ZERO, evaluate, parse_expr, var
from multicontact.fixtures import (
    EXPECTED_CHAR_RANK,
    FIXTURES,
    chart_a,
    chart_b,
    chart_c,
    chart_d,
    random_homogeneous_form,
    random_polynomial,
    random_symmetry,
)
from multicontact.forms import (
    DifferentialForm,
    VectorField,
    exterior_derivative,
    forms_probably_equal,
    interior_product,
    lie_bracket,
    lie_derivative,
    max_residual,
    wedge,
)
from multicontact.symplectization import (
    PreconditionError,
    build_symplectization,
    characteristic_lift_frame,
    closed_form_omega,
    homogeneous_decompose,
    is_homogeneous,
    kernel_rank_at,
    lift_form,
    lift_frame_residual_at,
    lift_multicontact,
    section_tilde,
    kernel_check_points,
)
from multicontact.suites import homogeneity_suite

seeds = st.integers(0, 2**32 - 1)


# construction

def test_omega_tilde_of_integrable_chart():
    h = build_symplectization(chart_c())
    assert forms_probably_equal(h.omega_tilde, wedge(wedge(h.d("p"), h.d("z1")), h.d("z2")))


def test_omega_tilde_of_chart_a():
    h = build_symplectization(chart_a())
    theta = h.d("z1") - h.d("x1") * var("x2")
    expected = wedge(h.d("p"), theta) + wedge(h.d("x1"), h.d("x2")) * var("p")
    assert forms_probably_equal(h.omega_tilde, expected)


def test_omega_tilde_of_chart_c_exactly():
    h = build_symplectization(chart_c())
    assert h.omega_tilde.to_names() == {("z1", "z2", "p"): parse_expr("1")}


def test_omega_tilde_matches_closed_form_and_is_closed(fixture_name):
    h = build_symplectization(FIXTURES[fixture_name]())
    assert forms_probably_equal(h.omega_tilde, closed_form_omega(h))
    assert exterior_derivative(h.omega_tilde).is_zero()


def test_p_name_must_be_free():
    with pytest.raises(ValueError):
        build_symplectization(AdaptedChart(["x1", "p"], ["z1"], [["p"], ["0"]]))


def test_homogeneity_identities(fixture_name, policy):
    h = build_symplectization(FIXTURES[fixture_name]())
    assert all(c.passed for c in homogeneity_suite(h, policy))


# homogeneity

def test_is_homogeneous_examples():
    h = build_symplectization(chart_a())
    assert is_homogeneous(h, h.theta_tilde)
    assert is_homogeneous(h, h.omega_tilde)
    assert not is_homogeneous(h, h.d("x1"))
    assert is_homogeneous(h, h.d("x1") * var("p"))


def test_is_homogeneous_without_structural_shortcut():
    h = build_symplectization(chart_a())
    # p^2/p is homogeneous but not written in the normal form
    mu = h.d("x1") * (var("p") ** 2 * parse_expr("1/(p + 0*x1)"))
    assert is_homogeneous(h, mu)
    assert not is_homogeneous(h, h.d("x1") * var("p") ** 2)


# lifts

def test_lift_of_dz_on_chart_a():
    h = build_symplectization(chart_a())
    X = lift_multicontact(h, [1], [0, 0])
    assert X.components == {"z1": parse_expr("1")}


def test_lift_of_zero():
    h = build_symplectization(chart_b())
    assert lift_multicontact(h, [0, 0], [0, 0, 0]).is_zero()


def test_lift_of_dz1_on_chart_b():
    h = build_symplectization(chart_b())
    X = lift_multicontact(h, [1, 0], [0, 0, 0])
    assert X.components == {"z1": parse_expr("1")}
    assert lie_derivative(X, h.omega_tilde).is_zero()


def test_lift_rejects_non_symmetry():
    h = build_symplectization(chart_a())
    with pytest.raises(PreconditionError):
        lift_multicontact(h, [0], [0, 1])


def test_lift_has_divergence_term():
    h = build_symplectization(chart_b())
    X = lift_multicontact(h, [var("z1"), 0], [0, var("x2"), 0])
    assert X["p"] == -var("p")


@given(seeds, st.sampled_from("AB"))
def test_lift_preserves_theta_tilde_and_contracts_to_section(seed, name):
    h = build_symplectization(FIXTURES[name]())
    X_a, X_i = random_symmetry(random.Random(seed), name)
    X = lift_multicontact(h, X_a, X_i)
    assert max_residual(lie_derivative(X, h.theta_tilde)) <= 1e-8
    nu = section_tilde(h, theta_of(h.base, X_a, X_i))
    assert forms_probably_equal(interior_product(X, h.theta_tilde), nu)
    assert forms_probably_equal(interior_product(X, h.omega_tilde), -exterior_derivative(nu))


@given(seeds, st.sampled_from("AB"))
def test_lift_is_natural_for_brackets(seed, name):
    rng = random.Random(seed)
    h = build_symplectization(FIXTURES[name]())
    base = h.base
    (Xa, Xi), (Ya, Yi) = random_symmetry(rng, name), random_symmetry(rng, name)
    X, Y = field_from_frame(base, Xa, Xi), field_from_frame(base, Ya, Yi)
    Za, Zi = frame_components(base, lie_bracket(X, Y))
    lhs = lift_multicontact(h, Za, Zi)
    rhs = lie_bracket(lift_multicontact(h, Xa, Xi), lift_multicontact(h, Ya, Yi))
    assert max_residual(lhs - rhs) <= 1e-8


# kernel of omega_tilde

@pytest.mark.parametrize("name,expected", [("B", 0), ("D", 1), ("C", 3), ("A", 0)])
def test_kernel_rank_examples(name, expected, policy):
    h = build_symplectization(FIXTURES[name]())
    pt = kernel_check_points(h, policy, 1)[0]
    assert kernel_rank_at(h, pt) == expected


def test_kernel_rank_needs_nonzero_p():
    h = build_symplectization(chart_a())
    with pytest.raises(ValueError):
        kernel_rank_at(h, {"x1": 0.0, "x2": 0.0, "z1": 0.0, "p": 0.0})


def test_kernel_rank_equals_characteristic_rank_at_many_points(fixture_name, policy):
    h = build_symplectization(FIXTURES[fixture_name]())
    for pt in kernel_check_points(h, policy, 100):
        assert kernel_rank_at(h, pt) == characteristic_rank_at(h.base, pt) == EXPECTED_CHAR_RANK[fixture_name]
        assert lift_frame_residual_at(h, pt) <= 1e-8


def test_lift_frame_on_chart_d():
    h = build_symplectization(chart_d())
    (Z,) = characteristic_lift_frame(h, [[0, 0, 1]])
    assert Z.components == {"x3": parse_expr("1")}
    assert interior_product(Z, h.omega_tilde).is_zero()


def test_lift_frame_on_chart_c():
    h = build_symplectization(chart_c())
    (Z,) = characteristic_lift_frame(h, [[1, 0, 0]])
    assert Z.components == {"x1": parse_expr("1")}


def test_lift_frame_rejects_non_characteristic_vector():
    h = build_symplectization(chart_d())
    with pytest.raises(PreconditionError):
        characteristic_lift_frame(h, [[1, 0, 0]])


def test_chart_b_has_no_characteristic_directions(policy):
    h = build_symplectization(chart_b())
    assert characteristic_lift_frame(h, []) == []
    pt = kernel_check_points(h, policy, 1)[0]
    assert characteristic_kernel_at(h.base, pt).shape[0] == 0


def test_lift_frame_with_divergence_term():
    # C_1^1 = z1 gives d_a C_1^a = 1, so the lifted generator gets a p-component
    chart = AdaptedChart(["x1", "x2", "x3"], ["z1", "z2"], [["z1", "0"], ["0", "0"], ["0", "0"]])
    h = build_symplectization(chart)
    frame = characteristic_lift_frame(h, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert frame[0]["p"] == -var("p")
    for Z in frame:
        assert interior_product(Z, h.omega_tilde).is_zero()


# sections and the homotopy

def test_section_tilde_examples():
    hA, hB = build_symplectization(chart_a()), build_symplectization(chart_b())
    assert section_tilde(hA, theta_of(hA.base, [0], [0, 0])).is_zero()
    assert section_tilde(hA, theta_of(hA.base, [1], [0, 0])).to_names() == {(): var("p")}
    mu = section_tilde(hB, theta_of(hB.base, [1, 0], [0, 0, 0]))
    theta2 = hB.d("z2") - hB.d("x1") * var("x3")
    assert forms_probably_equal(mu, theta2 * var("p"))


@given(seeds, st.sampled_from("AB"))
def test_section_tilde_is_homogeneous_and_in_kernel_of_euler(seed, name):
    rng = random.Random(seed)
    h = build_symplectization(FIXTURES[name]())
    nu = theta_of(h.base, [random_polynomial(rng, h.base.coords) for _ in range(h.n)], [0] * h.base.rank)
    mu = section_tilde(h, nu)
    assert is_homogeneous(h, mu)
    if mu.degree > 0:
        assert interior_product(h.euler, mu).is_zero()


def test_decompose_theta_tilde():
    h = build_symplectization(chart_b())
    exact, rest = homogeneous_decompose(h, h.theta_tilde)
    assert exact.is_zero()
    assert forms_probably_equal(rest, h.theta_tilde)


@given(seeds)
def test_decompose_exact_form(seed):
    h = build_symplectization(chart_b())
    f = random_polynomial(random.Random(seed), h.base.coords, 3, 4)
    mu = exterior_derivative(h.chart.function(f * var("p")))
    exact, rest = homogeneous_decompose(h, mu)
    assert forms_probably_equal(exact, mu)
    assert max_residual(rest) == 0.0


def test_decompose_kernel_member():
    h = build_symplectization(chart_b())
    mu = section_tilde(h, theta_of(h.base, [var("x1"), var("z2")], [0, 0, 0]))
    exact, rest = homogeneous_decompose(h, mu)
    assert exact.is_zero()
    assert forms_probably_equal(rest, mu)


def test_decompose_rejects_non_homogeneous():
    h = build_symplectization(chart_b())
    with pytest.raises(PreconditionError):
        homogeneous_decompose(h, h.d("x1"))


@given(seeds, st.integers(0, 2))
def test_contracting_homotopy(seed, degree):
    h = build_symplectization(chart_b())
    mu = random_homogeneous_form(random.Random(seed), h, degree)
    exact, rest = homogeneous_decompose(h, mu)
    assert max_residual(mu - exact - rest) <= 1e-8


# unit section A = Theta: ker i_zeta dA contains C exactly for characteristic zeta

def _contract_frame(h, pt, zeta):
    dTheta = exterior_derivative(h.Theta)
    frame = frame_fields(h.base)
    Z = VectorField(h.base.chart)
    for i, z in enumerate(zeta):
        Z = Z + frame[i] * Fraction(z)
    # work on the base chart: Theta has no p
    base_dTheta = lift_form(h.base.chart, dTheta)
    inner = interior_product(Z, base_dTheta)
    worst = 0.0
    for C in frame:
        for c in interior_product(C, inner).coefficients.values():
            worst = max(worst, abs(evaluate(c, pt)))
    return worst


@pytest.mark.parametrize("name", ["B", "D"])
def test_characteristic_vectors_are_exactly_the_dA_kernel(name, policy):
    h = build_symplectization(FIXTURES[name]())
    rng = random.Random(11)
    for pt in kernel_check_points(h, policy, 10):
        for zeta in characteristic_kernel_at(h.base, pt):
            assert _contract_frame(h, pt, zeta) <= 1e-8
        generic = [rng.uniform(-1, 1) for _ in range(h.base.rank)]
        assert _contract_frame(h, pt, generic) > 1e-6


def test_zero_form_section_has_degree_zero():
    h = build_symplectization(chart_a())
    assert section_tilde(h, theta_of(h.base, [ZERO], [0, 0])).degree == 0
    assert DifferentialForm(h.chart, 0).is_zero()
