import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multicontact.distribution import (
    AdaptedChart,
    SectionOfN,
    annihilator_forms,
    characteristic_matrix_at,
    characteristic_rank_at,
    classify,
    curvature,
    field_from_frame,
    frame_components,
    frame_fields,
    hamiltonian_defect,
    is_symmetry,
    symmetry_residual,
    theta_of,
)
from multicontact.expr import ZERO, SamplingPolicy, differentiate, evaluate, parse_expr, probably_equal, sample_points, var
from multicontact.fixtures import (
    EXPECTED_CHAR_RANK,
    FIXTURES,
    chart_a,
    chart_b,
    chart_c,
    chart_d,
    chart_irregular,
    random_symmetry,
)
from multicontact.forms import (
    exterior_derivative,
    forms_probably_equal,
    interior_product,
    lie_bracket,
    wedge,
)
from multicontact.linalg import null_space, numeric_rank, row_echelon
from oracles import curvature_by_finite_differences


def points(chart, count=20, seed=7):
    env = sample_points(chart.coords, SamplingPolicy(seed=seed, num_samples=count))
    return [{n: float(env[n][s]) for n in chart.coords} for s in range(count)]


# frames and annihilators

def test_frame_of_chart_a():
    C1, C2 = frame_fields(chart_a())
    assert C1.components == {"x1": parse_expr("1"), "z1": var("x2")}
    assert C2.components == {"x2": parse_expr("1")}


def test_frame_of_chart_c_is_coordinate():
    for i, C in enumerate(frame_fields(chart_c())):
        assert C.components == {f"x{i + 1}": parse_expr("1")}


def test_annihilator_of_chart_a():
    (theta,) = annihilator_forms(chart_a())
    assert theta.to_names() == {("x1",): -var("x2"), ("z1",): parse_expr("1")}


def test_annihilator_of_chart_c():
    B = chart_c()
    for a, theta in enumerate(annihilator_forms(B)):
        assert theta.to_names() == {(B.z[a],): parse_expr("1")}


def test_annihilator_dual_to_frame(fixture_name):
    chart = FIXTURES[fixture_name]()
    for C in frame_fields(chart):
        for theta in annihilator_forms(chart):
            assert interior_product(C, theta).is_zero()
    for b, zb in enumerate(chart.z):
        for a, theta in enumerate(annihilator_forms(chart)):
            value = interior_product(chart.chart.partial(zb), theta).coefficients.get((), ZERO)
            assert value == (parse_expr("1") if a == b else ZERO)


# curvature

def test_curvature_chart_a():
    assert curvature(chart_a()).nonzero() == {(0, 0, 1): parse_expr("-1")}


def test_curvature_chart_b():
    assert curvature(chart_b()).nonzero() == {(0, 0, 1): parse_expr("-1"), (1, 0, 2): parse_expr("-1")}


def test_curvature_chart_c_vanishes():
    assert curvature(chart_c()).is_structurally_zero()


def test_curvature_antisymmetric():
    R = curvature(chart_b())
    for a in range(2):
        for i in range(3):
            for j in range(3):
                assert R(a, i, j) == -R(a, j, i)


@pytest.mark.parametrize("make", [chart_a, chart_b, chart_d, chart_irregular])
def test_curvature_matches_finite_differences(make):
    chart = make()
    R = curvature(chart)
    for pt in points(chart):
        fd = curvature_by_finite_differences(chart, pt)
        for key, value in fd.items():
            assert abs(evaluate(R(*key), pt) - value) <= 1e-6


def test_curvature_of_nonpolynomial_chart_matches_finite_differences():
    chart = AdaptedChart(["x1", "x2"], ["z1"], [["sin(x2)*z1"], ["exp(x1)/(1 + z1^2)"]])
    R = curvature(chart)
    for pt in points(chart):
        fd = curvature_by_finite_differences(chart, pt)
        assert abs(evaluate(R(0, 0, 1), pt) - fd[(0, 0, 1)]) <= 1e-6


# characteristic rank and classification

def test_characteristic_rank_examples():
    pt = points(chart_a(), 1)[0]
    assert characteristic_rank_at(chart_a(), pt) == 0
    pt = points(chart_c(), 1)[0]
    assert characteristic_rank_at(chart_c(), pt) == 3
    assert characteristic_rank_at(chart_d(), pt) == 1


@pytest.mark.parametrize("name,expected", [
    ("A", "multicontact(1)"),
    ("B", "multicontact(2)"),
    ("C", "pre_multicontact(2, char_rank=3)"),
    ("D", "pre_multicontact(2, char_rank=1)"),
])
def test_classify_fixtures(name, expected):
    assert str(classify(FIXTURES[name]())) == expected


def test_classify_irregular():
    assert str(classify(chart_irregular())) == "irregular"


def test_characteristic_rank_invariant_under_x_permutation():
    chart = chart_b()
    perm = [2, 0, 1]
    permuted = AdaptedChart([chart.x[k] for k in perm], chart.z, [chart.C[k] for k in perm])
    for pt in points(chart):
        assert characteristic_rank_at(chart, pt) == characteristic_rank_at(permuted, pt)
    assert str(classify(permuted)) == "multicontact(2)"


# symmetry conditions

def test_dz_is_symmetry_on_chart_a():
    assert all(r.is_zero() for r in symmetry_residual(chart_a(), [1], [0, 0]))


def test_frame_field_is_not_symmetry_on_chart_a():
    # only the i = 1 row picks up R^1_12 X^2
    assert symmetry_residual(chart_a(), [0], [0, 1]) == [parse_expr("-1"), ZERO]


def test_constant_vertical_field_on_chart_c():
    assert all(r.is_zero() for r in symmetry_residual(chart_c(), [3, -2], [0, 0, 0]))


def test_theta_of_examples():
    assert theta_of(chart_a(), [1], [0, 0]).components == (parse_expr("1"),)
    assert theta_of(chart_b(), [0, 0], [1, 0, 0]).components == (ZERO, ZERO)
    assert theta_of(chart_b(), [0, var("z1")], [0, 0, 0]).components == (ZERO, var("z1"))


def test_hamiltonian_defect_examples():
    A = chart_a()
    assert all(r.is_zero() for r in hamiltonian_defect(A, theta_of(A, [1], [0, 0]), [0, 0]))
    C = chart_c()
    defect = hamiltonian_defect(C, SectionOfN(C, (var("x1"), ZERO)), [var("x2"), 1, 0])
    assert defect[0] == parse_expr("-1")
    assert all(r.is_zero() for r in hamiltonian_defect(C, SectionOfN(C, (0, 0)), [0, 0, 0]))


def test_section_needs_n_components():
    with pytest.raises(ValueError):
        SectionOfN(chart_b(), (ZERO,))


@given(st.integers(0, 2**32 - 1), st.sampled_from("AB"))
def test_symmetry_theta_is_hamiltonian_with_its_own_witness(seed, name):
    chart = FIXTURES[name]()
    X_a, X_i = random_symmetry(random.Random(seed), name)
    defect = hamiltonian_defect(chart, theta_of(chart, X_a, X_i), X_i)
    assert all(probably_equal(r, ZERO) for r in defect)


# invariants

def test_frame_brackets_are_curvature(fixture_name):
    chart = FIXTURES[fixture_name]()
    frame = frame_fields(chart)
    R = curvature(chart)
    for i in range(chart.rank):
        for j in range(i + 1, chart.rank):
            bracket = lie_bracket(frame[i], frame[j])
            for c in chart.coords:
                expected = ZERO
                if c in chart.z:
                    expected = R(chart.z.index(c), i, j)
                assert probably_equal(bracket[c], expected)


def test_d_theta_display(fixture_name):
    chart = FIXTURES[fixture_name]()
    thetas = annihilator_forms(chart)
    R = curvature(chart)
    for a, theta in enumerate(thetas):
        expected = exterior_derivative(theta) * 0
        for i, xi in enumerate(chart.x):
            for b, zb in enumerate(chart.z):
                coeff = differentiate(chart.C[i][a], zb)
                if not coeff.is_zero():
                    expected = expected + wedge(chart.chart.d(xi), thetas[b]) * coeff
            for j in range(i + 1, chart.rank):
                expected = expected - wedge(chart.chart.d(xi), chart.chart.d(chart.x[j])) * R(a, i, j)
        assert forms_probably_equal(exterior_derivative(theta), expected)


@given(st.integers(0, 2**32 - 1), st.sampled_from("AB"))
def test_symmetries_preserve_the_distribution(seed, name):
    chart = FIXTURES[name]()
    X = field_from_frame(chart, *random_symmetry(random.Random(seed), name))
    for C in frame_fields(chart):
        X_a, _ = frame_components(chart, lie_bracket(C, X))
        assert all(probably_equal(v, ZERO) for v in X_a)


def test_hamiltonian_witness_unique_on_multicontact_fixtures():
    for name in "AB":
        chart = FIXTURES[name]()
        for pt in points(chart, 10):
            mat = characteristic_matrix_at(chart, pt)
            assert numeric_rank(mat) == chart.rank


def test_random_field_is_rarely_symmetry():
    assert not is_symmetry(chart_b(), [var("x1"), 0], [0, 0, 0])


# linear algebra helpers

def test_row_echelon_and_null_space():
    mat = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]])
    reduced, pivots = row_echelon(mat)
    assert pivots == [0, 1]
    basis = null_space(mat)
    assert basis.shape == (1, 3)
    assert np.allclose(mat @ basis[0], 0.0)


def test_rank_of_zero_and_tiny_matrices():
    assert numeric_rank(np.zeros((3, 3))) == 0
    assert numeric_rank(np.array([[1.0, 0.0], [0.0, 1e-13]])) == 1
    assert null_space(np.eye(2)).shape == (0, 2)


@given(st.integers(0, 2**32 - 1))
def test_rank_matches_numpy_on_random_low_rank(seed):
    gen = np.random.default_rng(seed)
    r = int(gen.integers(0, 5))
    mat = gen.normal(size=(6, r)) @ gen.normal(size=(r, 5)) if r else np.zeros((6, 5))
    assert numeric_rank(mat) == np.linalg.matrix_rank(mat)
    basis = null_space(mat)
    assert basis.shape[0] == 5 - r
    if basis.size:
        assert np.max(np.abs(mat @ basis.T)) < 1e-8 * max(1.0, np.max(np.abs(mat)))


def test_expected_ranks_table():
    assert EXPECTED_CHAR_RANK == {"A": 0, "B": 0, "C": 3, "D": 1}
