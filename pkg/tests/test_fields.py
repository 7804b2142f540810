import numpy as np
import pytest
import sympy as sp

from src.domain.catalog import group_model, lie_algebra
from src.domain.exceptions import ChartError, FormError, SingularFieldError
from src.domain.expressions import coordinate_symbols, parse_expression
from src.domain.fields import (
    Chart,
    GroupValuedField,
    LieValuedForm,
    MatrixField,
    exterior_derivative,
    field_strength,
    maurer_cartan_pullback,
    validate_group_field,
    wedge_bracket,
)
from src.domain.deform import LocalConnection, gauge_transform

from .conftest import L, rotation_strings


def test_chart_validation():
    with pytest.raises(ChartError):
        Chart.box([[1.0, 0.0]], 3)
    with pytest.raises(ChartError):
        Chart.box([[0.0, 1.0]], 1)


def test_sample_points_include_interior_randoms():
    chart = Chart.box([[0.0, 1.0], [2.0, 4.0]], 3, random_points=10, seed=7)
    assert chart.grid_points.shape == (9, 2)
    assert chart.sample_points.shape == (19, 2)
    randoms = chart.random_interior_points
    assert np.all(randoms[:, 0] >= 0.05) and np.all(randoms[:, 0] <= 0.95)
    assert np.all(randoms[:, 1] >= 2.1) and np.all(randoms[:, 1] <= 3.9)
    np.testing.assert_array_equal(randoms, Chart.box([[0.0, 1.0], [2.0, 4.0]], 3, random_points=10, seed=7)
                                  .random_interior_points)


def test_rotation_field_is_in_so2(unit_square):
    h = GroupValuedField.from_strings(unit_square, rotation_strings(2, 1, 2, "x1*x2"), group_model("so(2)"))
    verdict = validate_group_field(h)
    assert verdict.holds


def test_conformal_field_is_in_gl(unit_cube):
    phi = parse_expression("1 + x1^2", unit_cube)
    h = GroupValuedField(MatrixField.scalar_identity(unit_cube, phi, 3), group_model("gl(3)"))
    verdict = validate_group_field(h)
    assert verdict.holds
    assert verdict.residual == 0.0


def test_scaled_row_leaves_so3(unit_cube):
    rows = [["1.01", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    verdict = validate_group_field(GroupValuedField.from_strings(unit_cube, rows, group_model("so(3)")))
    assert not verdict.holds
    assert verdict.residual == pytest.approx(0.0201, abs=1e-6)


def test_singular_field(unit_square):
    h = GroupValuedField.from_strings(unit_square, [["x1", "0"], ["0", "1"]], group_model("gl(2)"))
    assert validate_group_field(h) == (False, float("inf"))
    with pytest.raises(SingularFieldError):
        maurer_cartan_pullback(h)


def test_maurer_cartan_of_constant_is_zero(unit_square):
    h = GroupValuedField.from_strings(unit_square, [["2", "1"], ["1", "1"]], group_model("gl(2)"))
    assert maurer_cartan_pullback(h).max_norm() == 0.0


def test_maurer_cartan_of_conformal_field(unit_cube):
    phi = parse_expression("1 + x1^2", unit_cube)
    h = GroupValuedField(MatrixField.scalar_identity(unit_cube, phi, 3), group_model("gl(3)"))
    mu = maurer_cartan_pullback(h)
    x1 = coordinate_symbols(3)[0]
    expected = LieValuedForm(unit_cube, 1, 3, {(0,): 2 * x1 / (1 + x1**2) * sp.eye(3)})
    assert mu.max_difference(expected) <= 1e-14


def test_maurer_cartan_of_rotation_matches_oracle(unit_square):
    """h = exp(theta L12) gives (d_i theta) L12."""
    h = GroupValuedField.from_strings(unit_square, rotation_strings(2, 1, 2, "x1^2*x2"), group_model("so(2)"))
    mu = maurer_cartan_pullback(h)
    points = unit_square.sample_points
    values = mu.evaluate(points)
    x1, x2 = points[:, 0], points[:, 1]
    np.testing.assert_allclose(values[:, 0], (2 * x1 * x2)[:, None, None] * L(2, 1, 2), atol=1e-12)
    np.testing.assert_allclose(values[:, 1], (x1**2)[:, None, None] * L(2, 1, 2), atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_maurer_cartan_equation(seed):
    """d(h*mu) + (h*mu)^(h*mu) = 0 for random rotation fields."""
    chart = Chart.box([[0.0, 1.0]] * 3, 3, random_points=0)
    rng = np.random.default_rng(seed)
    a, b, c = rng.uniform(-1.0, 1.0, size=3)
    rows = [
        [f"cos({a}*x1)", f"sin({a}*x1)", "0"],
        [f"-sin({a}*x1)", f"cos({a}*x1)", "0"],
        ["0", "0", "1"],
    ]
    h1 = GroupValuedField.from_strings(chart, rows, group_model("so(3)"))
    h2 = GroupValuedField.from_strings(chart, rotation_strings(3, 2, 3, f"{b}*x2 + {c}*x3^2"), group_model("so(3)"))
    mu = maurer_cartan_pullback(h1 @ h2)
    structure = exterior_derivative(mu) + wedge_bracket(mu, mu)
    assert structure.max_norm() <= 1e-8


def test_exterior_derivative_examples(unit_square):
    omega = LieValuedForm.from_strings(unit_square, 1, {2: [["x1"]]})
    d_omega = exterior_derivative(omega)
    assert d_omega.coefficient(0, 1) == sp.ImmutableMatrix([[1]])
    assert d_omega.coefficient(1, 0) == sp.ImmutableMatrix([[-1]])

    squared = exterior_derivative(LieValuedForm.from_strings(unit_square, 1, {2: [["x1^2"]]}))
    x1 = coordinate_symbols(2)[0]
    assert sp.simplify(squared.coefficient(0, 1)[0, 0] - 2 * x1) == 0


def test_d_squared_vanishes(unit_cube):
    f = LieValuedForm.from_strings(unit_cube, 0, {(): [["sin(x1*x2) + x3^3", "x1"], ["0", "exp(x2)"]]})
    assert exterior_derivative(exterior_derivative(f)).max_norm() <= 1e-10


def test_exterior_derivative_of_two_form_is_unsupported(unit_cube):
    with pytest.raises(FormError):
        exterior_derivative(LieValuedForm.zero(unit_cube, 2, 2))


def test_wedge_examples(unit_square):
    A = [["0", "1"], ["0", "0"]]
    B = [["0", "0"], ["1", "0"]]
    alpha = LieValuedForm.from_strings(unit_square, 1, {1: A})
    beta = LieValuedForm.from_strings(unit_square, 1, {2: B})
    wedge = wedge_bracket(alpha, beta)
    assert wedge.coefficient(0, 1) == sp.ImmutableMatrix([[1, 0], [0, 0]])
    same_direction = LieValuedForm.from_strings(unit_square, 1, {1: B})
    assert wedge_bracket(alpha, same_direction).is_zero


def test_wedge_of_abelian_form_with_itself(unit_square):
    alpha = LieValuedForm.from_strings(unit_square, 1, {1: [["0", "x2"], ["-x2", "0"]], 2: [["0", "x1"], ["-x1", "0"]]})
    assert wedge_bracket(alpha, alpha).max_norm() == 0.0


def test_wedge_against_pointwise_products(unit_cube, rng):
    so3 = lie_algebra("so(3)")
    components = []
    for _ in range(2):
        coefficients = rng.normal(size=(3, 3))
        rows = {}
        for i in range(3):
            X = so3.element(coefficients[i])
            rows[i + 1] = [[f"{X[r, c]}*x{i + 1}" for c in range(3)] for r in range(3)]
        components.append(LieValuedForm.from_strings(unit_cube, 1, rows))
    alpha, beta = components
    points = unit_cube.sample_points
    a, b = alpha.evaluate(points), beta.evaluate(points)
    dense = wedge_bracket(alpha, beta).dense(points)
    expected = np.einsum("nipq,njqr->nijpr", a, b) - np.einsum("njpq,niqr->nijpr", a, b)
    np.testing.assert_allclose(dense, expected, atol=1e-10)


def test_wedge_needs_one_forms(unit_square):
    with pytest.raises(FormError):
        wedge_bracket(LieValuedForm.zero(unit_square, 0, 2), LieValuedForm.zero(unit_square, 1, 2))


def test_field_strength_of_abelian_connection(unit_square):
    u1 = lie_algebra("u1_in_so2")
    A = LieValuedForm.from_strings(unit_square, 1, {2: [["0", "x1^2"], ["-x1^2", "0"]]}, u1)
    F = field_strength(A)
    x1 = coordinate_symbols(2)[0]
    assert sp.simplify(F.coefficient(0, 1)[0, 1] - 2 * x1) == 0
    assert F.value_residual() <= 1e-12
    assert field_strength(LieValuedForm.zero(unit_square, 1, 2, u1)).is_zero


def test_field_strength_is_gauge_covariant(unit_square):
    so3 = lie_algebra("so(3)")
    A = LieValuedForm.from_strings(
        unit_square, 1,
        {1: [["0", "x2", "0"], ["-x2", "0", "x1"], ["0", "-x1", "0"]],
         2: [["0", "0", "1"], ["0", "0", "0"], ["-1", "0", "0"]]},
        so3,
    )
    g = GroupValuedField.from_strings(unit_square, rotation_strings(3, 1, 3, "x1 - x2^2"), group_model("so(3)"))
    transformed = gauge_transform(LocalConnection(A), g)
    F, F_prime = field_strength(A), field_strength(transformed.form)
    expected = F.conjugate(g.inverse_matrix, g.matrix)
    assert F_prime.max_difference(expected) <= 1e-8


def test_form_from_strings_checks_indices(unit_square):
    with pytest.raises(FormError):
        LieValuedForm.from_strings(unit_square, 1, {3: [["1"]]})
    with pytest.raises(FormError):
        LieValuedForm.from_strings(unit_square, 2, {1: [["1"]]})


def test_form_constructors_check_the_value_algebra(unit_square):
    so2_in_so3 = lie_algebra("so2_in_so3")
    rotation = [["0", "x2", "0"], ["-x2", "0", "0"], ["0", "0", "0"]]
    assert LieValuedForm.from_strings(unit_square, 1, {1: rotation}, so2_in_so3).value_residual() == 0.0
    tilted = [["0", "x2", "x1"], ["-x2", "0", "0"], ["-x1", "0", "0"]]
    with pytest.raises(FormError, match="so2_in_so3"):
        LieValuedForm.from_strings(unit_square, 1, {1: tilted}, so2_in_so3)
    with pytest.raises(FormError, match="so\\(2\\)"):
        LieValuedForm.constant(unit_square, 1, {(0,): np.eye(2)}, lie_algebra("so(2)"))


def test_two_form_antisymmetry(unit_square):
    F = LieValuedForm.from_strings(unit_square, 2, {(2, 1): [["x1"]]})
    assert F.indices == ((0, 1),)
    assert F.coefficient(0, 1) == sp.ImmutableMatrix([[-coordinate_symbols(2)[0]]])
    assert F.coefficient(1, 1).is_zero_matrix
