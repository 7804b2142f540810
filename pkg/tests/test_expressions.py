import numpy as np
import pytest
import sympy as sp

from src.domain.exceptions import ChartError, ExpressionSyntaxError, UnknownIdentifierError
from src.domain.expressions import (
    coordinate_symbols,
    differentiate,
    finite_difference,
    parse_expression,
    print_expression,
    tokenize,
)
from src.domain.fields import Chart


def test_product_tree():
    e = parse_expression("x1^2 * sin(x2)", 2)
    x1, x2 = coordinate_symbols(2)
    assert isinstance(e.expr, sp.Mul)
    assert sp.simplify(e.expr - x1**2 * sp.sin(x2)) == 0


def test_unterminated_call_reports_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("log(", 1)
    assert info.value.offset == 4
    assert "offset 4" in str(info.value)


def test_bad_character_reports_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("x1 $ 2", 1)
    assert info.value.offset == 3


def test_unknown_coordinate():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expression("x5", 3)
    assert info.value.identifier == "x5"


def test_unknown_function_name():
    with pytest.raises(UnknownIdentifierError):
        parse_expression("tan(x1)", 1)


def test_exponent_must_be_integer():
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("x1^x2", 2)


def test_tokenize_skips_whitespace():
    kinds = [token.kind for token in tokenize(" x1 +  2.5e-1 ")]
    assert kinds == ["name", "op", "number", "end"]


def test_operator_precedence():
    e = parse_expression("1 + 2 * x1^2 / 4 - -x1", 1)
    assert e.at([2.0]) == pytest.approx(1 + 2 * 4 / 4 + 2)


@pytest.mark.parametrize(
    "text, i, expected",
    [("x1^2", 1, "2*x1"), ("x1", 2, "0"), ("log(1 + x1^2)", 1, "2*x1/(x1^2 + 1)")],
)
def test_differentiate(text, i, expected):
    derivative = differentiate(parse_expression(text, 2), i)
    assert sp.simplify(derivative.expr - parse_expression(expected, 2).expr) == 0


def test_differentiate_rejects_bad_index():
    with pytest.raises(ChartError):
        differentiate(parse_expression("x1", 2), 3)


def test_finite_difference_examples():
    assert finite_difference(parse_expression("x1^2", 1), 1, [3.0]) == pytest.approx(6.0, abs=1e-6)
    assert finite_difference(parse_expression("sin(x1)", 1), 1, [0.0]) == pytest.approx(1.0, abs=1e-8)


def test_finite_difference_outside_chart():
    chart = Chart.box([[0.0, 1.0]], 3)
    with pytest.raises(ChartError):
        finite_difference(parse_expression("x1", 1), 1, [2.0], chart)


def test_log_phi_derivative_matches_oracle():
    chart = Chart.box([[0.0, 1.0], [0.0, 1.0]], 5)
    e = parse_expression("log(1 + x1^2)", chart)
    exact = differentiate(e, 1)
    for x in chart.grid_points[:20]:
        expected = exact.at(x)
        assert finite_difference(e, 1, x) == pytest.approx(expected, rel=1e-6, abs=1e-9)


def test_random_polynomials_agree_with_oracle(rng):
    chart = Chart.box([[0.5, 1.5]] * 3, 3)
    for _ in range(10):
        terms = []
        for _ in range(4):
            c = rng.integers(1, 4)
            p = rng.integers(0, 3, size=3)
            terms.append(f"({c})*x1^{p[0]}*x2^{p[1]}*x3^{p[2]}")
        e = parse_expression(" + ".join(terms), chart)
        for i in (1, 2, 3):
            exact = differentiate(e, i)
            for x in chart.interior_grid_points:
                assert finite_difference(e, i, x) == pytest.approx(exact.at(x), rel=1e-6, abs=1e-6)


@pytest.mark.parametrize(
    "text",
    ["x1^2 * sin(x2)", "sqrt(1 + x1^2)", "1/sqrt(x1 + 2)", "exp(-x2)/(1 + x1^2)^2",
     "log(2 + cos(x1*x2)) - 0.25*x1", "x1^-2 + 3", "(x1 + 1)^3"],
)
def test_printer_round_trip(text):
    chart = Chart.box([[0.5, 1.0], [0.5, 1.0]], 3)
    e = parse_expression(text, chart)
    again = parse_expression(print_expression(e.expr), chart)
    np.testing.assert_allclose(again.evaluate(chart.grid_points), e.evaluate(chart.grid_points), rtol=1e-14)


def test_constant_expression_evaluates_on_every_point():
    chart = Chart.box([[0.0, 1.0]], 4)
    e = parse_expression("2", chart)
    assert e.is_constant
    np.testing.assert_array_equal(e.evaluate(chart.grid_points), np.full(4, 2.0))
