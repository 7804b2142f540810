import numpy as np
import pytest

from src.domain.catalog import group_model
from src.domain.deform import (
    FrameField,
    LocalConnection,
    connection_antisymmetry_residual,
    connection_torsion_residual,
    deformed_frame,
    levi_civita_connection,
    metric_compatibility_residual,
)
from src.domain.exceptions import FrameError
from src.domain.expressions import parse_expression
from src.domain.fields import Chart, GroupValuedField, MatrixField


@pytest.fixture
def sphere_chart():
    return Chart.box([[0.3, 2.8], [0.0, 6.2]], 4, random_points=8)


def assert_levi_civita(frame, omega):
    assert connection_torsion_residual(omega, frame) <= 1e-7
    assert connection_antisymmetry_residual(omega) <= 1e-7
    assert metric_compatibility_residual(LocalConnection(omega), frame) <= 1e-7


def test_flat_frame_has_zero_connection(unit_cube):
    omega = levi_civita_connection(FrameField.identity(unit_cube))
    assert omega.is_zero
    assert omega.value_algebra.name == "so(3)"


def test_round_sphere(sphere_chart):
    """Frame (d_theta, d_phi / sin theta): omega^1_2 = -cos(theta) dphi."""
    frame = FrameField.from_strings(sphere_chart, [["1", "0"], ["0", "1/sin(x1)"]])
    omega = levi_civita_connection(frame)
    points = sphere_chart.sample_points
    values = omega.evaluate(points)
    np.testing.assert_allclose(values[:, 0], 0.0, atol=1e-10)
    np.testing.assert_allclose(values[:, 1, 0, 1], -np.cos(points[:, 0]), atol=1e-10)
    np.testing.assert_allclose(values[:, 1, 1, 0], np.cos(points[:, 0]), atol=1e-10)
    assert_levi_civita(frame, omega)


def test_conformally_flat_plane(unit_square):
    """e = phi * 1 gives omega^1_2 = -d_2(log phi) dx1 + d_1(log phi) dx2."""
    phi = parse_expression("1 + x1^2 + x2^2/2", unit_square)
    frame = FrameField(MatrixField.scalar_identity(unit_square, phi, 2))
    omega = levi_civita_connection(frame)
    points = unit_square.sample_points
    x1, x2 = points[:, 0], points[:, 1]
    phi_values = 1 + x1**2 + x2**2 / 2
    values = omega.evaluate(points)
    np.testing.assert_allclose(values[:, 0, 0, 1], -x2 / phi_values, atol=1e-10)
    np.testing.assert_allclose(values[:, 1, 0, 1], 2 * x1 / phi_values, atol=1e-10)
    assert_levi_civita(frame, omega)


def test_sheared_frame_in_three_dimensions(unit_cube):
    frame = FrameField.from_strings(
        unit_cube, [["1", "x3", "0"], ["0", "1 + x1^2", "0"], ["0", "sin(x2)", "2"]]
    )
    assert_levi_civita(frame, levi_civita_connection(frame))


def test_deformed_frame_is_right_multiplication(unit_square):
    frame = FrameField.from_strings(unit_square, [["1", "x1"], ["0", "1"]])
    h = GroupValuedField.from_strings(unit_square, [["cos(x2)", "sin(x2)"], ["-sin(x2)", "cos(x2)"]],
                                      group_model("so(2)"))
    moved = deformed_frame(frame, h)
    points = unit_square.sample_points
    expected = np.einsum("nij,njk->nik", frame.evaluate(points), h.evaluate(points))
    np.testing.assert_allclose(moved.evaluate(points), expected, atol=1e-14)
    np.testing.assert_allclose(moved.metric.evaluate(points), frame.metric.evaluate(points), atol=1e-10)


def test_degenerate_frame_is_rejected(unit_square):
    with pytest.raises(FrameError):
        FrameField.from_strings(unit_square, [["x1", "0"], ["0", "1"]])


def test_frame_shape_must_match_chart(unit_square):
    with pytest.raises(FrameError):
        FrameField(MatrixField.constant(unit_square, np.eye(3)))
