import numpy as np
import pytest

from src.domain.catalog import group_model, lie_algebra, representation, su2_basis
from src.domain.exceptions import GroupMembershipError, LieAlgebraError, RepresentationError, SplittingError
from src.domain.liealg import (
    LieAlgebraModel,
    adjoint,
    bracket,
    build_splitting,
    centraliser_membership,
    check_splitting_invariance,
    exponential,
    lie_normaliser_defect,
    normaliser_membership,
    sample_identity_component,
    stabiliser_membership,
)

from .conftest import L, rotation


def test_bracket_of_so3_generators():
    np.testing.assert_allclose(bracket(L(3, 1, 2), L(3, 1, 3)), -L(3, 2, 3), atol=1e-15)


def test_bracket_rejects_mismatched_shapes():
    with pytest.raises(LieAlgebraError):
        bracket(np.eye(2), np.eye(3))


def test_exponential_of_zero_and_rotation():
    np.testing.assert_allclose(exponential(np.zeros((3, 3))), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(exponential(0.3 * L(3, 1, 2)), rotation(3, 1, 2, 0.3), atol=1e-14)


def test_exponential_rejects_non_finite():
    X = np.zeros((2, 2))
    X[0, 1] = np.nan
    with pytest.raises(LieAlgebraError):
        exponential(X)


def test_adjoint_is_conjugation():
    a = rotation(3, 1, 3, 0.7)
    X = L(3, 1, 2)
    np.testing.assert_allclose(adjoint(a, X), a @ X @ a.T, atol=1e-14)


def test_adjoint_by_singular_matrix_fails():
    with pytest.raises(GroupMembershipError):
        adjoint(np.zeros((3, 3)), L(3, 1, 2))


def test_dependent_basis_is_rejected():
    with pytest.raises(LieAlgebraError):
        LieAlgebraModel("twice", 3, (L(3, 1, 2), 2.0 * L(3, 1, 2)))


def test_unclosed_basis_is_rejected():
    with pytest.raises(LieAlgebraError):
        LieAlgebraModel("open", 3, (L(3, 1, 2), L(3, 1, 3)))


def test_su2_plus_and_minus_commute():
    for X in su2_basis(+1):
        for Y in su2_basis(-1):
            np.testing.assert_allclose(bracket(X, Y), 0.0, atol=1e-15)


SPLITTINGS = [
    ("so(3)", "so2_in_so3"),
    ("so(4)", "su2_plus_in_so4"),
    ("so(4)", "su2_minus_in_so4"),
    ("gl(3)", "so(3)"),
    ("so(2)", "trivial"),
    ("gl(2)", "gl(2)"),
]


def catalog_splitting(ambient, sub):
    n = lie_algebra(ambient).matrix_size
    return build_splitting(lie_algebra(ambient), lie_algebra(sub, n))


@pytest.mark.parametrize("ambient, sub", SPLITTINGS)
def test_splitting_projectors_are_complementary(ambient, sub, rng):
    split = catalog_splitting(ambient, sub)
    X = split.ambient.element(rng.normal(size=(1000, split.ambient.dimension)))
    g_part, m_part = split.project_g(X), split.project_m(X)
    assert np.max(np.linalg.norm(g_part + m_part - X, axis=(-2, -1))) <= 1e-10
    assert np.max(np.abs(np.sum(g_part * m_part, axis=(-2, -1)))) <= 1e-10
    np.testing.assert_allclose(split.project_g(g_part), g_part, atol=1e-10)
    np.testing.assert_allclose(split.project_m(g_part), 0.0, atol=1e-10)


def test_complement_of_so3_in_gl3_is_symmetric(so3_in_gl3_split):
    assert len(so3_in_gl3_split.complement_basis) == 6
    for m_b in so3_in_gl3_split.complement_basis:
        np.testing.assert_allclose(m_b, m_b.T, atol=1e-14)


def test_splitting_needs_a_subalgebra():
    with pytest.raises(SplittingError):
        build_splitting(lie_algebra("so2_in_so3"), lie_algebra("so(3)"))


@pytest.mark.parametrize("ambient, sub", SPLITTINGS)
def test_reductive_splittings_are_invariant(ambient, sub):
    split = catalog_splitting(ambient, sub)
    verdict = check_splitting_invariance(split)
    assert verdict.holds
    assert verdict.residual <= 1e-9


def test_rotation_about_axis_normalises_so2(so2_in_so3_split, so3_group):
    verdict = normaliser_membership(rotation(3, 1, 2, 1.1), so2_in_so3_split.sub, so2_in_so3_split, so3_group)
    assert verdict.holds


def test_flip_normalises_so2_without_centralising(so2_in_so3_split, so3_group):
    flip = np.diag([1.0, -1.0, -1.0])
    assert normaliser_membership(flip, so2_in_so3_split.sub, so2_in_so3_split, so3_group).holds
    assert not centraliser_membership(flip, so2_in_so3_split.sub, so3_group).holds


def test_tilted_rotation_leaves_the_normaliser(so2_in_so3_split):
    verdict = normaliser_membership(rotation(3, 1, 3, 0.5), so2_in_so3_split.sub, so2_in_so3_split)
    assert not verdict.holds
    assert verdict.residual >= 1e-3


def test_membership_requires_group_element(so2_in_so3_split, so3_group):
    with pytest.raises(GroupMembershipError):
        normaliser_membership(2.0 * np.eye(3), so2_in_so3_split.sub, so2_in_so3_split, so3_group)


def test_su2_minus_centralises_su2_plus(su2_plus_split, so4_group):
    h0 = exponential(0.5 * su2_basis(-1)[0])
    assert centraliser_membership(h0, su2_plus_split.sub, so4_group).holds


def test_stabiliser_of_a_vector():
    rep = representation("standard", 3, np.array([1.0, 0.0, 0.0]))
    assert stabiliser_membership(rotation(3, 2, 3, 0.8), rep).holds
    verdict = stabiliser_membership(rotation(3, 1, 2, 0.8), rep)
    assert not verdict.holds
    assert verdict.residual == pytest.approx(2 * np.sin(0.4))


def test_stabiliser_needs_tau0():
    with pytest.raises(RepresentationError):
        stabiliser_membership(np.eye(3), representation("standard", 3))


def test_sampled_normaliser_fields(so2_in_so3_split, rng):
    """Random products of axis rotations and flips pass; tilted ones fail."""
    flip = np.diag([1.0, -1.0, -1.0])
    for _ in range(20):
        a = rotation(3, 1, 2, rng.uniform(-np.pi, np.pi))
        if rng.integers(2):
            a = a @ flip
        assert normaliser_membership(a, so2_in_so3_split.sub, so2_in_so3_split).residual <= 1e-9
        tilted = a @ rotation(3, 2, 3, rng.uniform(0.1, 1.4))
        assert normaliser_membership(tilted, so2_in_so3_split.sub, so2_in_so3_split).residual >= 1e-3


def test_identity_component_samples_are_group_elements():
    group = group_model("su2_plus_in_so4")
    samples = sample_identity_component(group.algebra, count=5, seed=3)
    assert len(samples) == 1 + 3 * 4 + 5
    for a in samples:
        assert group.contains(a)


def test_lie_normaliser_defect(so2_in_so3_split):
    assert lie_normaliser_defect(L(3, 1, 2), so2_in_so3_split) <= 1e-12
    assert lie_normaliser_defect(L(3, 1, 3), so2_in_so3_split) > 1e-3
