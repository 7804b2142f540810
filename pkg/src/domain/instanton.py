"""Instanton bundles of metric G-structures.

2-forms are identified with antisymmetric D x D matrices through the
orthonormal coframe: a 2-form is the matrix (omega_ab) of its components in
beta^a ^ beta^b. A connection is an instanton for the structure when, for
every gauge direction, that matrix lies in g inside so(D).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import sympy as sp

from .deform import DeformationSetup, FrameField
from .exceptions import FormError, SplittingError
from .fields import GroupValuedField, LieValuedForm
from .liealg import DEFAULT_TOLERANCE, LieAlgebraModel, MembershipResult, Splitting


@dataclass(frozen=True, eq=False)
class TwoFormMatrixRep:
    """Orthonormal-frame coefficients (N, k, D, D) of a gauge-valued 2-form.

    Axis 1 runs over the basis of the gauge algebra; the last two axes hold the
    antisymmetric matrix omega_ab.
    """

    frame: FrameField
    gauge_algebra: LieAlgebraModel
    points: np.ndarray
    components: np.ndarray

    @property
    def dim(self) -> int:
        return self.frame.dim

    def direction(self, c: int) -> np.ndarray:
        return self.components[:, c]

    def reconstruct(self) -> np.ndarray:
        """Coordinate components F_{mu nu} as an array (N, d, d, k, k)."""
        beta = self.frame.coframe.evaluate(self.points)
        frame_values = np.einsum("ncab,cpq->nabpq", self.components,
                                 np.asarray(self.gauge_algebra.basis, dtype=float))
        return np.einsum("nam,nbv,nabpq->nmvpq", beta, beta, frame_values)


@dataclass(frozen=True)
class InstantonVerdict:
    holds: bool
    worst_residual: float
    worst_point: List[float]
    residual_table: Dict[str, float] = field(default_factory=dict)


# =========================================================================
# 2-FORM IDENTIFICATION
# =========================================================================


def two_form_components(
    F: LieValuedForm,
    frame: FrameField,
    gauge_algebra: LieAlgebraModel,
    points: Optional[np.ndarray] = None,
) -> TwoFormMatrixRep:
    """F_ab = e^mu_a e^nu_b F_{mu nu}, expanded over the gauge algebra basis."""
    if F.degree != 2:
        raise FormError("two_form_components expects a 2-form")
    if frame.chart.dim != F.chart.dim:
        raise FormError("frame and form live on charts of different dimension")
    if gauge_algebra.matrix_size != F.matrix_size:
        raise FormError(
            f"form has {F.matrix_size}x{F.matrix_size} values, "
            f"{gauge_algebra.name} is {gauge_algebra.matrix_size}x{gauge_algebra.matrix_size}"
        )
    points = frame.chart.sample_points if points is None else points
    coordinate = F.dense(points)
    e = frame.evaluate(points)
    in_frame = np.einsum("nma,nvb,nmvpq->nabpq", e, e, coordinate)
    coefficients = gauge_algebra.coefficients(in_frame)
    return TwoFormMatrixRep(frame, gauge_algebra, points, np.moveaxis(coefficients, -1, 1))


def phi_map(h_at_x: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Phi_h(omega) = h^T omega h."""
    h_at_x = np.asarray(h_at_x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if h_at_x.shape[-2:] != omega.shape[-2:] or omega.shape[-1] != omega.shape[-2]:
        raise FormError(f"cannot apply Phi_h of shape {h_at_x.shape} to {omega.shape}")
    return np.swapaxes(h_at_x, -1, -2) @ omega @ h_at_x


def _require_orthogonal_split(split: Splitting, g_alg: LieAlgebraModel) -> None:
    if split.sub.matrix_size != g_alg.matrix_size:
        raise SplittingError("instanton splitting and structure algebra sizes differ")
    same_span = split.sub.dimension == g_alg.dimension and all(
        split.sub.contains(E) for E in g_alg.basis
    )
    if not same_span:
        raise SplittingError(f"splitting is over {split.sub.name}, not {g_alg.name}")
    for E in split.ambient.basis:
        if np.max(np.abs(E + E.T)) > split.tolerance:
            raise SplittingError(f"instanton splitting must be over so(D), got {split.ambient.name}")


def instanton_bundle_preserved(
    setup: Union[DeformationSetup, GroupValuedField],
    g_alg: LieAlgebraModel,
    split: Splitting,
    tolerance: float = DEFAULT_TOLERANCE,
) -> MembershipResult:
    """Whether Phi_{h(x)} maps g into g (up to scale) at every sample point.

    Accepts a bare group field as well, since the criterion is pointwise in h.
    """
    _require_orthogonal_split(split, g_alg)
    h = setup.h if isinstance(setup, DeformationSetup) else setup
    if h.matrix_size != g_alg.matrix_size:
        raise SplittingError("h and the structure algebra act on different dimensions")
    h_values = h.evaluate(h.chart.sample_points)
    worst = 0.0
    for E in g_alg.basis:
        image = phi_map(h_values, E)
        image = 0.5 * (image - np.swapaxes(image, -1, -2))
        scale = np.linalg.norm(E) / np.sqrt(np.sum(image * image, axis=(-2, -1)))
        normalized = image * scale[:, None, None]
        residual = np.sqrt(np.sum(np.square(split.project_m(normalized)), axis=(-2, -1)))
        worst = max(worst, float(np.max(residual)))
    return MembershipResult(worst <= tolerance, worst)


def instanton_check(
    F: LieValuedForm,
    frame: FrameField,
    g_alg: LieAlgebraModel,
    split: Splitting,
    gauge_algebra: LieAlgebraModel,
    tolerance: float = DEFAULT_TOLERANCE,
    points: Optional[np.ndarray] = None,
) -> InstantonVerdict:
    """F is an instanton when every gauge direction of F_ab lies in g."""
    _require_orthogonal_split(split, g_alg)
    if frame.dim != g_alg.matrix_size:
        raise SplittingError(f"{g_alg.name} does not act on a {frame.dim}-frame")
    rep = two_form_components(F, frame, gauge_algebra, points)
    table: Dict[str, float] = {}
    worst, worst_index = 0.0, 0
    for c in range(gauge_algebra.dimension):
        norms = np.sqrt(np.sum(np.square(split.project_m(rep.direction(c))), axis=(-2, -1)))
        index = int(np.argmax(norms)) if norms.size else 0
        direction_worst = float(norms[index]) if norms.size else 0.0
        table[f"T{c + 1}"] = direction_worst
        if direction_worst > worst:
            worst, worst_index = direction_worst, index
    point = rep.points[worst_index].tolist() if len(rep.points) else []
    return InstantonVerdict(worst <= tolerance, worst, point, table)


# =========================================================================
# HODGE DUALITY (D = 4)
# =========================================================================


@lru_cache(maxsize=1)
def _levi_civita_symbol() -> np.ndarray:
    epsilon = np.zeros((4, 4, 4, 4))
    for a, b, c, d in product(range(4), repeat=4):
        epsilon[a, b, c, d] = float(sp.LeviCivita(a, b, c, d))
    return epsilon


def hodge_star_4d(omega: np.ndarray) -> np.ndarray:
    """(*omega)_ab = 1/2 eps_abcd omega_cd on the last two axes."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape[-2:] != (4, 4):
        raise FormError("the Hodge star is only available in dimension 4")
    return 0.5 * np.einsum("abcd,...cd->...ab", _levi_civita_symbol(), omega)


def hodge_duality_residuals(omega: np.ndarray) -> Tuple[float, float]:
    """Worst ||omega - *omega|| and ||omega + *omega||."""
    omega = np.asarray(omega, dtype=float)
    star = hodge_star_4d(omega)
    self_dual = np.sqrt(np.sum(np.square(omega - star), axis=(-2, -1)))
    anti_self_dual = np.sqrt(np.sum(np.square(omega + star), axis=(-2, -1)))
    return float(np.max(self_dual)), float(np.max(anti_self_dual))


def hodge_selfdual_oracle(rep: TwoFormMatrixRep, tolerance: float = DEFAULT_TOLERANCE) -> Tuple[bool, bool]:
    """(is self-dual, is anti-self-dual) over every point and gauge direction."""
    if rep.dim != 4:
        raise FormError("the self-duality oracle needs D = 4")
    self_dual, anti_self_dual = hodge_duality_residuals(rep.components)
    return self_dual <= tolerance, anti_self_dual <= tolerance
