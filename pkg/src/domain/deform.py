"""The normal-deformation engine on local representations.

Subbundles are never materialised: a G-structure is a splitting plus local
components relative to a named section. Deforming by h moves the section
from s to s' = R_h(s) and rewrites the components accordingly.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np
import sympy as sp

from .catalog import group_model, lie_algebra
from .exceptions import (
    AdmissibilityError,
    CentraliserError,
    ChartError,
    DeformationConsistencyError,
    FrameError,
    GroupMembershipError,
    IncompatibleConnectionError,
    RepresentationError,
    SingularFieldError,
    SplittingError,
)
from .expressions import ScalarExpression, coordinate_symbols
from .fields import (
    Chart,
    GroupValuedField,
    LieValuedForm,
    MatrixField,
    exact_matrix,
    maurer_cartan_pullback,
    symbolic_inverse,
    validate_group_field,
)
from .liealg import (
    DEFAULT_TOLERANCE,
    LieAlgebraModel,
    MembershipResult,
    RepresentationModel,
    Splitting,
    centraliser_residuals,
    check_splitting_invariance,
    normaliser_membership,
    normaliser_residuals,
    sample_identity_component,
    stabiliser_membership,
)


def _frobenius(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values * values, axis=(-2, -1)))


def _worst(values: np.ndarray) -> float:
    return float(np.max(values)) if np.size(values) else 0.0


# =========================================================================
# DOMAIN TYPES
# =========================================================================


@dataclass(frozen=True, eq=False)
class LocalConnection:
    """Local connection 1-form s*A relative to the section named `section_label`."""

    form: LieValuedForm
    section_label: str = "s"
    compatible: bool = True

    def __post_init__(self):
        if self.form.degree != 1:
            raise IncompatibleConnectionError("a connection is a 1-form")

    @property
    def chart(self) -> Chart:
        return self.form.chart

    @property
    def matrix_size(self) -> int:
        return self.form.matrix_size

    def incompatibility(self, split: Splitting, points: Optional[np.ndarray] = None) -> float:
        """Worst ||pr_m(A_i)|| at the sample points."""
        points = self.chart.sample_points if points is None else points
        values = self.form.evaluate(points)
        if values.size == 0:
            return 0.0
        return _worst(_frobenius(split.project_m(values)))

    def require_compatible(self, split: Splitting) -> None:
        if self.matrix_size != split.matrix_size:
            raise IncompatibleConnectionError(
                f"connection has {self.matrix_size}x{self.matrix_size} coefficients, "
                f"splitting acts on {split.matrix_size}x{split.matrix_size}"
            )
        residual = self.incompatibility(split)
        if residual > split.tolerance:
            raise IncompatibleConnectionError(
                f"connection on {self.section_label} is not {split.sub.name}-valued "
                f"(residual {residual:.3e})"
            )


@dataclass(frozen=True, eq=False)
class FrameField:
    """Local frame e; column a holds the coordinate components of e_a."""

    field: MatrixField

    def __post_init__(self):
        d = self.field.chart.dim
        if (self.field.rows, self.field.cols) != (d, d):
            raise FrameError(f"a frame on a {d}-dimensional chart must be {d}x{d}")
        try:
            values = self.field.require_finite()
        except SingularFieldError as e:
            raise FrameError(str(e)) from e
        determinants = np.abs(np.linalg.det(values))
        if np.any(determinants <= 1e-12):
            point = self.chart.sample_points[int(np.argmin(determinants))]
            raise FrameError(f"degenerate frame at {point.tolist()}")

    @classmethod
    def identity(cls, chart: Chart) -> "FrameField":
        return cls(MatrixField.constant(chart, np.eye(chart.dim)))

    @classmethod
    def from_strings(cls, chart: Chart, rows) -> "FrameField":
        return cls(MatrixField.from_strings(chart, rows))

    @property
    def chart(self) -> Chart:
        return self.field.chart

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def matrix(self) -> sp.ImmutableMatrix:
        return self.field.matrix

    @cached_property
    def coframe(self) -> MatrixField:
        """beta = e^{-1}; row a holds the components of beta^a."""
        return MatrixField(self.chart, symbolic_inverse(self.matrix))

    @cached_property
    def metric(self) -> MatrixField:
        """g_{mu nu} = sum_a beta^a_mu beta^a_nu."""
        beta = self.coframe.matrix
        return MatrixField(self.chart, beta.T * beta)

    @cached_property
    def inverse_metric(self) -> MatrixField:
        return MatrixField(self.chart, self.matrix * self.matrix.T)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.field.evaluate(points)

    def require_positive_metric(self) -> None:
        values = self.metric.evaluate(self.chart.sample_points)
        symmetric = 0.5 * (values + np.swapaxes(values, -1, -2))
        smallest = np.linalg.eigvalsh(symmetric)[:, 0]
        if np.any(smallest <= 0.0):
            point = self.chart.sample_points[int(np.argmin(smallest))]
            raise FrameError(f"metric is not positive definite at {point.tolist()}")


@dataclass(frozen=True, eq=False)
class DeformationSetup:
    """An admissible h together with the evidence that it is admissible."""

    splitting: Splitting
    h: GroupValuedField
    normaliser_residuals: np.ndarray
    worst_residual: float
    worst_point: List[float]
    centraliser_valued: bool
    constant: bool
    conformal: bool
    invariance_residual: float
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def chart(self) -> Chart:
        return self.h.chart

    @cached_property
    def maurer_cartan(self) -> LieValuedForm:
        return maurer_cartan_pullback(self.h)

    @cached_property
    def h_inverse(self) -> GroupValuedField:
        return self.h.inverse()


@dataclass(frozen=True, eq=False)
class DefiningSectionModel:
    """A defining section with constant components tau_0 in adapted frames."""

    rep: RepresentationModel
    structure_algebra: LieAlgebraModel
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.rep.tau0 is None:
            raise RepresentationError(f"representation {self.rep.name} has no tau_0")
        for g in sample_identity_component(self.structure_algebra):
            verdict = stabiliser_membership(g, self.rep, self.tolerance)
            if not verdict.holds:
                raise RepresentationError(
                    f"{self.structure_algebra.name} does not stabilise tau_0 "
                    f"(residual {verdict.residual:.3e})"
                )

    @property
    def tau0(self) -> np.ndarray:
        return self.rep.tau0


@dataclass(frozen=True, eq=False)
class ConformalDeformation:
    """Outputs of a conformal rescaling e -> phi e."""

    connection: LocalConnection
    frame: FrameField
    zeta: LieValuedForm
    setup: DeformationSetup
    coincidence_residual: float
    gauge_term_residual: float


# =========================================================================
# ADMISSIBILITY (High Priority)
# h must take values in N_H(G) at every sample point.
# =========================================================================


def check_admissibility(
    h: GroupValuedField, split: Splitting, tolerance: Optional[float] = None
) -> DeformationSetup:
    tol = split.tolerance if tolerance is None else tolerance
    if h.matrix_size != split.matrix_size:
        raise SplittingError(
            f"h is {h.matrix_size}x{h.matrix_size} but the splitting acts on "
            f"{split.matrix_size}x{split.matrix_size} matrices"
        )
    membership = validate_group_field(h)
    if not membership.holds:
        raise GroupMembershipError(
            f"h leaves {h.group.name} (residual {membership.residual:.3e})"
        )
    invariance = check_splitting_invariance(split)
    if not invariance.holds:
        raise SplittingError(
            f"complement is not Ad({split.sub.name})-invariant "
            f"(residual {invariance.residual:.3e})"
        )

    points = h.chart.sample_points
    values = h.evaluate(points)
    residuals = np.atleast_1d(normaliser_residuals(values, split.sub, split))
    worst_index = int(np.argmax(residuals)) if residuals.size else 0
    worst = _worst(residuals)
    if worst > tol:
        raise AdmissibilityError(worst, points[worst_index], tol)

    central = _worst(centraliser_residuals(values, split.sub)) <= tol
    return DeformationSetup(
        splitting=split,
        h=h,
        normaliser_residuals=residuals,
        worst_residual=worst,
        worst_point=[float(v) for v in points[worst_index]],
        centraliser_valued=central,
        constant=h.field.is_constant,
        conformal=h.field.scalar_factor() is not None,
        invariance_residual=invariance.residual,
        tolerance=tol,
    )


# =========================================================================
# CONNECTIONS (High Priority)
# =========================================================================


def _deformed_label(label: str) -> str:
    return f"R_h({label})"


def _require_g_valued(form: LieValuedForm, split: Splitting, tolerance: float, what: str) -> None:
    values = form.evaluate(form.chart.sample_points)
    if values.size == 0:
        return
    residual = _worst(_frobenius(split.project_m(values)))
    if residual > tolerance:
        raise DeformationConsistencyError(
            f"{what} leaves {split.sub.name} (residual {residual:.3e})"
        )


def deform_connection(A: LocalConnection, setup: DeformationSetup) -> LocalConnection:
    """s'*f(A) = Ad(h^{-1}) s*A + pr_g h*mu_H."""
    split = setup.splitting
    A.require_compatible(split)
    h, h_inv = setup.h.matrix, setup.h.inverse_matrix
    conjugated = A.form.conjugate(h_inv, h, split.sub)
    gauge_term = setup.maurer_cartan.apply_linear_map(split.matrix_projector_g, split.sub)
    deformed = conjugated + gauge_term
    _require_g_valued(deformed, split, setup.tolerance, "deformed connection")
    return LocalConnection(deformed, _deformed_label(A.section_label))


def extend_connection_rep(A: LocalConnection, setup: DeformationSetup) -> LieValuedForm:
    """Ambient extension pulled back along s': Ad(h^{-1}) s*A + h*mu_H."""
    split = setup.splitting
    A.require_compatible(split)
    h, h_inv = setup.h.matrix, setup.h.inverse_matrix
    conjugated = A.form.conjugate(h_inv, h, split.ambient)
    return conjugated + setup.maurer_cartan.with_value_algebra(split.ambient)


def restrict_project_connection(
    A_ambient: LieValuedForm, split: Splitting, section_label: str = "s"
) -> LocalConnection:
    """pr_g applied to the components of an h-valued connection."""
    projected = A_ambient.apply_linear_map(split.matrix_projector_g, split.sub)
    return LocalConnection(projected, section_label)


def zeta_form(setup: DeformationSetup) -> LieValuedForm:
    """s'*zeta_h = pr_m h*mu_H; the obstruction to restricting the extension."""
    return setup.maurer_cartan.apply_linear_map(setup.splitting.matrix_projector_m)


def gauge_transform(A: LocalConnection, g: GroupValuedField) -> LocalConnection:
    """Change of section s -> s g: Ad(g^{-1}) A + g*mu_G."""
    membership = validate_group_field(g)
    if not membership.holds:
        raise GroupMembershipError(
            f"gauge field leaves {g.group.name} (residual {membership.residual:.3e})"
        )
    algebra = A.form.value_algebra
    conjugated = A.form.conjugate(g.inverse_matrix, g.matrix, algebra)
    transformed = conjugated + maurer_cartan_pullback(g).with_value_algebra(algebra)
    return LocalConnection(transformed, f"{A.section_label}*g", A.compatible)


def pullback_to_section(A_ambient: LieValuedForm, g: GroupValuedField) -> LieValuedForm:
    """Ambient change of section: Ad(g^{-1}) A + g*mu."""
    algebra = A_ambient.value_algebra
    conjugated = A_ambient.conjugate(g.inverse_matrix, g.matrix, algebra)
    return conjugated + maurer_cartan_pullback(g).with_value_algebra(algebra)


def central_pullback_deform(A: LocalConnection, setup: DeformationSetup) -> LocalConnection:
    """For centraliser-valued h the components are unchanged: s'*A' = s*A."""
    if not setup.centraliser_valued:
        raise CentraliserError("h does not take values in the centraliser of G")
    return LocalConnection(A.form, _deformed_label(A.section_label), A.compatible)


def constant_deform(
    A: LocalConnection, h0: np.ndarray, split: Splitting, group=None
) -> LocalConnection:
    """rho(h0^{-1}) A rho(h0) for a constant h0 in the normaliser."""
    h0 = np.asarray(h0, dtype=float)
    verdict = normaliser_membership(h0, split.sub, split, group)
    if not verdict.holds:
        raise AdmissibilityError(verdict.residual, [], split.tolerance)
    A.require_compatible(split)
    conjugated = A.form.conjugate(exact_matrix(np.linalg.inv(h0)), exact_matrix(h0), split.sub)
    return LocalConnection(conjugated, _deformed_label(A.section_label))


def conformal_deform(
    A: LocalConnection, phi: ScalarExpression, frame: FrameField, split: Splitting
) -> ConformalDeformation:
    """Deform by h = phi * 1_D for G inside SO(D) inside GL(D)."""
    chart = frame.chart
    D = frame.dim
    values = phi.evaluate(chart.sample_points)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        bad = ~(np.isfinite(values) & (values > 0.0))
        point = chart.sample_points[int(np.argmax(bad))]
        raise SingularFieldError(f"phi is not positive at {point.tolist()}", point)
    if split.matrix_size != D:
        raise SplittingError(f"conformal rescaling needs a splitting of gl({D})")
    if not split.ambient.contains(np.eye(D)):
        raise SplittingError(f"{split.ambient.name} does not contain the identity; use gl({D})")
    for E in split.sub.basis:
        if np.max(np.abs(E + E.T)) > split.tolerance:
            raise SplittingError(f"{split.sub.name} is not contained in so({D})")

    h = GroupValuedField(MatrixField.scalar_identity(chart, phi, D), group_model(f"gl({D})"))
    setup = check_admissibility(h, split)
    deformed = deform_connection(A, setup)
    pulled = central_pullback_deform(A, setup)
    gauge_term = setup.maurer_cartan.apply_linear_map(split.matrix_projector_g)
    return ConformalDeformation(
        connection=deformed,
        frame=deformed_frame(frame, h),
        zeta=zeta_form(setup),
        setup=setup,
        coincidence_residual=deformed.form.max_difference(pulled.form),
        gauge_term_residual=gauge_term.max_norm(),
    )


# =========================================================================
# TORSION
# =========================================================================


def intrinsic_torsion(A0: LieValuedForm, split: Splitting) -> LieValuedForm:
    """pr_m of a reference connection."""
    return A0.apply_linear_map(split.matrix_projector_m)


def torsion_change(A0: LieValuedForm, A0p: LieValuedForm, setup: DeformationSetup) -> LieValuedForm:
    """Ad(h) pr_m Ad(h^{-1}) s*A0' - pr_m s*A0 + Ad(h) pr_m h*mu_H."""
    split = setup.splitting
    projector = split.matrix_projector_m
    h, h_inv = setup.h.matrix, setup.h.inverse_matrix
    deformed_part = A0p.conjugate(h_inv, h).apply_linear_map(projector).conjugate(h, h_inv)
    maurer_cartan_part = setup.maurer_cartan.apply_linear_map(projector).conjugate(h, h_inv)
    return deformed_part - intrinsic_torsion(A0, split) + maurer_cartan_part


def torsion_change_direct(
    A0: LieValuedForm,
    A0p: LieValuedForm,
    setup: DeformationSetup,
    points: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Ad(h) pr_m (s'*A0') - pr_m (s*A0) evaluated numerically, shape (N, d, n, n).

    s'*A0' comes from the ambient section change, so this path never applies
    the projected formula.
    """
    split = setup.splitting
    points = setup.chart.sample_points if points is None else points
    pulled = pullback_to_section(A0p, setup.h).evaluate(points)
    h_values = setup.h.evaluate(points)
    h_inverse = np.linalg.inv(h_values)
    torsion_prime = split.project_m(pulled)
    moved = np.einsum("nij,ncjk,nkl->ncil", h_values, torsion_prime, h_inverse)
    return moved - split.project_m(A0.evaluate(points))


# =========================================================================
# DEFINING SECTIONS
# =========================================================================


def deform_defining_section(
    ds: DefiningSectionModel, setup: DeformationSetup, x: Sequence[float]
) -> np.ndarray:
    """rho(h(x)) tau_0: the deformed defining section relative to the old section."""
    if not setup.chart.contains(x):
        raise ChartError(f"point {list(x)} lies outside the chart")
    return ds.rep.act(setup.h.at(x), ds.tau0)


def defining_section_wellposedness(ds: DefiningSectionModel, setup: DeformationSetup) -> MembershipResult:
    """rho(h^{-1} g h) tau_0 = tau_0 for sampled g in G at every sample point."""
    h_values = setup.h.evaluate(setup.chart.sample_points)
    h_inverse = np.linalg.inv(h_values)
    worst = 0.0
    for g in sample_identity_component(setup.splitting.sub, count=4):
        for h_x, h_inv_x in zip(h_values, h_inverse):
            moved = ds.rep.act(h_inv_x @ g @ h_x, ds.tau0) - ds.tau0
            worst = max(worst, float(np.linalg.norm(moved)))
    return MembershipResult(worst <= ds.tolerance, worst)


# =========================================================================
# RIGHT ACTION
# =========================================================================


def compose_setups(first: DeformationSetup, second: DeformationSetup) -> DeformationSetup:
    """Setup of the pointwise product h1 h2."""
    if first.splitting is not second.splitting:
        raise SplittingError("setups refer to different splittings")
    return check_admissibility(first.h @ second.h, first.splitting, first.tolerance)


def complement_is_normaliser_invariant(setup: DeformationSetup) -> MembershipResult:
    """Whether Ad(h(x)) preserves m at every sample point."""
    split = setup.splitting
    h_values = setup.h.evaluate(setup.chart.sample_points)
    h_inverse = np.linalg.inv(h_values)
    worst = 0.0
    for m_b in split.complement_basis:
        moved = h_inverse @ m_b @ h_values
        worst = max(worst, _worst(_frobenius(split.project_g(moved))))
    return MembershipResult(worst <= setup.tolerance, worst)


def composition_discrepancy(
    A: LocalConnection, first: DeformationSetup, second: DeformationSetup
) -> float:
    """Worst distance between f_{h1 h2}(A) and f_{h2}(f_{h1}(A))."""
    direct = deform_connection(A, compose_setups(first, second))
    stepwise = deform_connection(deform_connection(A, first), second)
    return direct.form.max_difference(stepwise.form)


# =========================================================================
# METRIC STRUCTURES
# =========================================================================


def deformed_frame(frame: FrameField, h: GroupValuedField) -> FrameField:
    """e' = e h, i.e. e'_i = h^j_i e_j."""
    if h.matrix_size != frame.dim:
        raise FrameError(f"h of size {h.matrix_size} cannot act on a {frame.dim}-frame")
    return FrameField(frame.field @ h.field)


def _orthonormal_algebra(D: int) -> LieAlgebraModel:
    return lie_algebra(f"so({D})") if D >= 2 else lie_algebra("trivial", 1)


def levi_civita_connection(frame: FrameField, split: Optional[Splitting] = None) -> LieValuedForm:
    """Levi-Civita connection in the frame: omega_mu = beta (d_mu e + Gamma_mu e).

    Christoffel symbols come from the Koszul formula on the derived metric.
    The result is so(D)-valued; `split`, when given, only fixes the value
    algebra to its ambient algebra.
    """
    frame.require_positive_metric()
    D = frame.dim
    x = coordinate_symbols(D)
    g = frame.metric.matrix
    g_inv = frame.inverse_metric.matrix
    dg = [g.diff(x[k]) for k in range(D)]

    def christoffel(l: int, m: int, n: int) -> sp.Expr:
        return sp.Rational(1, 2) * sum(
            g_inv[l, s] * (dg[m][s, n] + dg[n][s, m] - dg[s][m, n]) for s in range(D)
        )

    e = frame.matrix
    beta = frame.coframe.matrix
    components = {}
    for mu in range(D):
        gamma_mu = sp.Matrix(D, D, lambda l, n: christoffel(l, mu, n))
        components[(mu,)] = beta * (e.diff(x[mu]) + gamma_mu * e)
    algebra = split.ambient if split is not None else _orthonormal_algebra(D)
    return LieValuedForm(frame.chart, 1, D, components, algebra)


def connection_torsion_residual(
    omega: LieValuedForm, frame: FrameField, points: Optional[np.ndarray] = None
) -> float:
    """Worst |d beta^a + omega^a_b ^ beta^b| component at the sample points."""
    points = frame.chart.sample_points if points is None else points
    D = frame.dim
    beta = frame.coframe.evaluate(points)
    d_beta = np.stack(
        [frame.coframe.derivative(mu + 1).evaluate(points) for mu in range(D)], axis=1
    )
    w = omega.evaluate(points)
    combined = d_beta + np.einsum("nmab,nbv->nmav", w, beta)
    torsion = combined - np.transpose(combined, (0, 3, 2, 1))
    return float(np.max(np.abs(torsion)))


def connection_antisymmetry_residual(omega: LieValuedForm, points: Optional[np.ndarray] = None) -> float:
    points = omega.chart.sample_points if points is None else points
    w = omega.evaluate(points)
    if w.size == 0:
        return 0.0
    return float(np.max(np.abs(w + np.swapaxes(w, -1, -2))))


def metric_compatibility_residual(
    A: LocalConnection, frame: FrameField, points: Optional[np.ndarray] = None
) -> float:
    """max |(nabla_{e_i} g)(e_j, e_k)| = max |A(e_i)^k_j + A(e_i)^j_k|."""
    if A.matrix_size != frame.dim:
        raise FrameError(
            f"connection of size {A.matrix_size} does not act on a {frame.dim}-frame"
        )
    points = frame.chart.sample_points if points is None else points
    A_coordinate = A.form.evaluate(points)
    e = frame.evaluate(points)
    A_frame = np.einsum("nmi,nmjk->nijk", e, A_coordinate)
    return float(np.max(np.abs(A_frame + np.swapaxes(A_frame, -1, -2))))
