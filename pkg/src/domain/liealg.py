"""Matrix Lie algebras, groups, splittings and membership predicates.

All objects are real matrices. Norms are Frobenius norms and the pairing used
for complements is <X, Y> = trace(X^T Y).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .exceptions import (
    GroupMembershipError,
    LieAlgebraError,
    RepresentationError,
    SplittingError,
)

DEFAULT_TOLERANCE = 1e-9
MATRIX_TOLERANCE = 1e-12
GRAM_SCHMIDT_CUTOFF = 1e-10
PROJECTOR_CLEANUP = 1e-14
INVARIANCE_TIMES = (1.0, -1.0, 0.5, -0.5)
DEFAULT_RANDOM_PRODUCTS = 16


class MembershipResult(NamedTuple):
    """Boolean verdict plus the residual it was decided on."""

    holds: bool
    residual: float


def _frozen(matrix) -> np.ndarray:
    array = np.array(matrix, dtype=float)
    array.setflags(write=False)
    return array


def _norm(stack: np.ndarray) -> np.ndarray:
    """Frobenius norm over the last two axes."""
    return np.sqrt(np.sum(np.square(stack), axis=(-2, -1)))


def _clean(projector: np.ndarray) -> np.ndarray:
    cleaned = np.where(np.abs(projector) < PROJECTOR_CLEANUP, 0.0, projector)
    cleaned.setflags(write=False)
    return cleaned


# =========================================================================
# MATRIX PRIMITIVES
# =========================================================================


def bracket(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Commutator XY - YX."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-2:] != Y.shape[-2:] or X.shape[-1] != X.shape[-2]:
        raise LieAlgebraError(f"bracket of mismatched shapes {X.shape} and {Y.shape}")
    return X @ Y - Y @ X


def exponential(X: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise LieAlgebraError(f"exponential needs a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise LieAlgebraError("exponential of a matrix with non-finite entries")
    return expm(X)


def _inverse(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(np.linalg.cond(a) > 1.0 / np.finfo(float).eps):
        raise GroupMembershipError("adjoint action by a singular matrix")
    return np.linalg.inv(a)


def adjoint(a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Ad(a)X = a X a^{-1}; `a` may be a stack of matrices."""
    a = np.asarray(a, dtype=float)
    return a @ np.asarray(X, dtype=float) @ _inverse(a)


# =========================================================================
# LIE ALGEBRAS
# =========================================================================


@dataclass(frozen=True, eq=False)
class LieAlgebraModel:
    """A matrix Lie algebra given by an explicit basis."""

    name: str
    matrix_size: int
    basis: Tuple[np.ndarray, ...]
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.matrix_size < 1:
            raise LieAlgebraError(f"{self.name}: matrix size must be positive")
        basis = tuple(_frozen(E) for E in self.basis)
        for E in basis:
            if E.shape != (self.matrix_size, self.matrix_size):
                raise LieAlgebraError(
                    f"{self.name}: basis element of shape {E.shape}, "
                    f"expected {(self.matrix_size, self.matrix_size)}"
                )
        object.__setattr__(self, "basis", basis)

        if self.dimension:
            singular_values = np.linalg.svd(self.basis_matrix, compute_uv=False)
            if singular_values[-1] < GRAM_SCHMIDT_CUTOFF * max(1.0, singular_values[0]):
                raise LieAlgebraError(f"{self.name}: basis is linearly dependent")

        residual = self.closure_residual()
        if residual > self.tolerance:
            raise LieAlgebraError(
                f"{self.name}: not closed under the bracket (residual {residual:.2e})"
            )

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        """Columns are the row-major vectorised basis elements."""
        n2 = self.matrix_size * self.matrix_size
        if not self.basis:
            return np.zeros((n2, 0))
        return np.stack([E.reshape(-1) for E in self.basis], axis=1)

    def gram_matrix(self) -> np.ndarray:
        return self.basis_matrix.T @ self.basis_matrix

    @cached_property
    def _coefficient_map(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.matrix_size * self.matrix_size))
        return np.linalg.solve(self.gram_matrix(), self.basis_matrix.T)

    def coefficients(self, X: np.ndarray) -> np.ndarray:
        """Least-squares coordinates of X (or a stack of X) in the basis."""
        X = np.asarray(X, dtype=float)
        flat = X.reshape(X.shape[:-2] + (-1,))
        return flat @ self._coefficient_map.T

    def element(self, coefficients: Sequence[float]) -> np.ndarray:
        coefficients = np.asarray(coefficients, dtype=float)
        flat = coefficients @ self.basis_matrix.T
        return flat.reshape(coefficients.shape[:-1] + (self.matrix_size, self.matrix_size))

    def span_residual(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return _norm(X - self.element(self.coefficients(X)))

    def contains(self, X: np.ndarray, tolerance: Optional[float] = None) -> bool:
        tol = self.tolerance if tolerance is None else tolerance
        return bool(np.max(self.span_residual(X), initial=0.0) <= tol)

    def closure_residual(self) -> float:
        worst = 0.0
        for i, Ea in enumerate(self.basis):
            for Eb in self.basis[i + 1:]:
                worst = max(worst, float(self.span_residual(bracket(Ea, Eb))))
        return worst


# =========================================================================
# GROUPS
# Membership is declarative: a group is the set of matrices satisfying all
# of its constraints.
# =========================================================================


class MembershipConstraint(ABC):
    """A defining equation of a matrix group."""

    @abstractmethod
    def residual(self, a: np.ndarray) -> np.ndarray:
        """Residual for a matrix or a stack of matrices."""


@dataclass(frozen=True)
class Orthogonality(MembershipConstraint):
    def residual(self, a):
        a = np.asarray(a, dtype=float)
        identity = np.eye(a.shape[-1])
        return _norm(np.swapaxes(a, -1, -2) @ a - identity)


@dataclass(frozen=True)
class UnitDeterminant(MembershipConstraint):
    def residual(self, a):
        return np.abs(np.linalg.det(np.asarray(a, dtype=float)) - 1.0)


@dataclass(frozen=True)
class Invertibility(MembershipConstraint):
    threshold: float = 1e-12

    def residual(self, a):
        det = np.abs(np.linalg.det(np.asarray(a, dtype=float)))
        return np.where(det > self.threshold, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class CommutesWith(MembershipConstraint):
    matrices: Tuple[np.ndarray, ...]

    def residual(self, a):
        a = np.asarray(a, dtype=float)
        worst = np.zeros(a.shape[:-2])
        for M in self.matrices:
            worst = np.maximum(worst, _norm(a @ M - M @ a))
        return worst


@dataclass(frozen=True, eq=False)
class FixesVectors(MembershipConstraint):
    vectors: Tuple[np.ndarray, ...]

    def residual(self, a):
        a = np.asarray(a, dtype=float)
        worst = np.zeros(a.shape[:-2])
        for v in self.vectors:
            moved = a @ np.asarray(v, dtype=float) - v
            worst = np.maximum(worst, np.sqrt(np.sum(moved * moved, axis=-1)))
        return worst


@dataclass(frozen=True)
class IdentityOnly(MembershipConstraint):
    def residual(self, a):
        a = np.asarray(a, dtype=float)
        return _norm(a - np.eye(a.shape[-1]))


@dataclass(frozen=True, eq=False)
class GroupModel:
    """A matrix group H or G together with its Lie algebra."""

    name: str
    matrix_size: int
    algebra: LieAlgebraModel
    constraints: Tuple[MembershipConstraint, ...]
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.algebra.matrix_size != self.matrix_size:
            raise LieAlgebraError(f"{self.name}: algebra and group sizes differ")
        identity = np.eye(self.matrix_size)
        if self.membership_residual(identity) != 0.0:
            raise GroupMembershipError(f"{self.name}: identity fails membership")
        for E in self.algebra.basis:
            residual = self.membership_residual(exponential(0.5 * E))
            if residual > self.tolerance:
                raise GroupMembershipError(
                    f"{self.name}: exp of the algebra leaves the group ({residual:.2e})"
                )

    @property
    def is_orthogonal(self) -> bool:
        return any(isinstance(c, (Orthogonality, IdentityOnly)) for c in self.constraints)

    def membership_residual(self, a: np.ndarray):
        a = np.asarray(a, dtype=float)
        worst = np.zeros(a.shape[:-2])
        for constraint in self.constraints:
            worst = np.maximum(worst, constraint.residual(a))
        return float(worst) if worst.ndim == 0 else worst

    def contains(self, a: np.ndarray) -> bool:
        return bool(np.max(self.membership_residual(a)) <= self.tolerance)

    def require(self, a: np.ndarray) -> None:
        residual = float(np.max(self.membership_residual(a)))
        if residual > self.tolerance:
            raise GroupMembershipError(
                f"matrix is not in {self.name} (residual {residual:.3e})"
            )

    def sample_elements(
        self, count: int = DEFAULT_RANDOM_PRODUCTS, seed: int = 0
    ) -> List[np.ndarray]:
        return sample_identity_component(self.algebra, count, seed)


def sample_identity_component(
    algebra: LieAlgebraModel, count: int = DEFAULT_RANDOM_PRODUCTS, seed: int = 0
) -> List[np.ndarray]:
    """Identity, exp(t E_a) at the fixed times, and `count` random generator products."""
    n = algebra.matrix_size
    samples = [np.eye(n)]
    basis = algebra.basis
    if not basis:
        return samples
    for E in basis:
        for t in INVARIANCE_TIMES:
            samples.append(exponential(t * E))
    rng = np.random.default_rng(seed)
    for _ in range(count):
        element = np.eye(n)
        for _ in range(3):
            E = basis[rng.integers(len(basis))]
            element = element @ exponential(rng.uniform(-1.0, 1.0) * E)
        samples.append(element)
    return samples


# =========================================================================
# REPRESENTATIONS
# =========================================================================


@dataclass(frozen=True, eq=False)
class RepresentationModel:
    """A representation rho of H on R^target_dim with optional tau_0."""

    name: str
    target_dim: int
    matrix_for: Callable[[np.ndarray], np.ndarray]
    tau0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.tau0 is not None:
            tau0 = _frozen(self.tau0).reshape(-1)
            if tau0.shape != (self.target_dim,):
                raise RepresentationError(
                    f"{self.name}: tau_0 has {tau0.size} components, expected {self.target_dim}"
                )
            object.__setattr__(self, "tau0", tau0)

    def act(self, a: np.ndarray, vector: np.ndarray) -> np.ndarray:
        return self.matrix_for(np.asarray(a, dtype=float)) @ np.asarray(vector, dtype=float)

    def homomorphism_residual(self, samples: Sequence[np.ndarray]) -> float:
        """Worst violation of rho(1) = 1 and rho(ab) = rho(a) rho(b) on consecutive samples."""
        identity = np.eye(np.asarray(samples[0]).shape[0])
        worst = float(np.max(np.abs(self.matrix_for(identity) - np.eye(self.target_dim))))
        for a, b in zip(samples, samples[1:]):
            lhs = self.matrix_for(a @ b)
            rhs = self.matrix_for(a) @ self.matrix_for(b)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst


# =========================================================================
# SPLITTINGS
# =========================================================================


@dataclass(frozen=True, eq=False)
class Splitting:
    """Frobenius-orthogonal decomposition h = g + m."""

    ambient: LieAlgebraModel
    sub: LieAlgebraModel
    complement_basis: Tuple[np.ndarray, ...]
    projector_g: np.ndarray
    projector_m: np.ndarray
    g_frame: np.ndarray = field(repr=False)
    m_frame: np.ndarray = field(repr=False)

    @property
    def tolerance(self) -> float:
        return self.ambient.tolerance

    @property
    def matrix_size(self) -> int:
        return self.ambient.matrix_size

    @cached_property
    def matrix_projector_g(self) -> np.ndarray:
        """pr_g acting on row-major vectorised n x n matrices."""
        return _clean(self.g_frame @ self.g_frame.T)

    @cached_property
    def matrix_projector_m(self) -> np.ndarray:
        return _clean(self.m_frame @ self.m_frame.T)

    def _apply(self, projector: np.ndarray, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        flat = X.reshape(X.shape[:-2] + (-1,)) @ projector.T
        return flat.reshape(X.shape)

    def project_g(self, X: np.ndarray) -> np.ndarray:
        return self._apply(self.matrix_projector_g, X)

    def project_m(self, X: np.ndarray) -> np.ndarray:
        return self._apply(self.matrix_projector_m, X)


def _gram_schmidt(vectors: Iterable[np.ndarray], frame: List[np.ndarray]) -> List[np.ndarray]:
    """Append the normalised residuals of `vectors` to `frame`, in order."""
    added = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for _ in range(2):
            for q in frame + added:
                w = w - np.dot(q, w) * q
        norm = np.linalg.norm(w)
        if norm >= GRAM_SCHMIDT_CUTOFF:
            added.append(w / norm)
    return added


def build_splitting(ambient: LieAlgebraModel, sub: LieAlgebraModel) -> Splitting:
    """Split `ambient` as `sub` plus its Frobenius-orthogonal complement."""
    if ambient.matrix_size != sub.matrix_size:
        raise SplittingError(
            f"{sub.name} ({sub.matrix_size}x{sub.matrix_size}) cannot sit in "
            f"{ambient.name} ({ambient.matrix_size}x{ambient.matrix_size})"
        )
    for E in sub.basis:
        residual = float(ambient.span_residual(E))
        if residual > ambient.tolerance:
            raise SplittingError(
                f"{sub.name} is not contained in {ambient.name} (residual {residual:.2e})"
            )

    g_frame = _gram_schmidt((E.reshape(-1) for E in sub.basis), [])
    if len(g_frame) != sub.dimension:
        raise SplittingError(f"degenerate Gram matrix for {sub.name}")
    m_frame = _gram_schmidt((E.reshape(-1) for E in ambient.basis), g_frame)
    if len(g_frame) + len(m_frame) != ambient.dimension:
        raise SplittingError(f"degenerate Gram matrix for {ambient.name}")

    n = ambient.matrix_size
    n2 = n * n
    G = np.stack(g_frame, axis=1) if g_frame else np.zeros((n2, 0))
    M = np.stack(m_frame, axis=1) if m_frame else np.zeros((n2, 0))

    # coefficient-space projectors: B^+ P B
    B = ambient.basis_matrix
    B_plus = np.linalg.pinv(B)
    projector_g = _clean(B_plus @ (G @ G.T) @ B)
    projector_m = _clean(B_plus @ (M @ M.T) @ B)

    return Splitting(
        ambient=ambient,
        sub=sub,
        complement_basis=tuple(_frozen(v.reshape(n, n)) for v in m_frame),
        projector_g=projector_g,
        projector_m=projector_m,
        g_frame=_frozen(G),
        m_frame=_frozen(M),
    )


def complement_invariance_residual(split: Splitting, elements: Sequence[np.ndarray]) -> float:
    """max ||pr_g(Ad(a) m_b)|| over the given group elements."""
    if not split.complement_basis or not len(elements):
        return 0.0
    stack = np.asarray(elements, dtype=float)
    worst = 0.0
    for m_b in split.complement_basis:
        moved = adjoint(stack, m_b)
        worst = max(worst, float(np.max(_norm(split.project_g(moved)))))
    return worst


def check_splitting_invariance(
    split: Splitting, sample_count: int = DEFAULT_RANDOM_PRODUCTS, seed: int = 0
) -> MembershipResult:
    """Sampled check that Ad(G) maps m into m."""
    samples = sample_identity_component(split.sub, sample_count, seed)
    residual = complement_invariance_residual(split, samples)
    return MembershipResult(residual <= split.tolerance, residual)


# =========================================================================
# MEMBERSHIP PREDICATES
# =========================================================================


def normaliser_residuals(a: np.ndarray, sub: LieAlgebraModel, split: Splitting) -> np.ndarray:
    """max_i ||pr_m(Ad(a) E_i)|| for a matrix or stack of matrices."""
    a = np.asarray(a, dtype=float)
    worst = np.zeros(a.shape[:-2])
    inverse = _inverse(a)
    for E in sub.basis:
        worst = np.maximum(worst, _norm(split.project_m(a @ E @ inverse)))
    return worst


def normaliser_membership(
    a: np.ndarray,
    sub: LieAlgebraModel,
    ambient_split: Splitting,
    group: Optional[GroupModel] = None,
) -> MembershipResult:
    """Algebra-level normaliser test Ad(a)(g) in g (connected-component condition)."""
    if group is not None:
        group.require(a)
    residual = float(normaliser_residuals(a, sub, ambient_split))
    return MembershipResult(residual <= ambient_split.tolerance, residual)


def centraliser_residuals(a: np.ndarray, sub: LieAlgebraModel) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    worst = np.zeros(a.shape[:-2])
    inverse = _inverse(a)
    for E in sub.basis:
        worst = np.maximum(worst, _norm(a @ E @ inverse - E))
    return worst


def centraliser_membership(
    a: np.ndarray, sub: LieAlgebraModel, group: Optional[GroupModel] = None
) -> MembershipResult:
    if group is not None:
        group.require(a)
    residual = float(centraliser_residuals(a, sub))
    return MembershipResult(residual <= sub.tolerance, residual)


def stabiliser_membership(
    g: np.ndarray, rep: RepresentationModel, tolerance: float = DEFAULT_TOLERANCE
) -> MembershipResult:
    if rep.tau0 is None:
        raise RepresentationError(f"representation {rep.name} has no tau_0")
    moved = rep.act(g, rep.tau0) - rep.tau0
    residual = float(np.linalg.norm(moved))
    return MembershipResult(residual <= tolerance, residual)


def lie_normaliser_defect(
    X: np.ndarray, split: Splitting, samples: Optional[Sequence[np.ndarray]] = None
) -> float:
    """max ||pr_m(Ad(g^{-1})X - X)|| over sampled g in G.

    Vanishes exactly when X lies in the Lie algebra of N_H(G).
    """
    if samples is None:
        samples = sample_identity_component(split.sub, count=0)
    X = np.asarray(X, dtype=float)
    stack = np.asarray(samples, dtype=float)
    moved = adjoint(_inverse(stack), X) - X
    return float(np.max(_norm(split.project_m(moved))))
