"""Charts, matrix-valued fields and Lie-algebra-valued forms.

A form stores one symbolic n x n coefficient matrix per increasing multi-index
(0-based). Every pointwise contract is checked on `Chart.sample_points()`: the
full grid plus a fixed set of random interior points.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .exceptions import ChartError, FormError, GroupMembershipError, SingularFieldError
from .expressions import (
    ScalarExpression,
    compile_expressions,
    coordinate_symbols,
    parse_expression,
    print_expression,
)
from .liealg import GroupModel, LieAlgebraModel, MembershipResult, PROJECTOR_CLEANUP

DEFAULT_RANDOM_POINTS = 32
SINGULAR_DETERMINANT = 1e-12
MAX_DEGREE = 2
ADJUGATE_MAX_SIZE = 4


# =========================================================================
# CHART
# =========================================================================


@dataclass(frozen=True)
class Chart:
    """A box U in R^d with an evaluation grid."""

    dim: int
    bounds: Tuple[Tuple[float, float], ...]
    grid: Tuple[int, ...]
    random_points: int = DEFAULT_RANDOM_POINTS
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ChartError("chart dimension must be positive")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        grid = tuple(int(n) for n in self.grid)
        if len(bounds) != self.dim or len(grid) != self.dim:
            raise ChartError(
                f"chart of dimension {self.dim} needs {self.dim} bounds and grid counts"
            )
        for axis, (lo, hi) in enumerate(bounds, start=1):
            if not lo < hi:
                raise ChartError(f"empty interval [{lo}, {hi}] on axis {axis}")
        if any(n < 2 for n in grid):
            raise ChartError("grid counts must be at least 2 per axis")
        if self.random_points < 0:
            raise ChartError("random point count must be non-negative")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def box(cls, bounds: Sequence[Sequence[float]], grid: int, **kwargs) -> "Chart":
        bounds = tuple(tuple(b) for b in bounds)
        return cls(len(bounds), bounds, (grid,) * len(bounds), **kwargs)

    def with_grid(self, grid: int) -> "Chart":
        return Chart(self.dim, self.bounds, (grid,) * self.dim, self.random_points, self.seed)

    @cached_property
    def grid_points(self) -> np.ndarray:
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.bounds, self.grid)]
        return np.array(list(product(*axes)), dtype=float).reshape(-1, self.dim)

    @cached_property
    def random_interior_points(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        u = rng.uniform(0.05, 0.95, size=(self.random_points, self.dim))
        return lo + u * (hi - lo)

    @cached_property
    def sample_points(self) -> np.ndarray:
        """Grid plus random interior points; the set on which 'holds on U' is decided."""
        return np.vstack([self.grid_points, self.random_interior_points])

    @cached_property
    def interior_grid_points(self) -> np.ndarray:
        points = self.grid_points
        mask = np.ones(len(points), dtype=bool)
        for axis, (lo, hi) in enumerate(self.bounds):
            mask &= (points[:, axis] > lo) & (points[:, axis] < hi)
        return points[mask]

    def contains(self, point: Sequence[float]) -> bool:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            return False
        return all(lo <= v <= hi for v, (lo, hi) in zip(point, self.bounds))


# =========================================================================
# MATRIX AND GROUP-VALUED FIELDS
# =========================================================================


def _as_matrix(entries) -> sp.ImmutableMatrix:
    return sp.ImmutableMatrix(entries)


@lru_cache(maxsize=4096)
def _exact(value: float) -> sp.Expr:
    """Short rational for numeric map entries such as 0.5 or 1/3."""
    if abs(value) < PROJECTOR_CLEANUP:
        return sp.Integer(0)
    rational = sp.nsimplify(value, rational=True, tolerance=1e-13)
    if rational.q <= 10**6 and abs(float(rational) - value) <= 1e-13 * max(1.0, abs(value)):
        return rational
    return sp.Float(value)


def exact_matrix(array: np.ndarray) -> sp.ImmutableMatrix:
    array = np.asarray(array, dtype=float)
    return sp.ImmutableMatrix(array.shape[0], array.shape[1], [_exact(float(v)) for v in array.ravel()])


@dataclass(frozen=True, eq=False)
class MatrixField:
    """A rows x cols matrix of scalar expressions over a chart."""

    chart: Chart
    matrix: sp.ImmutableMatrix

    def __post_init__(self):
        matrix = _as_matrix(self.matrix)
        allowed = set(coordinate_symbols(self.chart.dim))
        stray = matrix.free_symbols - allowed
        if stray:
            raise ChartError(f"field uses symbols outside the chart: {sorted(map(str, stray))}")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_strings(cls, chart: Chart, rows: Sequence[Sequence[str]]) -> "MatrixField":
        width = {len(row) for row in rows}
        if len(width) != 1:
            raise ChartError("matrix field rows have different lengths")
        parsed = [[parse_expression(str(text), chart).expr for text in row] for row in rows]
        return cls(chart, _as_matrix(parsed))

    @classmethod
    def constant(cls, chart: Chart, array: np.ndarray) -> "MatrixField":
        return cls(chart, exact_matrix(np.atleast_2d(array)))

    @classmethod
    def scalar_identity(cls, chart: Chart, phi: ScalarExpression, n: int) -> "MatrixField":
        return cls(chart, _as_matrix(phi.expr * sp.eye(n)))

    @property
    def rows(self) -> int:
        return self.matrix.rows

    @property
    def cols(self) -> int:
        return self.matrix.cols

    @cached_property
    def _evaluator(self) -> Callable:
        return compile_expressions(tuple(self.matrix), self.chart.dim)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at points (N, d) as an array (N, rows, cols)."""
        values = self._evaluator(points)
        return values.reshape(-1, self.rows, self.cols)

    def at(self, point: Sequence[float]) -> np.ndarray:
        return self.evaluate(np.asarray(point, dtype=float)[None, :])[0]

    def derivative(self, i: int) -> "MatrixField":
        """Exact partial derivative with respect to x_i (1-based)."""
        if not 1 <= i <= self.chart.dim:
            raise ChartError(f"coordinate index {i} outside 1..{self.chart.dim}")
        symbol = coordinate_symbols(self.chart.dim)[i - 1]
        return MatrixField(self.chart, self.matrix.diff(symbol))

    def require_finite(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        points = self.chart.sample_points if points is None else points
        values = self.evaluate(points)
        bad = ~np.all(np.isfinite(values), axis=(1, 2))
        if np.any(bad):
            point = points[int(np.argmax(bad))]
            raise SingularFieldError(f"field is not finite at {point.tolist()}", point)
        return values

    @property
    def is_constant(self) -> bool:
        return not self.matrix.free_symbols

    def scalar_factor(self) -> Optional[sp.Expr]:
        """phi when the field is syntactically phi * identity, else None."""
        if self.rows != self.cols:
            return None
        phi = self.matrix[0, 0]
        for i in range(self.rows):
            for j in range(self.cols):
                expected = phi if i == j else 0
                if self.matrix[i, j] != expected:
                    return None
        return phi

    @property
    def is_diagonal(self) -> bool:
        return self.matrix.is_diagonal()

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        return MatrixField(self.chart, _as_matrix(self.matrix * other.matrix))

    def __str__(self) -> str:
        rows = ["[" + ", ".join(print_expression(e) for e in self.matrix.row(i)) + "]"
                for i in range(self.rows)]
        return "[" + ", ".join(rows) + "]"


def symbolic_inverse(matrix: sp.ImmutableMatrix, orthogonal: bool = False) -> sp.ImmutableMatrix:
    """Inverse of an expression matrix.

    Orthogonal fields invert by transposition, diagonal fields entrywise,
    sizes up to 4 by adjugate over determinant and larger ones by sympy's LU.
    """
    if orthogonal:
        return _as_matrix(matrix.T)
    if matrix.is_diagonal():
        return _as_matrix(sp.diag(*[1 / matrix[i, i] for i in range(matrix.rows)]))
    if matrix.rows <= ADJUGATE_MAX_SIZE:
        return _as_matrix(matrix.adjugate() / matrix.det())
    return _as_matrix(matrix.inv(method="LU"))


@dataclass(frozen=True, eq=False)
class GroupValuedField:
    """h: U -> H, validated against the group at the chart's sample points."""

    field: MatrixField
    group: GroupModel

    def __post_init__(self):
        if (self.field.rows, self.field.cols) != (self.group.matrix_size,) * 2:
            raise GroupMembershipError(
                f"field of shape {self.field.rows}x{self.field.cols} cannot take values "
                f"in {self.group.name}"
            )

    @classmethod
    def from_strings(cls, chart: Chart, rows, group: GroupModel) -> "GroupValuedField":
        return cls(MatrixField.from_strings(chart, rows), group)

    @classmethod
    def identity(cls, chart: Chart, group: GroupModel) -> "GroupValuedField":
        return cls(MatrixField.constant(chart, np.eye(group.matrix_size)), group)

    @property
    def chart(self) -> Chart:
        return self.field.chart

    @property
    def matrix(self) -> sp.ImmutableMatrix:
        return self.field.matrix

    @property
    def matrix_size(self) -> int:
        return self.group.matrix_size

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.field.evaluate(points)

    def at(self, point: Sequence[float]) -> np.ndarray:
        return self.field.at(point)

    @cached_property
    def inverse_matrix(self) -> sp.ImmutableMatrix:
        return symbolic_inverse(self.matrix, self.group.is_orthogonal)

    def inverse(self) -> "GroupValuedField":
        """Pointwise inverse h^{-1}."""
        return GroupValuedField(MatrixField(self.chart, self.inverse_matrix), self.group)

    def __matmul__(self, other: "GroupValuedField") -> "GroupValuedField":
        """Pointwise product (h1 h2)(x) = h1(x) h2(x)."""
        return GroupValuedField(self.field @ other.field, self.group)

    def require_invertible(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        points = self.chart.sample_points if points is None else points
        values = self.field.require_finite(points)
        determinants = np.abs(np.linalg.det(values))
        singular = determinants <= SINGULAR_DETERMINANT
        if np.any(singular):
            point = points[int(np.argmax(singular))]
            raise SingularFieldError(f"h is singular at {point.tolist()}", point)
        return values


def validate_group_field(h: GroupValuedField) -> MembershipResult:
    """Membership residual of h at every sample point of its chart."""
    points = h.chart.sample_points
    try:
        values = h.require_invertible(points)
    except SingularFieldError:
        return MembershipResult(False, float("inf"))
    residuals = np.atleast_1d(h.group.membership_residual(values))
    worst = float(np.max(residuals))
    return MembershipResult(worst <= h.group.tolerance, worst)


# =========================================================================
# LIE-ALGEBRA-VALUED FORMS
# =========================================================================


def form_indices(dim: int, degree: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(combinations(range(dim), degree))


def _canonical(indices: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """Sign and sorted tuple for an arbitrary multi-index (0 sign on repeats)."""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        return 0, tuple(sorted(indices))
    sign = 1
    for i in range(len(indices)):
        for j in range(len(indices) - 1 - i):
            if indices[j] > indices[j + 1]:
                indices[j], indices[j + 1] = indices[j + 1], indices[j]
                sign = -sign
    return sign, tuple(indices)


@dataclass(frozen=True, eq=False)
class LieValuedForm:
    """A degree-k form sum over i1<..<ik of C_I dx^{i1}^...^dx^{ik}, C_I an n x n matrix.

    `from_strings` and `constant` reject coefficients outside `value_algebra`;
    algebraic operations inherit membership from their operands.
    """

    chart: Chart
    degree: int
    matrix_size: int
    components: Mapping[Tuple[int, ...], sp.ImmutableMatrix]
    value_algebra: Optional[LieAlgebraModel] = None

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise FormError(f"forms of degree {self.degree} are not supported")
        if self.value_algebra is not None and self.value_algebra.matrix_size != self.matrix_size:
            raise FormError("value algebra and coefficient sizes differ")
        zero = sp.ImmutableMatrix.zeros(self.matrix_size, self.matrix_size)
        canonical: Dict[Tuple[int, ...], sp.ImmutableMatrix] = {
            index: zero for index in form_indices(self.chart.dim, self.degree)
        }
        for raw_index, coefficient in self.components.items():
            sign, index = _canonical(raw_index)
            if index not in canonical:
                raise FormError(f"index {raw_index} is not valid for this chart and degree")
            if sign == 0:
                continue
            matrix = _as_matrix(coefficient)
            if matrix.shape != (self.matrix_size, self.matrix_size):
                raise FormError(f"coefficient of shape {matrix.shape} for index {raw_index}")
            canonical[index] = _as_matrix(canonical[index] + sign * matrix)
        object.__setattr__(self, "components", canonical)

    # ---------------------------------------------------------------------
    # construction
    # ---------------------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart, degree: int, matrix_size: int,
             value_algebra: Optional[LieAlgebraModel] = None) -> "LieValuedForm":
        return cls(chart, degree, matrix_size, {}, value_algebra)

    @classmethod
    def from_strings(cls, chart: Chart, degree: int, components: Mapping, value_algebra=None,
                     matrix_size: Optional[int] = None) -> "LieValuedForm":
        """Components keyed by 1-based coordinate indices, e.g. {(1,): rows, (1, 2): rows}."""
        parsed = {}
        for key, rows in components.items():
            index = (key,) if isinstance(key, int) else tuple(key)
            if len(index) != degree or not all(1 <= i <= chart.dim for i in index):
                raise FormError(f"component index {key} does not fit a {degree}-form on R^{chart.dim}")
            parsed[tuple(i - 1 for i in index)] = MatrixField.from_strings(chart, rows).matrix
        if matrix_size is None:
            if value_algebra is not None:
                matrix_size = value_algebra.matrix_size
            elif parsed:
                matrix_size = next(iter(parsed.values())).rows
            else:
                raise FormError("cannot infer the coefficient size of an empty form")
        return cls(chart, degree, matrix_size, parsed, value_algebra).require_values_in_algebra()

    @classmethod
    def constant(cls, chart: Chart, degree: int, arrays: Mapping[Tuple[int, ...], np.ndarray],
                 value_algebra=None) -> "LieValuedForm":
        components = {index: exact_matrix(array) for index, array in arrays.items()}
        size = next(iter(arrays.values())).shape[0] if arrays else value_algebra.matrix_size
        return cls(chart, degree, size, components, value_algebra).require_values_in_algebra()

    # ---------------------------------------------------------------------
    # access
    # ---------------------------------------------------------------------

    @property
    def indices(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.components.keys())

    def coefficient(self, *indices: int) -> sp.ImmutableMatrix:
        """Coefficient for an arbitrary (0-based) multi-index, with antisymmetry applied."""
        sign, index = _canonical(indices)
        if sign == 0:
            return sp.ImmutableMatrix.zeros(self.matrix_size, self.matrix_size)
        return _as_matrix(sign * self.components[index])

    @cached_property
    def _evaluator(self) -> Callable:
        flat = tuple(entry for index in self.indices for entry in self.components[index])
        return compile_expressions(flat, self.chart.dim)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Array (N, C, n, n); C runs over `indices` in order."""
        n = self.matrix_size
        values = self._evaluator(points)
        return values.reshape(values.shape[0], len(self.indices), n, n)

    def dense(self, points: np.ndarray) -> np.ndarray:
        """Full antisymmetric component array: (N, n, n) for 0-forms, (N, d, n, n)
        for 1-forms and (N, d, d, n, n) for 2-forms."""
        values = self.evaluate(points)
        count, n, d = values.shape[0], self.matrix_size, self.chart.dim
        if self.degree == 0:
            return values[:, 0]
        if self.degree == 1:
            return values
        full = np.zeros((count, d, d, n, n))
        for c, (i, j) in enumerate(self.indices):
            full[:, i, j] = values[:, c]
            full[:, j, i] = -values[:, c]
        return full

    @property
    def is_zero(self) -> bool:
        return all(matrix.is_zero_matrix for matrix in self.components.values())

    def value_residual(self, algebra: Optional[LieAlgebraModel] = None,
                       points: Optional[np.ndarray] = None) -> float:
        """Worst distance of a coefficient from span(algebra) at sample points."""
        algebra = algebra or self.value_algebra
        if algebra is None:
            return 0.0
        points = self.chart.sample_points if points is None else points
        values = self.evaluate(points)
        if values.size == 0:
            return 0.0
        return float(np.max(algebra.span_residual(values)))

    def require_values_in_algebra(self) -> "LieValuedForm":
        if self.value_algebra is None:
            return self
        residual = self.value_residual()
        if residual > self.value_algebra.tolerance:
            raise FormError(
                f"coefficients leave {self.value_algebra.name} (residual {residual:.3e})"
            )
        return self

    # ---------------------------------------------------------------------
    # algebra
    # ---------------------------------------------------------------------

    def _check_compatible(self, other: "LieValuedForm") -> None:
        if (self.chart != other.chart or self.degree != other.degree
                or self.matrix_size != other.matrix_size):
            raise FormError("forms live on different charts, degrees or matrix sizes")

    def map(self, transform: Callable[[sp.ImmutableMatrix], sp.Matrix],
            value_algebra: Optional[LieAlgebraModel] = None) -> "LieValuedForm":
        """Apply a coefficient-wise map that is linear over functions."""
        components = {index: _as_matrix(transform(C)) for index, C in self.components.items()}
        size = next(iter(components.values())).rows if components else self.matrix_size
        return LieValuedForm(self.chart, self.degree, size, components, value_algebra)

    def conjugate(self, left: sp.Matrix, right: sp.Matrix,
                  value_algebra: Optional[LieAlgebraModel] = None) -> "LieValuedForm":
        """left * C_I * right for each coefficient."""
        return self.map(lambda C: left * C * right, value_algebra)

    def apply_linear_map(self, matrix_map: np.ndarray,
                         value_algebra: Optional[LieAlgebraModel] = None) -> "LieValuedForm":
        """Apply an n^2 x n^2 map on row-major vectorised coefficients (e.g. pr_g, pr_m)."""
        return self.map(lambda C: apply_linear_map(C, matrix_map), value_algebra)

    def with_value_algebra(self, value_algebra: Optional[LieAlgebraModel]) -> "LieValuedForm":
        return LieValuedForm(self.chart, self.degree, self.matrix_size,
                             dict(self.components), value_algebra)

    def _combine(self, other: "LieValuedForm", sign: int) -> "LieValuedForm":
        self._check_compatible(other)
        algebra = self.value_algebra if self.value_algebra is other.value_algebra else None
        components = {
            index: _as_matrix(self.components[index] + sign * other.components[index])
            for index in self.indices
        }
        return LieValuedForm(self.chart, self.degree, self.matrix_size, components, algebra)

    def __add__(self, other: "LieValuedForm") -> "LieValuedForm":
        return self._combine(other, 1)

    def __sub__(self, other: "LieValuedForm") -> "LieValuedForm":
        return self._combine(other, -1)

    def __neg__(self) -> "LieValuedForm":
        return self.map(lambda C: -C, self.value_algebra)

    def scale(self, factor) -> "LieValuedForm":
        return self.map(lambda C: factor * C, self.value_algebra)

    def max_difference(self, other: "LieValuedForm", points: Optional[np.ndarray] = None) -> float:
        """Worst componentwise Frobenius distance at sample points."""
        self._check_compatible(other)
        points = self.chart.sample_points if points is None else points
        delta = (self - other).evaluate(points)
        if delta.size == 0:
            return 0.0
        return float(np.max(np.sqrt(np.sum(delta * delta, axis=(-2, -1)))))

    def max_norm(self, points: Optional[np.ndarray] = None) -> float:
        points = self.chart.sample_points if points is None else points
        values = self.evaluate(points)
        if values.size == 0:
            return 0.0
        return float(np.max(np.sqrt(np.sum(values * values, axis=(-2, -1)))))


def apply_linear_map(matrix: sp.Matrix, matrix_map: np.ndarray) -> sp.ImmutableMatrix:
    n = matrix.rows
    flat = list(matrix)
    rows = []
    for r in range(n * n):
        row = matrix_map[r]
        terms = [_exact(float(w)) * flat[c] for c, w in enumerate(row)
                 if abs(w) >= PROJECTOR_CLEANUP and flat[c] != 0]
        rows.append(sp.Add(*terms))
    return sp.ImmutableMatrix(n, n, rows)


# =========================================================================
# EXTERIOR CALCULUS
# =========================================================================


def maurer_cartan_pullback(h: GroupValuedField) -> LieValuedForm:
    """h*mu_H with components h^{-1} dh/dx_i."""
    h.require_invertible()
    inverse = h.inverse_matrix
    components = {
        (i,): inverse * h.field.derivative(i + 1).matrix for i in range(h.chart.dim)
    }
    return LieValuedForm(h.chart, 1, h.matrix_size, components, h.group.algebra)


def exterior_derivative(omega: LieValuedForm) -> LieValuedForm:
    """d on 0- and 1-forms: (d f)_i = d_i f, (d w)_ij = d_i w_j - d_j w_i."""
    if omega.degree > 1:
        raise FormError(f"exterior derivative of a {omega.degree}-form is not supported")
    symbols = coordinate_symbols(omega.chart.dim)
    if omega.degree == 0:
        f = omega.components[()]
        components = {(i,): f.diff(symbols[i]) for i in range(omega.chart.dim)}
    else:
        components = {
            (i, j): omega.components[(j,)].diff(symbols[i]) - omega.components[(i,)].diff(symbols[j])
            for i, j in form_indices(omega.chart.dim, 2)
        }
    return LieValuedForm(omega.chart, omega.degree + 1, omega.matrix_size, components,
                         omega.value_algebra)


def wedge_bracket(alpha: LieValuedForm, beta: LieValuedForm) -> LieValuedForm:
    """(alpha ^ beta)_ij = alpha_i beta_j - alpha_j beta_i (matrix products)."""
    if alpha.degree != 1 or beta.degree != 1:
        raise FormError("wedge_bracket expects two 1-forms")
    if alpha.chart != beta.chart or alpha.matrix_size != beta.matrix_size:
        raise FormError("wedge_bracket of forms on different charts or matrix sizes")
    components = {
        (i, j): alpha.components[(i,)] * beta.components[(j,)]
        - alpha.components[(j,)] * beta.components[(i,)]
        for i, j in form_indices(alpha.chart.dim, 2)
    }
    algebra = alpha.value_algebra if alpha is beta else None
    return LieValuedForm(alpha.chart, 2, alpha.matrix_size, components, algebra)


def field_strength(A: LieValuedForm) -> LieValuedForm:
    """F = dA + A ^ A."""
    if A.degree != 1:
        raise FormError("field strength needs a connection 1-form")
    F = exterior_derivative(A) + wedge_bracket(A, A).with_value_algebra(A.value_algebra)
    return F.with_value_algebra(A.value_algebra)
