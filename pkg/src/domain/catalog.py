"""Named algebras, groups and representations used by scenario files."""

import re
from functools import lru_cache
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import CatalogError
from .liealg import (
    CommutesWith,
    FixesVectors,
    GroupModel,
    IdentityOnly,
    Invertibility,
    LieAlgebraModel,
    Orthogonality,
    RepresentationModel,
    UnitDeterminant,
)

MAX_DIMENSION = 8

FIXED_NAMES = (
    "su2_plus_in_so4",
    "su2_minus_in_so4",
    "u1_in_so2",
    "so2_in_so3",
    "trivial",
)
SIZED_NAME = re.compile(r"^(so|gl|trivial)\((\d+)\)$")
REPRESENTATIONS = ("standard", "two_forms")


# =========================================================================
# GENERATORS
# =========================================================================


def so_generator(n: int, a: int, b: int) -> np.ndarray:
    """L_ab = E_ab - E_ba with 1-based indices."""
    L = np.zeros((n, n))
    L[a - 1, b - 1] = 1.0
    L[b - 1, a - 1] = -1.0
    return L


def so_basis(n: int) -> List[np.ndarray]:
    return [so_generator(n, a, b) for a, b in combinations(range(1, n + 1), 2)]


def gl_basis(n: int) -> List[np.ndarray]:
    basis = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            basis.append(E)
    return basis


def su2_basis(sign: int) -> List[np.ndarray]:
    """Self-dual (sign=+1) or anti-self-dual (sign=-1) 't Hooft generators in so(4)."""
    L = lambda a, b: so_generator(4, a, b)
    return [
        L(1, 2) + sign * L(3, 4),
        L(1, 3) - sign * L(2, 4),
        L(1, 4) + sign * L(2, 3),
    ]


# =========================================================================
# ALGEBRAS AND GROUPS BY NAME
# =========================================================================


def available_algebras() -> List[str]:
    sized = [f"so({n})" for n in range(2, MAX_DIMENSION + 1)]
    sized += [f"gl({n})" for n in range(1, MAX_DIMENSION + 1)]
    sized += [f"trivial({n})" for n in range(1, MAX_DIMENSION + 1)]
    return list(FIXED_NAMES) + sized


def _resolve(name: str, matrix_size: Optional[int]) -> Tuple[str, int]:
    key = name.replace(" ", "")
    if key == "trivial":
        if matrix_size is None:
            raise CatalogError("algebra", name + " (needs a matrix size)", available_algebras())
        return "trivial", matrix_size
    match = SIZED_NAME.match(key)
    if match:
        n = int(match.group(2))
        if n < 1 or n > MAX_DIMENSION or (match.group(1) == "so" and n < 2):
            raise CatalogError("algebra", name, available_algebras())
        return match.group(1), n
    sizes = {"su2_plus_in_so4": 4, "su2_minus_in_so4": 4, "u1_in_so2": 2, "so2_in_so3": 3}
    if key in sizes:
        return key, sizes[key]
    raise CatalogError("algebra", name, available_algebras())


@lru_cache(maxsize=None)
def lie_algebra(name: str, matrix_size: Optional[int] = None) -> LieAlgebraModel:
    kind, n = _resolve(name, matrix_size)
    if kind == "so":
        return LieAlgebraModel(f"so({n})", n, tuple(so_basis(n)))
    if kind == "gl":
        return LieAlgebraModel(f"gl({n})", n, tuple(gl_basis(n)))
    if kind == "trivial":
        return LieAlgebraModel(f"trivial({n})", n, ())
    if kind == "su2_plus_in_so4":
        return LieAlgebraModel(kind, 4, tuple(su2_basis(+1)))
    if kind == "su2_minus_in_so4":
        return LieAlgebraModel(kind, 4, tuple(su2_basis(-1)))
    if kind == "u1_in_so2":
        return LieAlgebraModel(kind, 2, (so_generator(2, 1, 2),))
    return LieAlgebraModel(kind, 3, (so_generator(3, 1, 2),))


@lru_cache(maxsize=None)
def group_model(name: str, matrix_size: Optional[int] = None) -> GroupModel:
    """The connected matrix group whose Lie algebra carries the same name."""
    algebra = lie_algebra(name, matrix_size)
    kind, n = _resolve(name, matrix_size)
    special_orthogonal = (Orthogonality(), UnitDeterminant())
    if kind == "gl":
        constraints = (Invertibility(),)
    elif kind == "trivial":
        constraints = (IdentityOnly(),)
    elif kind == "su2_plus_in_so4":
        constraints = special_orthogonal + (CommutesWith(tuple(su2_basis(-1))),)
    elif kind == "su2_minus_in_so4":
        constraints = special_orthogonal + (CommutesWith(tuple(su2_basis(+1))),)
    elif kind == "so2_in_so3":
        constraints = special_orthogonal + (FixesVectors((np.array([0.0, 0.0, 1.0]),)),)
    else:
        constraints = special_orthogonal
    group_name = algebra.name.upper() if kind in ("so", "gl") else algebra.name
    return GroupModel(group_name, n, algebra, constraints)


# =========================================================================
# REPRESENTATIONS
# =========================================================================


def two_form_vector(omega: np.ndarray) -> np.ndarray:
    """Coordinates of an antisymmetric matrix in the basis L_ab, a < b."""
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[-1]
    return np.array([omega[a, b] for a, b in combinations(range(n), 2)])


def two_form_matrix(vector: np.ndarray, n: int) -> np.ndarray:
    omega = np.zeros((n, n))
    for value, (a, b) in zip(np.asarray(vector, dtype=float), combinations(range(n), 2)):
        omega[a, b] = value
        omega[b, a] = -value
    return omega


def representation(
    name: str, matrix_size: int, tau0: Optional[np.ndarray] = None
) -> RepresentationModel:
    """`standard`: rho(a) = a; `two_forms`: rho(a) omega = a omega a^T."""
    if name == "standard":
        return RepresentationModel("standard", matrix_size, lambda a: a, tau0)
    if name == "two_forms":
        basis = so_basis(matrix_size)

        def matrix_for(a: np.ndarray) -> np.ndarray:
            return np.stack([two_form_vector(a @ L @ a.T) for L in basis], axis=1)

        if tau0 is not None and np.ndim(tau0) == 2:
            tau0 = two_form_vector(tau0)
        return RepresentationModel("two_forms", len(basis), matrix_for, tau0)
    raise CatalogError("representation", name, REPRESENTATIONS)
