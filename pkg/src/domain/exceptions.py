from typing import Optional, Sequence


# =========================================================================
# BASE ERRORS
# Every error raised by the toolkit derives from NormalDeformationError.
# =========================================================================


class NormalDeformationError(Exception):
    """Base class for toolkit errors."""


class LieAlgebraError(NormalDeformationError, ValueError):
    """Invalid Lie algebra data (dependent basis, failed closure, size mismatch)."""


class SplittingError(NormalDeformationError, ValueError):
    """The requested splitting cannot be built."""


class GroupMembershipError(NormalDeformationError, ValueError):
    """A matrix does not belong to the expected group."""


class RepresentationError(NormalDeformationError, ValueError):
    """Representation data is missing or inconsistent."""


# =========================================================================
# EXPRESSIONS AND FIELDS
# =========================================================================


class ExpressionSyntaxError(NormalDeformationError, ValueError):
    """Raised by the expression parser; carries the offending offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(NormalDeformationError, ValueError):
    """Unknown function name or coordinate outside the chart."""

    def __init__(self, identifier: str, offset: int):
        super().__init__(f"unknown identifier '{identifier}' at offset {offset}")
        self.identifier = identifier
        self.offset = offset


class ChartError(NormalDeformationError, ValueError):
    """Invalid chart or a point outside the chart."""


class SingularFieldError(NormalDeformationError, ValueError):
    """A matrix field is singular at a sample point."""

    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.point = None if point is None else [float(v) for v in point]


class FormError(NormalDeformationError, ValueError):
    """Unsupported degree or mismatched forms."""


class FrameError(NormalDeformationError, ValueError):
    """Degenerate frame or metric."""


# =========================================================================
# DEFORMATIONS
# =========================================================================


class AdmissibilityError(NormalDeformationError, ValueError):
    """h leaves the normaliser N_H(G) somewhere on the chart."""

    def __init__(self, residual: float, point: Sequence[float], tolerance: float):
        super().__init__(
            f"h leaves the normaliser: residual {residual:.3e} > {tolerance:.1e} "
            f"at point {[round(float(v), 6) for v in point]}"
        )
        self.residual = float(residual)
        self.point = [float(v) for v in point]
        self.tolerance = tolerance


class CentraliserError(NormalDeformationError, ValueError):
    """A centraliser-only operation was given an h outside C_H(G)."""


class IncompatibleConnectionError(NormalDeformationError, ValueError):
    """A connection labelled compatible is not g-valued."""


class DeformationConsistencyError(NormalDeformationError, RuntimeError):
    """An internal identity of the deformation engine failed."""


# =========================================================================
# SCENARIOS AND REPORTS
# =========================================================================


class ScenarioError(NormalDeformationError, ValueError):
    """Scenario file is unreadable, schema-invalid or inconsistent."""


class CatalogError(NormalDeformationError, KeyError):
    """Unknown catalog name; the message lists what is available."""

    def __init__(self, kind: str, name: str, available: Sequence[str]):
        super().__init__(
            f"unknown {kind} '{name}'; available: {', '.join(sorted(available))}"
        )
        self.name = name
        self.available = list(available)

    def __str__(self) -> str:
        return self.args[0]


class ReportFormatError(NormalDeformationError, ValueError):
    """Unknown report format."""
