from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Union


# =========================================================================
# ENUMERATIONS (Check and Output Definitions)
# These enums define the vocabulary shared by scenario files and reports.
# =========================================================================


class CheckName(Enum):
    """Checks a scenario may request, in dependency order."""

    ADMISSIBILITY = "admissibility"
    DEFORM = "deform"
    ZETA = "zeta"
    TORSION = "torsion"
    TORSION_CHANGE = "torsion-change"
    PHI = "phi"
    INSTANTON = "instanton"
    METRIC_COMPAT = "metric-compat"
    DEFINING_SECTION = "defining-section"

    @classmethod
    def ordered(cls, names) -> List["CheckName"]:
        requested = {cls(name) if not isinstance(name, cls) else name for name in names}
        return [check for check in cls if check in requested]


class CheckStatus(Enum):
    """Outcome of a single check."""

    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


class ReportFormat(Enum):
    """Supported report encodings."""

    JSON = "json"
    CSV = "csv"


# Default tolerance per check; torsion-change mixes symbolic and numeric paths.
DEFAULT_CHECK_TOLERANCES: Dict[str, float] = {
    CheckName.ADMISSIBILITY.value: 1e-9,
    CheckName.DEFORM.value: 1e-9,
    CheckName.ZETA.value: 1e-9,
    CheckName.TORSION.value: 1e-9,
    CheckName.TORSION_CHANGE.value: 1e-8,
    CheckName.PHI.value: 1e-9,
    CheckName.INSTANTON.value: 1e-9,
    CheckName.METRIC_COMPAT.value: 1e-9,
    CheckName.DEFINING_SECTION.value: 1e-9,
}


# =========================================================================
# DATA MODELS (Entities)
# Scenario describes what to compute; Report records what came out.
# =========================================================================


AlgebraRef = Union[str, Dict[str, Any]]
FormComponents = Dict[str, List[List[str]]]


@dataclass
class ChartSpec:
    """Box chart: one [lo, hi] interval per coordinate and a per-axis grid."""

    bounds: List[List[float]]
    grid: Optional[int] = None

    def __post_init__(self):
        if not self.bounds:
            raise ValueError("chart needs at least one coordinate interval")
        for interval in self.bounds:
            if len(interval) != 2:
                raise ValueError(f"chart interval {interval} must have two ends")

    @property
    def dim(self) -> int:
        return len(self.bounds)


@dataclass
class RepresentationSpec:
    name: str
    tau0: List[Any]


@dataclass
class GaugeSpec:
    """Gauge algebra of the bundle B plus a connection or field strength on it."""

    algebra: AlgebraRef
    connection: Optional[FormComponents] = None
    field_strength: Optional[FormComponents] = None

    def __post_init__(self):
        if (self.connection is None) == (self.field_strength is None):
            raise ValueError("gauge block needs exactly one of connection or field_strength")


@dataclass
class Scenario:
    """Declarative description of a normal deformation and the checks to run on it."""

    name: str
    chart: ChartSpec
    ambient: AlgebraRef
    structure: AlgebraRef
    h: List[List[str]]
    checks: List[CheckName]
    description: str = ""
    h_group: Optional[str] = None
    connection: Optional[FormComponents] = None
    reference_connection: Optional[FormComponents] = None
    deformed_reference_connection: Optional[FormComponents] = None
    frame: Optional[List[List[str]]] = None
    representation: Optional[RepresentationSpec] = None
    gauge: Optional[GaugeSpec] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    digest: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValueError("scenario name is required")
        if not self.checks:
            raise ValueError("scenario must request at least one check")
        self.checks = CheckName.ordered(self.checks)
        for key in self.tolerances:
            if key not in DEFAULT_CHECK_TOLERANCES:
                raise ValueError(f"tolerance override for unknown check '{key}'")
        if self.frame is not None and len(self.frame) != self.chart.dim:
            raise ValueError("frame must be a d x d matrix on a d-dimensional chart")

    def tolerance_for(self, check: CheckName, override: Optional[float] = None) -> float:
        if override is not None:
            return override
        return self.tolerances.get(check.value, DEFAULT_CHECK_TOLERANCES[check.value])


@dataclass
class CheckResult:
    """Result of one check; status pass iff residual <= tolerance."""

    check: CheckName
    status: CheckStatus
    residual: Optional[float] = None
    point: Optional[List[float]] = None
    elapsed_ms: float = 0.0
    tolerance: Optional[float] = None
    message: str = ""
    table: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_residual(cls, check: CheckName, residual: float, tolerance: float, **kwargs) -> "CheckResult":
        status = CheckStatus.PASS if residual <= tolerance else CheckStatus.FAIL
        return cls(check, status, float(residual), tolerance=tolerance, **kwargs)

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASS


@dataclass
class Report:
    """Structured outcome of running a scenario."""

    scenario: str
    digest: str
    version: str
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 2

    def result_for(self, check: CheckName) -> Optional[CheckResult]:
        for result in self.results:
            if result.check is check:
                return result
        return None


@dataclass
class ToolkitConfiguration:
    """Runtime configuration entity."""

    grid: int = 5
    random_points: int = 32
    seed: int = 0
    tolerance: Optional[float] = None
    log_level: str = "WARNING"
    log_file: Optional[str] = "logs/normal_deformations.log"
    schema_path: str = "data/scenario.schema.json"
    catalog_dir: str = "data/scenarios"
