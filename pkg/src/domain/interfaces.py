from abc import ABC, abstractmethod
from typing import List

from .entities import Report, ReportFormat, Scenario


# =========================================================================
# REPOSITORIES (Data Access Layer)
# These abstract classes define interfaces for reading scenarios.
# =========================================================================


class ScenarioRepository(ABC):
    """Abstract scenario source."""

    @abstractmethod
    async def load(self, path: str) -> Scenario:
        """Load and validate a scenario file."""
        pass

    @abstractmethod
    async def load_builtin(self, name: str) -> Scenario:
        """Load a scenario from the built-in catalog."""
        pass

    @abstractmethod
    def builtin_names(self) -> List[str]:
        """Names available in the built-in catalog."""
        pass


# =========================================================================
# SERVICES (External System Interactions)
# =========================================================================


class ReportWriter(ABC):
    """Abstract report sink."""

    @abstractmethod
    def encode(self, report: Report, fmt: ReportFormat) -> bytes:
        """Encode a report."""
        pass

    @abstractmethod
    async def write(self, payload: bytes, path: str) -> None:
        """Write encoded bytes to a path ('-' for stdout)."""
        pass


class LoggingService(ABC):
    """Abstract logging service."""

    @abstractmethod
    def info(self, message: str) -> None:
        """Log info message."""
        pass

    @abstractmethod
    def warning(self, message: str) -> None:
        """Log warning message."""
        pass

    @abstractmethod
    def error(self, message: str) -> None:
        """Log error message."""
        pass

    @abstractmethod
    def debug(self, message: str) -> None:
        """Log debug message."""
        pass
