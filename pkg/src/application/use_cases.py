import asyncio
from typing import List, Optional, Sequence, Union

from .. import __version__
from ..domain.entities import CheckName, Report, ReportFormat, Scenario, ToolkitConfiguration
from ..domain.exceptions import ScenarioError
from ..domain.interfaces import LoggingService, ReportWriter, ScenarioRepository
from .checks import CheckRunner
from .scenario_builder import ScenarioBuilder

BUILTIN_PREFIX = "builtin:"


# =========================================================================
# CORE APPLICATION USE CASES (High Priority)
# These classes orchestrate loading scenarios, running checks and reporting.
# =========================================================================


class RunScenarioUseCase:
    """Use case for running the requested checks of one scenario."""

    def __init__(
        self,
        config: ToolkitConfiguration,
        repository: ScenarioRepository,
        logger: LoggingService,
    ):
        self.config = config
        self.repository = repository
        self.logger = logger
        self.builder = ScenarioBuilder(config)

    async def load(self, path: str) -> Scenario:
        """Load a scenario file, or a catalog entry given as 'builtin:<name>'."""
        if path.startswith(BUILTIN_PREFIX):
            return await self.repository.load_builtin(path[len(BUILTIN_PREFIX):])
        return await self.repository.load(path)

    async def execute(
        self,
        path: str,
        checks: Optional[Sequence[CheckName]] = None,
        grid: Optional[int] = None,
        tolerance: Optional[float] = None,
    ) -> Report:
        """Run a scenario; parse and build errors propagate to the caller."""
        scenario = await self.load(path)
        return await self.run(scenario, checks, grid, tolerance)

    async def run(
        self,
        scenario: Scenario,
        checks: Optional[Sequence[CheckName]] = None,
        grid: Optional[int] = None,
        tolerance: Optional[float] = None,
    ) -> Report:
        tolerance = tolerance if tolerance is not None else self.config.tolerance
        self.logger.info(f"Building scenario '{scenario.name}' (digest {scenario.digest[:12]})")
        model = await asyncio.to_thread(self.builder.build, scenario, grid)

        selected = list(scenario.checks)
        if checks is not None:
            selected = [check for check in selected if check in set(checks)]
            if not selected:
                raise ScenarioError(
                    f"scenario '{scenario.name}' requests none of "
                    f"{', '.join(check.value for check in checks)}"
                )

        runner = CheckRunner(model, self.logger, tolerance)
        results = await asyncio.to_thread(runner.run, selected)
        report = Report(scenario.name, scenario.digest, __version__, results)

        failed = [r.check.value for r in results if not r.passed]
        if failed:
            self.logger.warning(f"Scenario '{scenario.name}' failed checks: {', '.join(failed)}")
        else:
            self.logger.info(f"Scenario '{scenario.name}': all {len(results)} checks passed")
        return report

    async def execute_many(self, paths: Sequence[str], **kwargs) -> List[Report]:
        """Independent scenarios run concurrently; reports keep the input order."""
        return list(await asyncio.gather(*(self.execute(path, **kwargs) for path in paths)))


class EmitReportUseCase:
    """Use case for encoding a report and writing it out."""

    def __init__(self, writer: ReportWriter, logger: LoggingService):
        self.writer = writer
        self.logger = logger

    async def execute(
        self, report: Report, fmt: Union[ReportFormat, str] = ReportFormat.JSON, output: str = "-"
    ) -> bytes:
        payload = self.writer.encode(report, fmt)
        await self.writer.write(payload, output)
        self.logger.info(f"Report for '{report.scenario}' written to {output} as {getattr(fmt, 'value', fmt)}")
        return payload


class BuiltinCatalogUseCase:
    """Use case for listing and fetching built-in scenarios."""

    def __init__(self, repository: ScenarioRepository, logger: LoggingService):
        self.repository = repository
        self.logger = logger

    def list_names(self) -> List[str]:
        return self.repository.builtin_names()

    async def execute(self, name: str) -> Scenario:
        self.logger.info(f"Loading built-in scenario '{name}'")
        return await self.repository.load_builtin(name)
