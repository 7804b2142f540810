import asyncio
import sys
from typing import Optional, Sequence

from .application.use_cases import BuiltinCatalogUseCase, EmitReportUseCase, RunScenarioUseCase
from .config import ConfigurationManager
from .infrastructure.services import LoggingServiceImpl
from .infrastructure.storage_service import FileReportWriter, JsonScenarioRepository
from .presentation.cli_handlers import EXIT_USAGE, CliHandlers


class NormalDeformationApp:
    def __init__(self, config_manager: Optional[ConfigurationManager] = None):
        self.config_manager = config_manager or ConfigurationManager()
        self.config = None
        self.logger = None
        self.cli_handlers = None

    def initialize(self) -> None:
        self.config = self.config_manager.get_configuration()
        self.config_manager.validate_configuration(self.config)

        self.logger = LoggingServiceImpl(self.config.log_file, self.config.log_level)
        self.logger.debug("Initializing normal deformation toolkit...")

        repository = JsonScenarioRepository(self.logger, self.config.schema_path, self.config.catalog_dir)
        writer = FileReportWriter(self.logger)

        run_scenario_use_case = RunScenarioUseCase(self.config, repository, self.logger)
        emit_report_use_case = EmitReportUseCase(writer, self.logger)
        catalog_use_case = BuiltinCatalogUseCase(repository, self.logger)

        self.cli_handlers = CliHandlers(
            run_scenario_use_case,
            emit_report_use_case,
            catalog_use_case,
            writer,
            self.logger,
        )

    # =========================================================================
    # CORE ENTRY POINT (High Priority)
    # =========================================================================

    async def run(self, argv: Sequence[str]) -> int:
        if not self.cli_handlers:
            self.initialize()

        try:
            return await self.cli_handlers.handle(argv)
        except Exception as e:
            self.logger.error(f"Unexpected error: {str(e)}")
            raise
        finally:
            self.shutdown()

    def shutdown(self) -> None:
        if self.logger:
            self.logger.debug("Toolkit shutdown complete")


async def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point; returns the process exit code."""
    app = NormalDeformationApp()
    try:
        app.initialize()
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return await app.run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
