"""CLI subcommands: check, deform, zeta, torsion, instanton, catalog."""

import argparse
import json
from typing import Dict, List, Optional, Sequence

from ..application.use_cases import BuiltinCatalogUseCase, EmitReportUseCase, RunScenarioUseCase
from ..domain.entities import CheckName, ReportFormat
from ..domain.exceptions import CatalogError, NormalDeformationError, ScenarioError
from ..domain.interfaces import LoggingService, ReportWriter
from ..infrastructure.storage_service import scenario_to_document

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2

# Checks selected by each scenario subcommand; None runs everything requested.
SUBCOMMAND_CHECKS: Dict[str, Optional[List[CheckName]]] = {
    "check": None,
    "deform": [CheckName.ADMISSIBILITY, CheckName.DEFORM],
    "zeta": [CheckName.ADMISSIBILITY, CheckName.ZETA],
    "torsion": [CheckName.ADMISSIBILITY, CheckName.TORSION, CheckName.TORSION_CHANGE],
    "instanton": [CheckName.ADMISSIBILITY, CheckName.PHI, CheckName.INSTANTON],
}


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; failed checks own that code here."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {value}")
    return number


def _grid(value: str) -> int:
    number = int(value)
    if number < 2 or number > 64:
        raise argparse.ArgumentTypeError(f"grid must be between 2 and 64, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ndef", description="Normal deformations of G-structures on local data.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    for command, checks in SUBCOMMAND_CHECKS.items():
        selected = "all requested checks" if checks is None else ", ".join(c.value for c in checks)
        cmd = sub.add_parser(command, help=f"Run {selected} of a scenario")
        cmd.add_argument("scenario", help="Scenario JSON file, or builtin:<name>")
        cmd.add_argument("--tol", type=_positive_float, default=None, help="Global tolerance override")
        cmd.add_argument("--grid", type=_grid, default=None, help="Per-axis grid override")
        cmd.add_argument("--format", choices=[f.value for f in ReportFormat], default=ReportFormat.JSON.value)
        cmd.add_argument("--output", default="-", help="Report path (default stdout)")

    catalog_cmd = sub.add_parser("catalog", help="List built-in scenarios or print one")
    catalog_cmd.add_argument("name", nargs="?", default=None)
    catalog_cmd.add_argument("--output", default="-")
    return parser


class CliHandlers:
    """Command handlers; each returns a process exit code."""

    def __init__(
        self,
        run_scenario_use_case: RunScenarioUseCase,
        emit_report_use_case: EmitReportUseCase,
        catalog_use_case: BuiltinCatalogUseCase,
        writer: ReportWriter,
        logger: LoggingService,
    ):
        self.run_scenario_use_case = run_scenario_use_case
        self.emit_report_use_case = emit_report_use_case
        self.catalog_use_case = catalog_use_case
        self.writer = writer
        self.logger = logger
        self.parser = build_parser()

    # =========================================================================
    # CORE COMMAND HANDLERS (High Priority)
    # =========================================================================

    async def handle(self, argv: Sequence[str]) -> int:
        try:
            args = self.parser.parse_args(list(argv))
        except UsageError as e:
            self.logger.error(str(e))
            return EXIT_USAGE

        try:
            if args.command == "catalog":
                return await self.catalog_command(args)
            return await self.scenario_command(args)
        except (ScenarioError, CatalogError) as e:
            self.logger.error(f"Cannot run '{args.command}': {e}")
            return EXIT_USAGE
        except NormalDeformationError as e:
            self.logger.error(f"'{args.command}' stopped: {e}")
            return EXIT_USAGE

    async def scenario_command(self, args: argparse.Namespace) -> int:
        report = await self.run_scenario_use_case.execute(
            args.scenario,
            checks=SUBCOMMAND_CHECKS[args.command],
            grid=args.grid,
            tolerance=args.tol,
        )
        await self.emit_report_use_case.execute(report, args.format, args.output)
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED

    async def catalog_command(self, args: argparse.Namespace) -> int:
        if args.name is None:
            payload = "\n".join(self.catalog_use_case.list_names()) + "\n"
        else:
            scenario = await self.catalog_use_case.execute(args.name)
            payload = json.dumps(scenario_to_document(scenario), sort_keys=True, indent=2) + "\n"
        await self.writer.write(payload.encode("utf-8"), args.output)
        return EXIT_OK
