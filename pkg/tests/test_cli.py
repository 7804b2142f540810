import asyncio
import json

import pytest

from src.application.use_cases import BuiltinCatalogUseCase, EmitReportUseCase, RunScenarioUseCase
from src.domain.entities import ToolkitConfiguration
from src.infrastructure.report_serializer import CSV_HEADER, decode_json
from src.infrastructure.storage_service import FileReportWriter, JsonScenarioRepository
from src.main import main
from src.presentation.cli_handlers import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    SUBCOMMAND_CHECKS,
    CliHandlers,
    build_parser,
)

from .conftest import CATALOG_DIR, SCHEMA_PATH


@pytest.fixture
def handlers(logger):
    config = ToolkitConfiguration(grid=3, random_points=4, log_file=None,
                                  schema_path=SCHEMA_PATH, catalog_dir=CATALOG_DIR)
    repository = JsonScenarioRepository(logger, SCHEMA_PATH, CATALOG_DIR)
    writer = FileReportWriter(logger)
    return CliHandlers(
        RunScenarioUseCase(config, repository, logger),
        EmitReportUseCase(writer, logger),
        BuiltinCatalogUseCase(repository, logger),
        writer,
        logger,
    )


def cli(handlers, *argv):
    return asyncio.run(handlers.handle(list(argv)))


def test_parser_knows_every_subcommand():
    parser = build_parser()
    for command in SUBCOMMAND_CHECKS:
        args = parser.parse_args([command, "builtin:trivial_frame"])
        assert args.format == "json" and args.output == "-"
    assert parser.parse_args(["catalog"]).name is None


def test_passing_scenario_writes_json_report(handlers, tmp_path):
    output = tmp_path / "reports" / "trivial.json"
    assert cli(handlers, "check", "builtin:trivial_frame", "--output", str(output)) == EXIT_OK
    report = decode_json(output.read_bytes())
    assert report.scenario == "trivial_frame"
    assert report.passed
    document = json.loads(output.read_text())
    assert {r["status"] for r in document["results"]} == {"pass"}


def test_torsion_subcommand_selects_torsion_checks(handlers, tmp_path):
    output = tmp_path / "torsion.json"
    assert cli(handlers, "torsion", "builtin:trivial_frame", "--output", str(output)) == EXIT_OK
    checks = [r.check.value for r in decode_json(output.read_bytes()).results]
    assert checks == ["admissibility", "torsion", "torsion-change"]


def test_failing_checks_exit_with_two(handlers, tmp_path):
    output = tmp_path / "off.csv"
    code = cli(handlers, "deform", "builtin:off_normaliser", "--format", "csv", "--output", str(output))
    assert code == EXIT_CHECK_FAILED
    lines = output.read_text().splitlines()
    assert tuple(lines[0].split(",")) == CSV_HEADER
    assert lines[1].startswith("admissibility,fail,")
    assert lines[2].startswith("deform,error,")


def test_instanton_subcommand_on_stretched_h(handlers, tmp_path):
    output = tmp_path / "phi.json"
    assert cli(handlers, "instanton", "builtin:su2_diag_break", "--output", str(output)) == EXIT_CHECK_FAILED
    assert cli(handlers, "instanton", "builtin:su2_diag_break", "--tol", "0.7",
               "--output", str(output)) == EXIT_OK


def test_subcommand_without_matching_checks_is_a_usage_error(handlers, logger):
    assert cli(handlers, "deform", "builtin:su2_diag_break") == EXIT_USAGE
    assert any(level == "error" for level, _ in logger.records)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["check"],
        ["check", "builtin:trivial_frame", "--format", "xml"],
        ["check", "builtin:trivial_frame", "--grid", "1"],
        ["check", "builtin:trivial_frame", "--tol", "-1"],
    ],
)
def test_bad_usage_exits_with_one(handlers, argv):
    assert cli(handlers, *argv) == EXIT_USAGE


def test_unknown_builtin_exits_with_one(handlers):
    assert cli(handlers, "check", "builtin:nope") == EXIT_USAGE


def test_invalid_scenario_file_exits_with_one(handlers, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "checks": ["admissibility"]}))
    assert cli(handlers, "check", str(path)) == EXIT_USAGE


def test_catalog_listing_and_entry(handlers, tmp_path):
    listing = tmp_path / "names.txt"
    assert cli(handlers, "catalog", "--output", str(listing)) == EXIT_OK
    assert "conformal_so3" in listing.read_text().split()

    entry = tmp_path / "entry.json"
    assert cli(handlers, "catalog", "conformal_so3", "--output", str(entry)) == EXIT_OK
    document = json.loads(entry.read_text())
    assert document["name"] == "conformal_so3"
    assert document["structure"] == "so(3)"


def test_catalog_entry_round_trips_through_check(handlers, tmp_path):
    entry = tmp_path / "central.json"
    assert cli(handlers, "catalog", "central_so2", "--output", str(entry)) == EXIT_OK
    report_path = tmp_path / "central_report.json"
    assert cli(handlers, "check", str(entry), "--output", str(report_path)) == EXIT_OK


def test_main_reads_environment(monkeypatch, capsys):
    monkeypatch.setenv("NDEF_SCHEMA", SCHEMA_PATH)
    monkeypatch.setenv("NDEF_CATALOG_DIR", CATALOG_DIR)
    monkeypatch.setenv("NDEF_LOG_FILE", "")
    assert asyncio.run(main(["catalog"])) == EXIT_OK
    assert "trivial_frame" in capsys.readouterr().out


def test_main_rejects_bad_configuration(monkeypatch, capsys):
    monkeypatch.setenv("NDEF_LOG_FILE", "")
    monkeypatch.setenv("NDEF_GRID", "1")
    assert asyncio.run(main(["catalog"])) == EXIT_USAGE
    assert "NDEF_GRID" in capsys.readouterr().err
