import hashlib
import json
import os
import sys
from typing import Any, Dict, List, Optional

import aiofiles
import jsonschema

from ..domain.entities import (
    ChartSpec,
    GaugeSpec,
    Report,
    ReportFormat,
    RepresentationSpec,
    Scenario,
)
from ..domain.exceptions import CatalogError, ScenarioError
from ..domain.interfaces import LoggingService, ReportWriter, ScenarioRepository
from .report_serializer import encode_report


def _expression_matrix(rows: Optional[List[List[Any]]]) -> Optional[List[List[str]]]:
    if rows is None:
        return None
    return [[str(entry) for entry in row] for row in rows]


def _form_components(components: Optional[Dict[str, Any]]) -> Optional[Dict[str, List[List[str]]]]:
    if components is None:
        return None
    return {key: _expression_matrix(rows) for key, rows in components.items()}


def scenario_from_document(document: Dict[str, Any], digest: str = "") -> Scenario:
    """Builds the Scenario entity from a schema-valid document."""
    representation = document.get("representation")
    gauge = document.get("gauge")
    try:
        return Scenario(
            name=document["name"],
            description=document.get("description", ""),
            chart=ChartSpec(document["chart"]["bounds"], document["chart"].get("grid")),
            ambient=document["ambient"],
            structure=document["structure"],
            h=_expression_matrix(document["h"]),
            h_group=document.get("h_group"),
            checks=document["checks"],
            connection=_form_components(document.get("connection")),
            reference_connection=_form_components(document.get("reference_connection")),
            deformed_reference_connection=_form_components(document.get("deformed_reference_connection")),
            frame=_expression_matrix(document.get("frame")),
            representation=RepresentationSpec(representation["name"], representation["tau0"])
            if representation else None,
            gauge=GaugeSpec(
                gauge["algebra"],
                _form_components(gauge.get("connection")),
                _form_components(gauge.get("field_strength")),
            ) if gauge else None,
            tolerances=dict(document.get("tolerances", {})),
            digest=digest,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"invalid scenario '{document.get('name', '?')}': {e}") from e


def scenario_to_document(scenario: Scenario) -> Dict[str, Any]:
    """Schema-shaped document of a scenario; optional blocks are omitted when empty."""
    document: Dict[str, Any] = {
        "name": scenario.name,
        "description": scenario.description,
        "chart": {"bounds": scenario.chart.bounds},
        "ambient": scenario.ambient,
        "structure": scenario.structure,
        "h": scenario.h,
        "checks": [check.value for check in scenario.checks],
    }
    if scenario.chart.grid is not None:
        document["chart"]["grid"] = scenario.chart.grid
    optional = {
        "h_group": scenario.h_group,
        "connection": scenario.connection,
        "reference_connection": scenario.reference_connection,
        "deformed_reference_connection": scenario.deformed_reference_connection,
        "frame": scenario.frame,
        "tolerances": scenario.tolerances or None,
    }
    document.update({key: value for key, value in optional.items() if value is not None})
    if scenario.representation is not None:
        document["representation"] = {
            "name": scenario.representation.name,
            "tau0": scenario.representation.tau0,
        }
    if scenario.gauge is not None:
        gauge = {"algebra": scenario.gauge.algebra}
        if scenario.gauge.connection is not None:
            gauge["connection"] = scenario.gauge.connection
        else:
            gauge["field_strength"] = scenario.gauge.field_strength
        document["gauge"] = gauge
    return document


class JsonScenarioRepository(ScenarioRepository):
    """JSON file-based scenario repository validated against the published schema."""

    # =========================================================================
    # INITIALIZATION AND SETUP METHODS (High Priority)
    # =========================================================================

    def __init__(self, logger: LoggingService, schema_path: str = "data/scenario.schema.json",
                 catalog_dir: str = "data/scenarios"):
        """
        Initializes the repository with the schema file and the built-in catalog directory.
        The schema is read once and reused for every scenario.
        """
        self.logger = logger
        self.schema_path = schema_path
        self.catalog_dir = catalog_dir
        self._schema: Optional[Dict[str, Any]] = None

    def _load_schema(self) -> Dict[str, Any]:
        if self._schema is None:
            try:
                with open(self.schema_path, "r", encoding="utf-8") as f:
                    self._schema = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise ScenarioError(f"cannot read scenario schema {self.schema_path}: {e}") from e
        return self._schema

    # =========================================================================
    # DATA LOADING METHODS (High Priority)
    # =========================================================================

    async def load(self, path: str) -> Scenario:
        """Reads, validates and converts one scenario file; the digest covers its raw bytes."""
        try:
            async with aiofiles.open(path, "rb") as f:
                raw = await f.read()
        except OSError as e:
            raise ScenarioError(f"cannot read scenario {path}: {e}") from e
        return self.parse(raw, source=path)

    def parse(self, raw: bytes, source: str = "<memory>") -> Scenario:
        digest = hashlib.sha256(raw).hexdigest()
        try:
            document = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ScenarioError(f"{source} is not valid JSON: {e}") from e

        try:
            jsonschema.validate(document, self._load_schema())
        except jsonschema.ValidationError as e:
            location = "/".join(str(part) for part in e.absolute_path) or "<root>"
            raise ScenarioError(f"{source} fails the scenario schema at {location}: {e.message}") from e

        scenario = scenario_from_document(document, digest)
        self.logger.debug(f"Loaded scenario '{scenario.name}' from {source}")
        return scenario

    async def load_builtin(self, name: str) -> Scenario:
        available = self.builtin_names()
        if name not in available:
            raise CatalogError("scenario", name, available)
        return await self.load(os.path.join(self.catalog_dir, f"{name}.json"))

    def builtin_names(self) -> List[str]:
        try:
            entries = os.listdir(self.catalog_dir)
        except OSError as e:
            self.logger.error(f"Error listing built-in scenarios: {str(e)}")
            return []
        return sorted(entry[:-5] for entry in entries if entry.endswith(".json"))


class FileReportWriter(ReportWriter):
    """Writes encoded reports to files or stdout."""

    def __init__(self, logger: LoggingService):
        self.logger = logger

    def encode(self, report: Report, fmt: ReportFormat) -> bytes:
        return encode_report(report, fmt)

    async def write(self, payload: bytes, path: str) -> None:
        if path == "-":
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
            return
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        async with aiofiles.open(path, "wb") as f:
            await f.write(payload)
        self.logger.debug(f"Wrote {len(payload)} bytes to {path}")
