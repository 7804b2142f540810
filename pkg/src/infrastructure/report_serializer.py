"""Report encodings: canonical JSON (round-trippable) and one-row-per-check CSV."""

import csv
import io
import json
import math
from typing import Any, Dict, Union

import numpy as np

from ..domain.entities import CheckName, CheckResult, CheckStatus, Report, ReportFormat
from ..domain.exceptions import ReportFormatError

CSV_HEADER = ("check", "status", "residual", "point", "elapsed_ms")
NON_FINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def _jsonable(value: Any) -> Any:
    """Plain JSON values; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(item) for item in (value.tolist() if isinstance(value, np.ndarray) else value)]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def _number(value: Any):
    if value is None:
        return None
    if isinstance(value, str):
        return NON_FINITE[value]
    return float(value)


def _result_dict(result: CheckResult) -> Dict[str, Any]:
    return {
        "check": result.check.value,
        "status": result.status.value,
        "residual": _jsonable(result.residual),
        "point": _jsonable(result.point),
        "elapsed_ms": _jsonable(result.elapsed_ms),
        "tolerance": _jsonable(result.tolerance),
        "message": result.message,
        "table": _jsonable(result.table),
    }


def report_to_dict(report: Report) -> Dict[str, Any]:
    return {
        "scenario": report.scenario,
        "digest": report.digest,
        "version": report.version,
        "passed": report.passed,
        "results": [_result_dict(result) for result in report.results],
    }


# =========================================================================
# ENCODING (High Priority)
# =========================================================================


def encode_json(report: Report) -> bytes:
    return (json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n").encode("utf-8")


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def encode_csv(report: Report) -> bytes:
    """One row per check; points are ';'-joined coordinates and tables are omitted."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for result in report.results:
        point = ";".join(_csv_cell(float(x)) for x in result.point) if result.point else ""
        residual = None if result.residual is None else float(result.residual)
        writer.writerow([
            result.check.value,
            result.status.value,
            _csv_cell(residual),
            point,
            _csv_cell(float(result.elapsed_ms)),
        ])
    return buffer.getvalue().encode("utf-8")


def encode_report(report: Report, fmt: Union[ReportFormat, str]) -> bytes:
    try:
        fmt = fmt if isinstance(fmt, ReportFormat) else ReportFormat(fmt)
    except ValueError as e:
        raise ReportFormatError(
            f"unknown report format '{fmt}'; expected one of {[f.value for f in ReportFormat]}"
        ) from e
    if fmt is ReportFormat.JSON:
        return encode_json(report)
    return encode_csv(report)


# =========================================================================
# DECODING
# =========================================================================


def decode_json(payload: Union[bytes, str]) -> Report:
    """Inverse of encode_json."""
    try:
        data = json.loads(payload)
        results = [
            CheckResult(
                check=CheckName(item["check"]),
                status=CheckStatus(item["status"]),
                residual=_number(item.get("residual")),
                point=item.get("point"),
                elapsed_ms=_number(item.get("elapsed_ms", 0.0)),
                tolerance=_number(item.get("tolerance")),
                message=item.get("message", ""),
                table=item.get("table", {}),
            )
            for item in data["results"]
        ]
        return Report(data["scenario"], data["digest"], data["version"], results)
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError(f"not a report document: {e}") from e
