"""
Report module implementing SOLID principles.
Contains check records, verification reports and writers for CSV and JSON destinations.
"""

import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .interfaces import ReportWriterInterface
from .config import CHECK_LABELS, REPORT_CONFIG

logger = logging.getLogger(__name__)


def relation_label(name: str) -> str:
    """Relation a check verifies, looked up by check name."""
    if name in CHECK_LABELS:
        return CHECK_LABELS[name]
    if name.startswith("transformed_"):
        inner = relation_label(name[len("transformed_"):])
        return f"{inner} after the map" if inner else ""
    if name.endswith("_slope"):
        return f"|{name[:-len('_slope')]} - asymptotic| ~ k^p"
    if name.endswith("_relative"):
        return f"|{name[:-len('_relative')]} / asymptotic - 1|"
    if name.endswith("_expansion"):
        return f"{name[:-len('_expansion')]} = its 1/sqrt(k) expansion"
    if name.endswith("_matches_K"):
        return f"{name[:-len('_matches_K')]} = K"
    if name.endswith("_series_gain"):
        return f"{name[:-len('_series_gain')]} series error << leading-term error"
    return ""


@dataclass(frozen=True)
class CheckResult:
    """One identity check: residual against tolerance."""

    name: str
    residual: float
    tolerance: float
    detail: str = ""
    label: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_record(self) -> Dict[str, Any]:
        return {
            "check_name": self.name,
            "label": self.label,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    """Ordered collection of check results for one suite run."""

    suite: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)

    def add(
        self, name: str, residual: float, tolerance: float, detail: str = "", label: Optional[str] = None
    ) -> CheckResult:
        check = CheckResult(
            name=name,
            residual=float(residual),
            tolerance=float(tolerance),
            detail=detail,
            label=relation_label(name) if label is None else label,
        )
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)

    def get(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_frame(self) -> pd.DataFrame:
        columns = ["check_name", "label", "residual", "tolerance", "pass", "detail"]
        return pd.DataFrame([check.to_record() for check in self.checks], columns=columns)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _finite_or_none(float(value))
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _clean(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    if isinstance(value, float):
        return _finite_or_none(value)
    if isinstance(value, np.floating):
        return _finite_or_none(float(value))
    return value


def frame_to_json(data: pd.DataFrame, header: Optional[Dict[str, Any]] = None) -> str:
    """Deterministic JSON document with a header and one record per row."""
    records = data.to_dict(orient="records")
    payload = {"header": _clean(header or {}), "records": _clean(records)}
    return json.dumps(payload, indent=2, sort_keys=False, default=_json_default, allow_nan=False) + "\n"


def frame_to_csv(data: pd.DataFrame) -> str:
    return data.to_csv(
        index=False,
        float_format=REPORT_CONFIG["float_format"],
        lineterminator=REPORT_CONFIG["line_terminator"],
    )


def _emit(text: str, filename: Optional[str]) -> None:
    if filename is None or filename == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(filename, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


class CsvReportWriter(ReportWriterInterface):
    """Concrete implementation for CSV report output."""

    def write(self, data: pd.DataFrame, **kwargs) -> bool:
        """Save DataFrame as CSV to a file or stdout."""
        filename = kwargs.get("filename")
        try:
            _emit(frame_to_csv(data), filename)
            logger.info("[Report] CSV report written to %s", filename or "stdout")
            return True
        except Exception as e:
            logger.error("[Report Error] Failed to save report to CSV: %s", e)
            return False


class JsonReportWriter(ReportWriterInterface):
    """Concrete implementation for JSON report output."""

    def write(self, data: pd.DataFrame, **kwargs) -> bool:
        """Save DataFrame plus header as JSON to a file or stdout."""
        filename = kwargs.get("filename")
        header = kwargs.get("header")
        try:
            _emit(frame_to_json(data, header), filename)
            logger.info("[Report] JSON report written to %s", filename or "stdout")
            return True
        except Exception as e:
            logger.error("[Report Error] Failed to save report to JSON: %s", e)
            return False


class MultiFormatReportWriter:
    """Orchestrates writing one table to several formats."""

    def __init__(self):
        self.writers: Dict[str, ReportWriterInterface] = {
            "csv": CsvReportWriter(),
            "json": JsonReportWriter(),
        }

    def write_all(
        self,
        data: pd.DataFrame,
        basename: Optional[str] = None,
        formats: Optional[List[str]] = None,
        header: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, bool]:
        """Write the table in every requested format; returns success per format."""
        if formats is None:
            formats = [REPORT_CONFIG["default_format"]]

        results = {}
        for fmt in formats:
            if fmt not in self.writers:
                logger.error("[Report Error] Unknown report format: %s", fmt)
                results[fmt] = False
                continue
            filename = None if basename in (None, "-") else f"{basename}.{fmt}"
            if basename is not None and os.path.splitext(basename)[1].lstrip(".") == fmt:
                filename = basename
            results[fmt] = self.writers[fmt].write(data, filename=filename, header=header)
        return results
