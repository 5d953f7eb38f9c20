"""
Unit tests for the report module following SOLID principles.
Tests check records, verification reports and the CSV and JSON writers.
"""

import json
import pytest
import pandas as pd
import sys
import os
from unittest.mock import patch

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.report import (
    CheckResult,
    CsvReportWriter,
    JsonReportWriter,
    MultiFormatReportWriter,
    VerificationReport,
    frame_to_csv,
    frame_to_json,
    relation_label,
)
from utils.config import CHECK_LABELS


@pytest.fixture
def sample_dataframe():
    """Sample result table for testing."""
    return pd.DataFrame({
        "check_name": ["a", "b"],
        "residual": [1e-15, 0.1],
        "pass": [True, False],
    })


class TestVerificationReport:
    """Tests for CheckResult and VerificationReport."""

    def test_check_passes_at_tolerance(self):
        """Test residual <= tolerance passes and NaN fails."""
        assert CheckResult("x", 1e-12, 1e-12).passed
        assert not CheckResult("x", 2e-12, 1e-12).passed
        assert not CheckResult("x", float("nan"), 1.0).passed

    def test_report_collects_failures(self):
        """Test passed, failures and lookup by name."""
        report = VerificationReport(suite="demo")
        report.add("good", 0.0, 1e-12)
        report.add("bad", 1.0, 1e-12, detail="broken")
        assert not report.passed
        assert [check.name for check in report.failures] == ["bad"]
        assert report.get("bad").detail == "broken"
        with pytest.raises(KeyError):
            report.get("missing")

    def test_to_frame(self):
        """Test the check_name, label, residual, tolerance, pass, detail columns."""
        report = VerificationReport(suite="demo")
        report.add("good", 0.0, 1e-12)
        frame = report.to_frame()
        assert list(frame.columns) == ["check_name", "label", "residual", "tolerance", "pass", "detail"]
        assert bool(frame["pass"].iloc[0])

    def test_label_lookup(self):
        """Test labels come from the relation table, derived names and explicit overrides."""
        report = VerificationReport(suite="demo")
        assert report.add("sphere_radius_squared", 0.0, 1.0).label.startswith("R^2 = 1 + (L^2 + 1)/k")
        assert report.add("ladder_lower_upper_relation", 0.0, 1.0).label == "A(a, l, m) = B(-a, l-1, m+a)"
        assert report.add("transformed_sphere_orthogonality", 0.0, 1.0).label == "x . L = 0 after the map"
        assert report.add("E_0_1_slope", 0.0, 1.0).label == "|E_0_1 - asymptotic| ~ k^p"
        assert report.add("gap_fd_1_relative", 0.0, 1.0).label == "|gap_fd_1 / asymptotic - 1|"
        assert report.add("unknown_check", 0.0, 1.0).label == ""
        assert report.add("circle_grading", 0.0, 1.0, label="custom").label == "custom"
        assert relation_label("circle_nilpotency") == CHECK_LABELS["circle_nilpotency"]

    def test_extend(self):
        """Test merging two reports."""
        first, second = VerificationReport(suite="a"), VerificationReport(suite="b")
        first.add("one", 0.0, 1.0)
        second.add("two", 0.0, 1.0)
        first.extend(second)
        assert len(first.checks) == 2


class TestSerialization:
    """Tests for frame_to_json and frame_to_csv."""

    def test_json_header_and_records(self, sample_dataframe):
        """Test the header block and one record per row."""
        payload = json.loads(frame_to_json(sample_dataframe, {"lambda": 2, "k": 36.0}))
        assert payload["header"] == {"lambda": 2, "k": 36.0}
        assert len(payload["records"]) == 2
        assert payload["records"][1]["pass"] is False

    def test_json_non_finite_becomes_null(self):
        """Test that NaN and inf are written as null."""
        payload = json.loads(frame_to_json(pd.DataFrame({"x": [float("nan"), float("inf")]})))
        assert payload["records"] == [{"x": None}, {"x": None}]

    def test_json_is_deterministic(self, sample_dataframe):
        """Test byte-identical output for identical input."""
        assert frame_to_json(sample_dataframe, {"a": 1}) == frame_to_json(sample_dataframe.copy(), {"a": 1})

    def test_csv_round_trip_precision(self):
        """Test that 17 significant digits survive the CSV."""
        text = frame_to_csv(pd.DataFrame({"x": [0.1 + 0.2]}))
        assert float(text.splitlines()[1]) == 0.1 + 0.2


class TestWriters:
    """Tests for the CSV, JSON and multi-format writers."""

    def test_csv_to_file(self, tmp_path, sample_dataframe):
        """Test writing CSV to a file."""
        path = tmp_path / "out" / "report.csv"
        assert CsvReportWriter().write(sample_dataframe, filename=str(path))
        assert pd.read_csv(path).shape == (2, 3)

    def test_json_to_stdout(self, sample_dataframe, capsys):
        """Test writing JSON to stdout."""
        assert JsonReportWriter().write(sample_dataframe, header={"d": 3})
        captured = capsys.readouterr()
        assert json.loads(captured.out)["header"] == {"d": 3}

    @patch("utils.report._emit", side_effect=OSError("disk full"))
    def test_write_failure_returns_false(self, mock_emit, sample_dataframe):
        """Test that an I/O error is reported as False."""
        assert CsvReportWriter().write(sample_dataframe, filename="x.csv") is False
        assert JsonReportWriter().write(sample_dataframe, filename="x.json") is False

    def test_multi_format(self, tmp_path, sample_dataframe):
        """Test one file per requested format."""
        base = tmp_path / "result"
        results = MultiFormatReportWriter().write_all(sample_dataframe, basename=str(base), formats=["csv", "json"])
        assert results == {"csv": True, "json": True}
        assert (tmp_path / "result.csv").exists()
        assert (tmp_path / "result.json").exists()

    def test_multi_format_unknown(self, sample_dataframe):
        """Test that an unknown format is reported as a failure."""
        results = MultiFormatReportWriter().write_all(sample_dataframe, formats=["xml"])
        assert results == {"xml": False}
