"""
Integration tests for the fuzzy geometry lab command line following SOLID principles.
Tests the pipeline steps and the exit codes of main with proper mocking.
"""

import io
import json
import unittest
from unittest.mock import patch
import sys
import os

# Add parent directory to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from main import FuzzyLabPipeline, main
import pandas as pd


def run_cli(*argv):
    """Run main and return (exit code, parsed JSON output)."""
    with patch('sys.stdout', new_callable=io.StringIO) as stdout:
        code = main(list(argv) + ["--format", "json", "--quiet"])
    text = stdout.getvalue()
    return code, json.loads(text) if text else None


class TestFuzzyLabPipeline(unittest.TestCase):
    """Tests for FuzzyLabPipeline class."""

    def setUp(self):
        self.pipeline = FuzzyLabPipeline(threads=1)

    def test_resolve_k_prefers_literal(self):
        """Test that a literal k overrides the schedule."""
        self.assertEqual(self.pipeline.resolve_k(2, 3, 7.0, "default"), 7.0)
        self.assertEqual(self.pipeline.resolve_k(2, 3, None, "default"), 144.0)

    def test_resolve_k_rejects_non_positive(self):
        """Test that k <= 0 raises."""
        with self.assertRaises(ValueError):
            self.pipeline.resolve_k(2, 3, 0.0, "default")

    def test_build_model_refuses_inconsistent_k(self):
        """Test that an inconsistent model needs force."""
        with self.assertRaises(ValueError):
            self.pipeline.build_model(2, 3, 1.0)
        forced = FuzzyLabPipeline(threads=1, force=True)
        self.assertFalse(forced.build_model(2, 3, 1.0).consistent)

    def test_build_model_rejects_dimension(self):
        """Test that d outside 2, 3 raises."""
        with self.assertRaises(ValueError):
            self.pipeline.build_model(4, 2, 36.0)

    def test_verify_all_suites(self):
        """Test every suite on a small sphere."""
        suites = ["identities", "realization", "ladders", "transform", "harmonics"]
        table, passed = self.pipeline.verify(3, 1, 4.0, suites)
        self.assertTrue(passed)
        self.assertIn("sphere_so4", set(table["suite"]))
        self.assertIn("fuzzy_harmonics", set(table["suite"]))
        self.assertIn("ladder_identities", set(table["suite"]))

    def test_every_identity_check_is_labelled(self):
        """Test that each row of the circle and sphere suites carries its relation label."""
        circle, _ = self.pipeline.verify(2, 2, 1e4, ["all"])
        sphere, _ = self.pipeline.verify(3, 2, 1e4, ["all"])
        for table in (circle, sphere):
            self.assertIn("label", table.columns)
            unlabelled = table.loc[table["label"] == "", "check_name"].tolist()
            self.assertEqual(unlabelled, [])

    def test_spectrum_multiplicities(self):
        """Test H = {0: 1, 2: 3, 6: 5} for the sphere at L = 2."""
        table, passed = self.pipeline.spectrum(3, 2, 36.0)
        rows = table[table["operator"] == "H"]
        self.assertEqual(list(rows["eigenvalue"]), [0.0, 2.0, 6.0])
        self.assertEqual(list(rows["multiplicity"]), [1, 3, 5])

    def test_sphere_casimir_spectrum(self):
        """Test L2 = l(l+1) with multiplicity 2l+1 through the spectrum table."""
        table, _ = self.pipeline.spectrum(3, 2, 36.0)
        rows = table[table["operator"] == "L2"]
        self.assertEqual(list(rows["eigenvalue"]), [0.0, 2.0, 6.0])
        self.assertEqual(list(rows["multiplicity"]), [1, 3, 5])

    def test_dump_targets(self):
        """Test the operator, harmonic and ladder dumps."""
        operators, _ = self.pipeline.dump(2, 1, 4.0, "operators")
        self.assertEqual(set(operators["name"]), {"xi_plus", "xi_minus", "L", "H", "R2"})
        ladders, _ = self.pipeline.dump(3, 1, 4.0, "ladders")
        self.assertEqual(list(ladders.columns), ["a", "l", "m", "A", "B"])
        with self.assertRaises(ValueError):
            self.pipeline.dump(2, 1, 4.0, "harmonics")

    def test_converge_witness(self):
        """Test the circle witness suite."""
        table, passed = self.pipeline.converge(2, "witness", "default", [2, 3])
        self.assertTrue(passed)
        self.assertEqual(len(table), 2)

    def test_converge_unknown_suite(self):
        """Test that an unknown suite raises."""
        with self.assertRaises(ValueError):
            self.pipeline.converge(2, "speed", "default")


class TestMain(unittest.TestCase):
    """Tests for main function and its exit codes."""

    def test_verify_circle(self):
        """Test verify --d 2 --lambda 3: six passing checks."""
        code, payload = run_cli("verify", "--d", "2", "--lambda", "3")
        self.assertEqual(code, 0)
        self.assertEqual(len(payload["records"]), 6)
        self.assertTrue(all(record["pass"] for record in payload["records"]))
        self.assertEqual(payload["header"]["k_resolved"], 144.0)
        self.assertIn("seed", payload["header"])

    def test_verify_zero_cutoff_is_usage_error(self):
        """Test verify --d 3 --lambda 0 exits with 2."""
        code, payload = run_cli("verify", "--d", "3", "--lambda", "0")
        self.assertEqual(code, 2)
        self.assertIsNone(payload)

    def test_inconsistent_k_needs_force(self):
        """Test that --force lets an inconsistent model through."""
        code, _ = run_cli("verify", "--d", "2", "--lambda", "3", "--k", "1")
        self.assertEqual(code, 2)
        code, payload = run_cli("verify", "--d", "2", "--lambda", "3", "--k", "1", "--force")
        self.assertNotEqual(code, 2)
        self.assertEqual(len(payload["records"]), 6)

    def test_prop_sphere_cap(self):
        """Test that the capped schedule is a usage error."""
        code, _ = run_cli("spectrum", "--d", "3", "--lambda", "6", "--schedule", "prop-sphere")
        self.assertEqual(code, 2)

    def test_spectrum_circle(self):
        """Test R^2 = {1/2, 1, 1/2} for L = 1, k = 4."""
        code, payload = run_cli("spectrum", "--d", "2", "--lambda", "1", "--k", "4")
        self.assertEqual(code, 0)
        rows = [r for r in payload["records"] if r["operator"] == "R2"]
        self.assertEqual([(r["eigenvalue"], r["multiplicity"]) for r in rows], [(0.5, 2), (1.0, 1)])

    def test_output_independent_of_threads(self):
        """Test byte-identical output for different thread counts."""
        outputs = []
        for threads in ("1", "4"):
            with patch('sys.stdout', new_callable=io.StringIO) as stdout:
                main(["converge", "--d", "2", "--suite", "norm", "--lambdas", "2,3",
                      "--threads", threads, "--quiet"])
            outputs.append(stdout.getvalue())
        self.assertEqual(outputs[0], outputs[1])

    def test_argparse_errors_are_usage_errors(self):
        """Test unknown subcommands and choices exit with 2."""
        with patch('sys.stderr', new_callable=io.StringIO):
            self.assertEqual(main(["explode"]), 2)
            self.assertEqual(main(["verify", "--d", "5"]), 2)

    @patch('main.FuzzyLabPipeline.verify')
    def test_failed_check_exits_one(self, mock_verify):
        """Test that a failing check gives exit code 1."""
        mock_verify.return_value = (pd.DataFrame({"check_name": ["x"], "pass": [False]}), False)
        code, payload = run_cli("verify", "--d", "2", "--lambda", "2")
        self.assertEqual(code, 1)
        self.assertEqual(payload["records"][0]["check_name"], "x")

    @patch('main.MultiFormatReportWriter')
    def test_writer_failure_exits_one(self, mock_writer_class):
        """Test that a failed write gives exit code 1."""
        mock_writer_class.return_value.write_all.return_value = {"json": False}
        code, _ = run_cli("spectrum", "--d", "3", "--lambda", "1")
        self.assertEqual(code, 1)

    def test_output_file(self):
        """Test writing the table to a file."""
        import tempfile
        with tempfile.TemporaryDirectory() as directory:
            base = os.path.join(directory, "ladders")
            code = main(["dump", "--what", "ladders", "--lambda", "1", "--out", base, "--format", "csv", "--quiet"])
            self.assertEqual(code, 0)
            frame = pd.read_csv(base + ".csv")
            self.assertEqual(list(frame.columns), ["a", "l", "m", "A", "B"])

    def test_oracle_tail(self):
        """Test the oracle subcommand with a short sweep."""
        code, payload = run_cli("oracle", "--check", "tail", "--k-sweep", "1e4,1e5,1e6")
        self.assertEqual(code, 0)
        self.assertEqual(len(payload["records"]), 6)
        self.assertEqual(payload["header"]["slope_fits"][0]["suite"], "oracle_tail")

    @patch.dict(os.environ, {"FUZZYLAB_K_SWEEP": "1e4,1e5,1e6,1e7,1e8"})
    def test_oracle_circle_default_checks(self):
        """Test oracle --d 2 with every check over the default sweep exits 0."""
        code, payload = run_cli("oracle", "--d", "2")
        self.assertEqual(code, 0)
        fits = payload["header"]["slope_fits"]
        self.assertTrue(all(fit["pass"] for fit in fits))
        names = {fit["check_name"] for fit in fits}
        self.assertIn("gap_quartic_1_relative", names)
        self.assertIn("gap_quartic_1_expansion", names)
        self.assertEqual(payload["header"]["k_sweep"], [1e4, 1e5, 1e6, 1e7, 1e8])


if __name__ == '__main__':
    unittest.main()
