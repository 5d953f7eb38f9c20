"""
Main fuzzy geometry lab module implementing SOLID principles.
This module orchestrates model building, identity verification, spectra,
convergence sweeps, the radial oracle and operator dumps behind one command line.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.config import EXIT_CODES, ORACLE_CONFIG, REPORT_CONFIG, SCHEDULE_CONFIG, get_runtime_config
from utils.circle import (
    CircleIdentitySuite,
    build_circle,
    circle_spectra,
    o2_transform,
    projected_derivatives,
    verify_so3_realization,
)
from utils.sphere import (
    SphereIdentitySuite,
    build_fuzzy_harmonics,
    build_so4_realization,
    build_sphere,
    o3_transform,
    sphere_spectra,
    theta_ladders,
    verify_fuzzy_harmonics,
    verify_so4_realization,
)
from utils.harmonics import ladder_coefficients, verify_ladder_identities
from utils.radial import RadialOracle, sphere_derivative_matrices
from utils.convergence import (
    TruncatedFourier,
    TruncatedSphFn,
    circle_test_corpus,
    make_schedule,
    sphere_test_corpus,
    strong_convergence_circle,
    strong_convergence_sphere,
    uniform_norm_bound_circle,
    witness_table,
)
from utils.report import MultiFormatReportWriter, VerificationReport

logger = logging.getLogger(__name__)

VERIFY_SUITES = ["identities", "realization", "ladders", "transform", "harmonics", "derivatives", "all"]
CONVERGE_SUITES = ["decay", "norm", "witness"]
DUMP_TARGETS = ["operators", "harmonics", "ladders"]


class FuzzyLabPipeline:
    """Main pipeline class: one method per subcommand, each returning a table and a pass flag."""

    def __init__(self, threads: Optional[int] = None, seed: Optional[int] = None, force: bool = False):
        # Initialize components following Dependency Injection
        runtime = get_runtime_config()
        self.threads = threads or runtime["threads"]
        self.seed = runtime["seed"] if seed is None else seed
        self.force = force
        self.output_dir = runtime["output_dir"]
        self.report_writer = MultiFormatReportWriter()

    def resolve_k(self, d: int, cutoff: int, k: Optional[float], schedule: str) -> float:
        """Literal k wins over the schedule."""
        if k is not None:
            if k <= 0:
                raise ValueError(f"k must be positive, got {k}")
            return float(k)
        return make_schedule(schedule)(cutoff)

    def build_model(self, d: int, cutoff: int, k: float):
        if d == 2:
            model = build_circle(cutoff, k)
        elif d == 3:
            model = build_sphere(cutoff, k)
        else:
            raise ValueError(f"d must be 2 or 3, got {d}")
        if not model.consistent and not self.force:
            raise ValueError(f"Lambda={cutoff}, k={k:.17g} violates the consistency condition; use --force")
        return model

    def verify(self, d: int, cutoff: int, k: float, suites: Sequence[str],
               tolerance: Optional[float] = None) -> Tuple[pd.DataFrame, bool]:
        """Run the selected identity suites; one row per check."""
        model = self.build_model(d, cutoff, k)
        selected = set(VERIFY_SUITES[:-1]) if "all" in suites else set(suites)
        reports: List[VerificationReport] = []

        if "identities" in selected:
            suite = CircleIdentitySuite(tolerance) if d == 2 else SphereIdentitySuite(tolerance)
            reports.append(suite.verify(model))
        if "ladders" in selected:
            reports.append(verify_ladder_identities(ladder_coefficients(cutoff)))
        if d == 2:
            if "realization" in selected:
                reports.append(verify_so3_realization(model))
            if "transform" in selected:
                reports.append(o2_transform(model, "rotation", 0.7).report)
                reports.append(o2_transform(model, "reflection").report)
            if "derivatives" in selected:
                reports.append(projected_derivatives(model).report)
        else:
            if "realization" in selected:
                reports.append(verify_so4_realization(model))
                reports.append(theta_ladders(build_so4_realization(model)).report)
            if "transform" in selected:
                reports.append(o3_transform(model, "rotation", (0.3, -0.5, 0.7)).report)
                reports.append(o3_transform(model, "parity").report)
            if "harmonics" in selected:
                reports.append(verify_fuzzy_harmonics(build_fuzzy_harmonics(model), model))
            if "derivatives" in selected:
                reports.append(sphere_derivative_matrices(cutoff, k).report)

        frames = []
        for report in reports:
            frame = report.to_frame()
            frame.insert(0, "suite", report.suite)
            frames.append(frame)
            for failure in report.failures:
                logger.warning("[Verify] %s/%s residual %.3e above %.3e",
                               report.suite, failure.name, failure.residual, failure.tolerance)
        table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
        passed = all(report.passed for report in reports)
        logger.info("[Verify] %d checks in %d suites, %s", len(table), len(reports), "all passed" if passed else "failures")
        return table, passed

    def spectrum(self, d: int, cutoff: int, k: float) -> Tuple[pd.DataFrame, bool]:
        """Eigenvalues with multiplicities, one row per distinct value."""
        model = self.build_model(d, cutoff, k)
        spectra = circle_spectra(model) if d == 2 else sphere_spectra(model)
        rows = []
        for name, values in spectra.items():
            rounded = np.round(np.asarray(values, dtype=float), 10)
            distinct, counts = np.unique(rounded, return_counts=True)
            for value, count in zip(distinct, counts):
                rows.append({"operator": name, "eigenvalue": float(value), "multiplicity": int(count)})
        return pd.DataFrame(rows, columns=["operator", "eigenvalue", "multiplicity"]), True

    def converge(self, d: int, suite: str, schedule: str, cutoffs: Optional[Sequence[int]] = None,
                 k: Optional[float] = None) -> Tuple[pd.DataFrame, bool]:
        """Decay tables, uniform norm bounds or operator-norm witnesses."""
        if suite not in CONVERGE_SUITES:
            raise ValueError(f"Unknown convergence suite: {suite}")
        plan = make_schedule(schedule, k=k)

        if suite == "witness":
            lambdas = list(cutoffs or ([2, 3, 4, 5] if d == 2 else [1, 2, 3]))
            models = [self.build_model(d, lam, plan(lam)) for lam in lambdas]
            table = witness_table(models)
            return table, bool(table["pass"].all())

        frames = []
        if d == 2:
            phi = TruncatedFourier.gaussian()
            corpus = circle_test_corpus()
            for name, f in corpus.items():
                if suite == "decay":
                    frame = strong_convergence_circle(
                        f, phi, plan, cutoffs, g=corpus["u"], threads=self.threads, force=self.force
                    )
                else:
                    frame = uniform_norm_bound_circle(f, plan, cutoffs, threads=self.threads, force=self.force)
                frame.insert(0, "function", name)
                frames.append(frame)
        else:
            if suite == "norm":
                raise ValueError("The uniform norm sweep is implemented for d=2 only")
            phi = TruncatedSphFn.from_dict({(0, 0): 1.0, (1, 1): 0.5, (1, -1): -0.5}).normalized()
            corpus = sphere_test_corpus()
            for name, f in corpus.items():
                frame = strong_convergence_sphere(
                    f, phi, plan, cutoffs, g=corpus["t_zero"], threads=self.threads, force=self.force
                )
                frame.insert(0, "function", name)
                frames.append(frame)
        table = pd.concat(frames, ignore_index=True)
        return table, bool(table["pass"].all())

    def oracle(self, checks: Sequence[str], d: int, k_sweep: Optional[Sequence[float]] = None
               ) -> Tuple[pd.DataFrame, pd.DataFrame, bool]:
        """Exact-vs-asymptotic rows and the slope/threshold report for each check."""
        oracle = RadialOracle(k_sweep=k_sweep, threads=self.threads)
        tables, reports = [], []
        passed = True
        for check in checks:
            sweep = oracle.run(check, d)
            table = sweep.table.copy()
            table.insert(0, "check", check)
            tables.append(table)
            frame = sweep.report.to_frame()
            frame.insert(0, "suite", sweep.report.suite)
            reports.append(frame)
            passed = passed and sweep.report.passed
        return pd.concat(tables, ignore_index=True), pd.concat(reports, ignore_index=True), passed

    def dump(self, d: int, cutoff: int, k: float, target: str) -> Tuple[pd.DataFrame, bool]:
        """Operator entries, fuzzy harmonics or the ladder table."""
        if target == "ladders":
            return ladder_coefficients(cutoff).to_frame(), True
        model = self.build_model(d, cutoff, k)
        if target == "harmonics":
            if d != 3:
                raise ValueError("Fuzzy harmonics exist for d=3 only")
            return build_fuzzy_harmonics(model).to_frame(), True
        if target != "operators":
            raise ValueError(f"Unknown dump target: {target}")
        frames = [op.to_frame(name) for name, op in model.operators().items()]
        return pd.concat(frames, ignore_index=True), True

    def emit(self, table: pd.DataFrame, out: Optional[str], fmt: str, header: Dict[str, Any]) -> bool:
        """Write the table and report per-destination success."""
        if out not in (None, "-") and not os.path.isabs(out):
            out = os.path.join(self.output_dir, out)
        results = self.report_writer.write_all(table, basename=out, formats=[fmt], header=header)
        for destination, success in results.items():
            if not success:
                logger.error("[Report Error] Writing %s output failed", destination)
        return all(results.values())


def _float_list(raw: str) -> List[float]:
    try:
        return [float(item) for item in raw.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers: {e}")


def _int_list(raw: str) -> List[int]:
    try:
        return [int(item) for item in raw.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers: {e}")


def build_parser() -> argparse.ArgumentParser:
    runtime = get_runtime_config()
    parser = argparse.ArgumentParser(prog="fuzzylab", description="Fuzzy circle and fuzzy sphere verification lab")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, choices=[2, 3], default=3)
    common.add_argument("--lambda", dest="cutoff", type=int, default=2)
    common.add_argument("--k", type=float, default=None)
    common.add_argument("--schedule", choices=SCHEDULE_CONFIG["names"], default=SCHEDULE_CONFIG["default_schedule"])
    common.add_argument("--out", default=None, help="output path without extension; '-' or omitted for stdout")
    common.add_argument("--format", choices=REPORT_CONFIG["formats"], default=runtime["format"])
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--force", action="store_true", help="run models that violate the consistency condition")
    common.add_argument("--quiet", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", parents=[common], help="run identity suites")
    verify.add_argument("--suite", action="append", choices=VERIFY_SUITES, default=None)
    sub.add_parser("spectrum", parents=[common], help="eigenvalues of H, R^2 and L or L^2")
    converge = sub.add_parser("converge", parents=[common], help="strong convergence sweeps")
    converge.add_argument("--suite", choices=CONVERGE_SUITES, default="decay")
    converge.add_argument("--lambdas", type=_int_list, default=None)
    oracle = sub.add_parser("oracle", parents=[common], help="radial asymptotics against exact integrals")
    oracle.add_argument("--check", action="append", choices=ORACLE_CONFIG["checks"], default=None)
    oracle.add_argument("--k-sweep", dest="k_sweep", type=_float_list, default=runtime["k_sweep"])
    dump = sub.add_parser("dump", parents=[common], help="write operators, fuzzy harmonics or ladder tables")
    dump.add_argument("--what", choices=DUMP_TARGETS, default="operators")
    return parser


def _header(args: argparse.Namespace) -> Dict[str, Any]:
    # thread count is left out so output does not depend on it
    skip = {"threads", "quiet", "out", "format"}
    return {key: value for key, value in sorted(vars(args).items()) if key not in skip}


def run(args: argparse.Namespace) -> int:
    pipeline = FuzzyLabPipeline(threads=args.threads, force=args.force)
    header = _header(args)
    header["seed"] = pipeline.seed

    if args.command == "oracle":
        table, report, passed = pipeline.oracle(args.check or ORACLE_CONFIG["checks"], args.d, args.k_sweep)
        header["slope_fits"] = report.to_dict(orient="records")
        written = pipeline.emit(table, args.out, args.format, header)
        if args.out not in (None, "-"):
            written = pipeline.emit(report, f"{args.out}_fits", "json", header) and written
    else:
        if args.command != "dump" or args.what != "ladders":
            if args.cutoff < 1:
                raise ValueError(f"Lambda must be >= 1, got {args.cutoff}")
        k = None
        if args.command != "converge":
            k = pipeline.resolve_k(args.d, args.cutoff, args.k, args.schedule) if args.cutoff >= 1 else None
            header["k_resolved"] = k
        if args.command == "verify":
            table, passed = pipeline.verify(args.d, args.cutoff, k, args.suite or ["identities"], args.tol)
        elif args.command == "spectrum":
            table, passed = pipeline.spectrum(args.d, args.cutoff, k)
        elif args.command == "converge":
            schedule = "custom" if args.k is not None else args.schedule
            table, passed = pipeline.converge(args.d, args.suite, schedule, args.lambdas, args.k)
        else:
            table, passed = pipeline.dump(args.d, args.cutoff, k, args.what)
        written = pipeline.emit(table, args.out, args.format, header)

    if not (passed and written):
        return EXIT_CODES["failed"]
    return EXIT_CODES["ok"]


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main function to run the fuzzy geometry lab."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return run(args)
    except ValueError as e:
        logger.error("[Config Error] %s", e)
        return EXIT_CODES["usage"]


if __name__ == '__main__':
    sys.exit(main())
