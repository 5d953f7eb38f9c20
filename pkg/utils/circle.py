"""
Fuzzy circle module implementing SOLID principles.
Builds the (2L+1)-dimensional operator algebra of the truncated circle, its su(2)
realization, the O(2) action and the projected derivatives.

Basis index m in {-L, ..., L} maps to row m + L.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from .interfaces import OperatorModelInterface, VerificationSuiteInterface
from .config import GENERATION_CONFIG, TOLERANCE_CONFIG
from .linalg import (
    OperatorMatrix,
    algebra_span_dimension,
    anticommutator,
    commutator,
    hermitian_eig,
    lagrange_projector_coefficients,
    matrix_polynomial,
    max_residual,
    unitary_exponential,
)
from .report import VerificationReport

logger = logging.getLogger(__name__)


def default_k_schedule(cutoff: int) -> float:
    """k = L^2 (L+1)^2."""
    if cutoff < 1:
        raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
    return float(cutoff ** 2 * (cutoff + 1) ** 2)


def circle_consistency(cutoff: int, k: float) -> bool:
    """L^2 < 2 sqrt(2k) - 2."""
    return cutoff ** 2 < 2.0 * np.sqrt(2.0 * k) - 2.0


@dataclass(frozen=True)
class CircleModel(OperatorModelInterface):
    """Truncated circle: xi(+-), L, H, R^2 and the eigenprojectors of L."""

    cutoff: int
    k: float
    consistent: bool
    xi_plus: OperatorMatrix
    xi_minus: OperatorMatrix
    angular: OperatorMatrix
    hamiltonian: OperatorMatrix
    radius_squared: OperatorMatrix
    projectors: Dict[int, OperatorMatrix] = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def mu(self) -> float:
        return 1.0 + self.cutoff * (self.cutoff + 1) / self.k

    @property
    def levels(self) -> range:
        return range(-self.cutoff, self.cutoff + 1)

    def index(self, m: int) -> int:
        return m + self.cutoff

    def operators(self) -> Dict[str, OperatorMatrix]:
        return {
            "xi_plus": self.xi_plus,
            "xi_minus": self.xi_minus,
            "L": self.angular,
            "H": self.hamiltonian,
            "R2": self.radius_squared,
        }

    def describe(self) -> Dict[str, Any]:
        return {"d": 2, "lambda": self.cutoff, "k": self.k, "dim": self.dim, "consistent": self.consistent}


def build_circle(cutoff: int, k: float) -> CircleModel:
    """Build the fuzzy circle operators for cutoff L and stiffness k."""
    if cutoff < 1:
        raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")

    dim = 2 * cutoff + 1
    xi = np.zeros((dim, dim), dtype=complex)
    for m in range(-cutoff, cutoff):
        xi[m + 1 + cutoff, m + cutoff] = np.sqrt(1.0 + m * (m + 1) / k) / np.sqrt(2.0)
    xi_plus = OperatorMatrix(xi)
    xi_minus = xi_plus.adjoint()
    levels = np.arange(-cutoff, cutoff + 1, dtype=float)
    angular = OperatorMatrix.diagonal(levels)
    projectors = {}
    for m in range(-cutoff, cutoff + 1):
        unit = np.zeros(dim)
        unit[m + cutoff] = 1.0
        projectors[m] = OperatorMatrix.diagonal(unit)

    consistent = circle_consistency(cutoff, k)
    if not consistent:
        logger.warning("[Circle] L=%d, k=%.17g violates L^2 < 2 sqrt(2k) - 2", cutoff, k)

    return CircleModel(
        cutoff=cutoff,
        k=float(k),
        consistent=consistent,
        xi_plus=xi_plus,
        xi_minus=xi_minus,
        angular=angular,
        hamiltonian=angular @ angular,
        radius_squared=xi_plus @ xi_minus + xi_minus @ xi_plus,
        projectors=projectors,
    )


class CircleIdentitySuite(VerificationSuiteInterface):
    """Exact algebraic identities of the fuzzy circle."""

    def __init__(self, tolerance: Optional[float] = None):
        self.tolerance = tolerance or TOLERANCE_CONFIG["circle_identity"]

    def verify(self, model: CircleModel) -> VerificationReport:
        """Residuals of nilpotency, minimal polynomial, grading, commutator, radius and projectors."""
        report = VerificationReport(suite="circle_identities", parameters=model.describe())
        tol = self.tolerance * model.dim
        lam = model.cutoff
        identity = OperatorMatrix.identity(model.dim)
        p_top, p_bottom = model.projectors[lam], model.projectors[-lam]

        report.add(
            "circle_nilpotency",
            max(model.xi_plus.power(model.dim).max_abs(), model.xi_minus.power(model.dim).max_abs()),
            tol,
        )

        product = identity
        for m in model.levels:
            product = product @ (model.angular - m * identity)
        report.add("circle_minimal_polynomial", product.max_abs(), tol)

        grading = max(
            max_residual(commutator(model.angular, model.xi_plus), model.xi_plus),
            max_residual(commutator(model.angular, model.xi_minus), -model.xi_minus),
        )
        report.add("circle_grading", grading, tol)

        expected = -model.angular / model.k + (p_top - p_bottom) * (model.mu / 2.0)
        report.add("circle_xi_commutator", max_residual(commutator(model.xi_plus, model.xi_minus), expected), tol)

        expected = identity + model.hamiltonian / model.k - (p_top + p_bottom) * (model.mu / 2.0)
        report.add("circle_radius_squared", max_residual(model.radius_squared, expected), tol)

        worst = 0.0
        points = list(model.levels)
        for m in points:
            coeffs = lagrange_projector_coefficients(points, m)
            magnitude = float(np.sum(np.abs(coeffs) * float(lam) ** np.arange(len(coeffs))))
            residual = max_residual(matrix_polynomial(model.angular, coeffs), model.projectors[m])
            worst = max(worst, residual / max(1.0, magnitude))
        report.add("circle_projector_polynomial", worst, tol, detail="residual scaled by sum |c_i| L^i")
        return report


def verify_circle_identities(model: CircleModel) -> VerificationReport:
    return CircleIdentitySuite().verify(model)


def circle_spectra(model: CircleModel) -> Dict[str, np.ndarray]:
    """Ascending eigenvalues of H, R^2 and L."""
    return {name: hermitian_eig(model.operators()[name]).eigenvalues for name in ("H", "R2", "L")}


def circle_generation_dimension(model: CircleModel) -> int:
    """Span dimension of words in xi(+-) of length <= 4L."""
    if model.cutoff > GENERATION_CONFIG["circle_max_lambda"]:
        logger.info("[Circle] Generation check above L=%d is slow", GENERATION_CONFIG["circle_max_lambda"])
    return algebra_span_dimension([model.xi_plus, model.xi_minus], max_length=4 * model.cutoff)


@dataclass(frozen=True)
class So3Realization:
    """su(2) generators E(+-), E0 and the spectral maps f(+-), f_u."""

    cutoff: int
    k: float
    e_plus: OperatorMatrix
    e_minus: OperatorMatrix
    e_zero: OperatorMatrix

    def f_plus(self, s: float) -> float:
        return float(np.sqrt((1.0 + s * (s - 1) / self.k) / (self.cutoff * (self.cutoff + 1) - s * (s - 1))))

    def f_minus(self, s: float) -> float:
        return self.f_plus(s + 1)

    def f_unitary(self, s: float) -> float:
        """Rescaling turning E+ into the partial isometry u on the truncated space."""
        return float(np.sqrt(2.0 / (self.cutoff * (self.cutoff + 1) - s * (s - 1))))

    def f_plus_inverse_squared(self, s: float) -> float:
        """1/f_+(s)^2, finite at s = L + 1 where it vanishes."""
        return (self.cutoff * (self.cutoff + 1) - s * (s - 1)) / (1.0 + s * (s - 1) / self.k)

    def casimir(self) -> OperatorMatrix:
        identity = OperatorMatrix.identity(self.e_zero.dim)
        return 2.0 * (self.e_plus @ self.e_minus) + self.e_zero @ (self.e_zero - identity)


def build_so3_realization(model: CircleModel) -> So3Realization:
    """Spin-L matrices with [E+, E-] = E0."""
    lam = model.cutoff
    e = np.zeros((model.dim, model.dim), dtype=complex)
    for m in range(-lam, lam):
        e[m + 1 + lam, m + lam] = np.sqrt(lam * (lam + 1) - m * (m + 1)) / np.sqrt(2.0)
    e_plus = OperatorMatrix(e)
    return So3Realization(
        cutoff=lam, k=model.k, e_plus=e_plus, e_minus=e_plus.adjoint(), e_zero=model.angular,
    )


def _row_scaling(model: CircleModel, function: Callable[[float], float], image_rows) -> OperatorMatrix:
    # diagonal weight on the image rows only, zero elsewhere
    weights = np.zeros(model.dim)
    for s in image_rows:
        weights[model.index(s)] = function(s)
    return OperatorMatrix.diagonal(weights)


class So3RealizationSuite(VerificationSuiteInterface):
    """su(2) relations and the xi <-> E maps."""

    def __init__(self, tolerance: Optional[float] = None):
        self.tolerance = tolerance or TOLERANCE_CONFIG["circle_identity"]

    def verify(self, model: CircleModel) -> VerificationReport:
        """Check su(2), both Casimir forms and the factorization of xi(+-)."""
        real = build_so3_realization(model)
        lam = model.cutoff
        tol = self.tolerance * model.dim
        identity = OperatorMatrix.identity(model.dim)
        report = VerificationReport(suite="circle_so3", parameters=model.describe())

        report.add("so3_plus_minus", max_residual(commutator(real.e_plus, real.e_minus), real.e_zero), tol)
        report.add(
            "so3_grading",
            max(
                max_residual(commutator(real.e_zero, real.e_plus), real.e_plus),
                max_residual(commutator(real.e_zero, real.e_minus), -real.e_minus),
            ),
            tol,
        )
        report.add("so3_casimir", max_residual(real.casimir(), identity * (lam * (lam + 1))), tol)

        upper_rows = range(-lam + 1, lam + 1)
        lower_rows = range(-lam, lam)
        xi_plus = _row_scaling(model, real.f_plus, upper_rows) @ real.e_plus
        xi_minus = _row_scaling(model, real.f_minus, lower_rows) @ real.e_minus
        report.add(
            "so3_xi_factorization",
            max(max_residual(xi_plus, model.xi_plus), max_residual(xi_minus, model.xi_minus)),
            tol,
        )
        e_plus = _row_scaling(model, lambda s: 1.0 / real.f_plus(s), upper_rows) @ model.xi_plus
        e_minus = _row_scaling(model, lambda s: 1.0 / real.f_minus(s), lower_rows) @ model.xi_minus
        report.add(
            "so3_inverse_factorization",
            max(max_residual(e_plus, real.e_plus), max_residual(e_minus, real.e_minus)),
            tol,
        )

        shifted = OperatorMatrix.diagonal([real.f_plus_inverse_squared(m + 1) for m in model.levels])
        lhs = 2.0 * (model.xi_minus @ model.xi_plus) @ shifted
        rhs = identity * (lam * (lam + 1)) - model.angular @ (model.angular + identity)
        report.add("so3_casimir_from_xi", max_residual(lhs, rhs), tol)

        unitary = _row_scaling(model, real.f_unitary, upper_rows) @ real.e_plus
        isometry = unitary.adjoint() @ unitary - (identity - model.projectors[lam])
        report.add("so3_partial_isometry", isometry.max_abs(), tol)

        return report


def verify_so3_realization(model: CircleModel) -> VerificationReport:
    return So3RealizationSuite().verify(model)


@dataclass(frozen=True)
class TransformResult:
    """Conjugated operator set with the law residuals."""

    kind: str
    unitary: OperatorMatrix
    operators: Dict[str, OperatorMatrix]
    report: VerificationReport


def o2_transform(model: CircleModel, kind: str = "rotation", theta: float = 0.0) -> TransformResult:
    """Conjugate xi(+-), L by a rotation exp(i theta E0) or the reflection exp(i pi Jx)."""
    real = build_so3_realization(model)
    if kind == "rotation":
        unitary = unitary_exponential(real.e_zero, theta)
    elif kind == "reflection":
        jx = (real.e_plus + real.e_minus) / np.sqrt(2.0)
        unitary = unitary_exponential(jx, np.pi)
    else:
        raise ValueError(f"Unknown O(2) transformation: {kind}")

    conj = unitary.adjoint()
    moved = {name: unitary @ op @ conj for name, op in (
        ("xi_plus", model.xi_plus), ("xi_minus", model.xi_minus), ("L", model.angular),
    )}
    tol = TOLERANCE_CONFIG["transform"] * model.dim
    report = VerificationReport(suite=f"circle_{kind}", parameters={**model.describe(), "theta": theta})
    report.add(
        "unitarity",
        max_residual(unitary @ conj, OperatorMatrix.identity(model.dim)),
        TOLERANCE_CONFIG["unitary"] * model.dim,
    )

    if kind == "rotation":
        report.add(
            "rotation_phase_law",
            max(
                max_residual(moved["xi_plus"], model.xi_plus * np.exp(1j * theta)),
                max_residual(moved["xi_minus"], model.xi_minus * np.exp(-1j * theta)),
            ),
            tol,
        )
        report.add("rotation_fixes_angular", max_residual(moved["L"], model.angular), tol)
    else:
        report.add("reflection_flips_angular", max_residual(moved["L"], -model.angular), tol)
        report.add(
            "reflection_swaps_ladders",
            max(max_residual(moved["xi_plus"], model.xi_minus), max_residual(moved["xi_minus"], model.xi_plus)),
            tol,
        )

    top = unitary @ model.projectors[model.cutoff] @ conj
    bottom = unitary @ model.projectors[-model.cutoff] @ conj
    expected = -moved["L"] / model.k + (top - bottom) * (model.mu / 2.0)
    report.add("transformed_xi_commutator", max_residual(commutator(moved["xi_plus"], moved["xi_minus"]), expected), tol)
    return TransformResult(kind=kind, unitary=unitary, operators=moved, report=report)


def derivative_coefficient(m: int, k: float) -> float:
    """Truncated coefficient c(m) with d+ psi_m = c(m) psi_{m-1} / sqrt(2)."""
    s = np.sqrt(2.0 * k)
    b = -0.5 + 3.0 / (8.0 * s) + 63.0 / (128.0 * k)
    return b + m - 3.0 * m / (4.0 * s) - (m ** 3 - 1.5 * m ** 2 + 79.0 * m / 32.0) / (2.0 * k)


@dataclass(frozen=True)
class ProjectedDerivatives:
    """d+, d- with their commutator and anticommutator."""

    d_plus: OperatorMatrix
    d_minus: OperatorMatrix
    commutator: OperatorMatrix
    anticommutator: OperatorMatrix
    report: VerificationReport


def projected_derivatives(model: CircleModel) -> ProjectedDerivatives:
    """Band matrices from the printed coefficients, truncated at order 1/k."""
    lam, k = model.cutoff, model.k
    d = np.zeros((model.dim, model.dim), dtype=complex)
    for m in range(-lam + 1, lam + 1):
        d[model.index(m - 1), model.index(m)] = derivative_coefficient(m, k) / np.sqrt(2.0)
    d_plus = OperatorMatrix(d)
    d_minus = d_plus.adjoint()
    bracket = commutator(d_plus, d_minus)
    symmetric = anticommutator(d_plus, d_minus)

    s = np.sqrt(2.0 * k)
    report = VerificationReport(suite="circle_derivatives", parameters=model.describe())
    floor = TOLERANCE_CONFIG["circle_identity"] * model.dim * max(1.0, lam ** 2)

    off_diagonal = max(
        np.max(np.abs(bracket.data - np.diag(np.diag(bracket.data)))),
        np.max(np.abs(symmetric.data - np.diag(np.diag(symmetric.data)))),
    )
    report.add("derivative_brackets_diagonal", float(off_diagonal), floor)

    # c(m) = u + alpha/s + beta/k exactly, u = m - 1/2
    def remainder(m: float) -> float:
        u = m - 0.5
        alpha = -0.75 * u
        beta = -u ** 3 / 2.0 - 55.0 * u / 64.0
        return abs(2.0 * alpha * beta / (s * k) + beta ** 2 / k ** 2)

    bound = max(remainder(m) for m in range(-lam, lam + 2))
    worst_bracket, worst_symmetric = 0.0, 0.0
    for m in range(-lam + 1, lam):
        i = model.index(m)
        expected_bracket = m - 3.0 * m / (2.0 * s) - (4.0 * m ** 3 + 31.0 * m / 8.0) / (2.0 * k)
        expected_symmetric = (
            m ** 2 + 0.25 - (1.5 * m ** 2 + 0.375) / s - (2.0 * m ** 4 + 47.0 * m ** 2 / 8.0 + 27.0 / 32.0) / (2.0 * k)
        )
        worst_bracket = max(worst_bracket, abs(bracket.data[i, i].real - expected_bracket))
        worst_symmetric = max(worst_symmetric, abs(symmetric.data[i, i].real - expected_symmetric))
    report.add("derivative_commutator_interior", worst_bracket, 2.0 * bound + floor)
    report.add("derivative_anticommutator_interior", worst_symmetric, 2.0 * bound + floor)

    top, bottom = model.index(lam), model.index(-lam)
    boundary = max(
        abs(bracket.data[top, top].real + derivative_coefficient(lam, k) ** 2 / 2.0),
        abs(bracket.data[bottom, bottom].real - derivative_coefficient(-lam + 1, k) ** 2 / 2.0),
        abs(symmetric.data[top, top].real - derivative_coefficient(lam, k) ** 2 / 2.0),
        abs(symmetric.data[bottom, bottom].real - derivative_coefficient(-lam + 1, k) ** 2 / 2.0),
    )
    report.add("derivative_boundary_terms", boundary, floor)
    return ProjectedDerivatives(
        d_plus=d_plus, d_minus=d_minus, commutator=bracket, anticommutator=symmetric, report=report,
    )
