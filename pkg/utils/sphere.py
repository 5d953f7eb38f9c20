"""
Fuzzy sphere module implementing SOLID principles.
Builds the (L+1)^2-dimensional operator algebra of the truncated sphere, its so(4)
realization (g(l) in product and Gamma form, theta ladders), the fuzzy spherical
harmonics and the O(3) action.

Basis index (l, m), 0 <= l <= L, |m| <= l, maps to row l^2 + l + m.
Spherical components a in {-1, 0, 1} relate to Cartesian ones by
v(+-) = (v1 +- i v2) / sqrt(2), v0 = v3.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import gammaln, loggamma

from .interfaces import OperatorModelInterface, VerificationSuiteInterface
from .config import GENERATION_CONFIG, TOLERANCE_CONFIG
from .harmonics import SIGNS, LadderTable, ladder_coefficients
from .linalg import (
    OperatorMatrix,
    algebra_span_dimension,
    commutator,
    hermitian_eig,
    max_residual,
    unitary_exponential,
)
from .report import VerificationReport

logger = logging.getLogger(__name__)

AXES = (1, 2, 3)
LEVI_CIVITA: Dict[Tuple[int, int, int], int] = {
    (1, 2, 3): 1, (2, 3, 1): 1, (3, 1, 2): 1,
    (3, 2, 1): -1, (1, 3, 2): -1, (2, 1, 3): -1,
}


def epsilon(i: int, j: int, h: int) -> int:
    return LEVI_CIVITA.get((i, j, h), 0)


def sphere_index(l: int, m: int) -> int:
    return l * l + l + m


def sphere_consistency(cutoff: int, k: float) -> bool:
    """L(L+1) <= 2 sqrt(2k)."""
    return cutoff * (cutoff + 1) <= 2.0 * np.sqrt(2.0 * k)


def radial_weights(cutoff: int, k: float) -> np.ndarray:
    """c_l = sqrt(1 + l^2/k) for 1 <= l <= L; c_0 = c_(L+1) = 0."""
    c = np.zeros(cutoff + 2)
    for l in range(1, cutoff + 1):
        c[l] = np.sqrt(1.0 + l * l / k)
    return c


def commutator_coefficient(cutoff: int, k: float) -> float:
    """K = 1/k + (1 + L^2/k) / (2L + 1)."""
    return 1.0 / k + (1.0 + cutoff ** 2 / k) / (2 * cutoff + 1)


def spherical_to_cartesian(ops: Dict[int, OperatorMatrix]) -> Dict[int, OperatorMatrix]:
    """(v(+), v(-), v0) -> (v1, v2, v3)."""
    root = np.sqrt(2.0)
    return {
        1: (ops[1] + ops[-1]) / root,
        2: (ops[1] - ops[-1]) * (-1j / root),
        3: ops[0],
    }


def _ladder_matrices(
    cutoff: int, ladders: LadderTable, weights: Sequence[float]
) -> Dict[int, OperatorMatrix]:
    # weights[l] multiplies the l -> l-1 coupling, weights[l+1] the l -> l+1 one
    dim = (cutoff + 1) ** 2
    blocks = {a: np.zeros((dim, dim), dtype=complex) for a in SIGNS}
    for l in range(cutoff + 1):
        for m in range(-l, l + 1):
            column = sphere_index(l, m)
            for a in SIGNS:
                if l >= 1 and abs(m + a) <= l - 1:
                    blocks[a][sphere_index(l - 1, m + a), column] = weights[l] * ladders.A(a, l, m)
                if l + 1 <= cutoff:
                    blocks[a][sphere_index(l + 1, m + a), column] = weights[l + 1] * ladders.B(a, l, m)
    return {a: OperatorMatrix(block) for a, block in blocks.items()}


def angular_matrices(cutoff: int, ladders: LadderTable) -> Dict[int, OperatorMatrix]:
    dim = (cutoff + 1) ** 2
    zero = np.zeros(dim)
    raising = np.zeros((dim, dim), dtype=complex)
    for l in range(cutoff + 1):
        for m in range(-l, l + 1):
            zero[sphere_index(l, m)] = m
            if m < l:
                raising[sphere_index(l, m + 1), sphere_index(l, m)] = ladders.gamma(1, l, m)
    plus = OperatorMatrix(raising)
    return {1: plus, 0: OperatorMatrix.diagonal(zero), -1: plus.adjoint()}


def _block_diagonal(cutoff: int, function) -> OperatorMatrix:
    values = []
    for l in range(cutoff + 1):
        values.extend([function(l)] * (2 * l + 1))
    return OperatorMatrix.diagonal(values)


@dataclass(frozen=True)
class SphereModel(OperatorModelInterface):
    """Truncated sphere: x(a), L(a) in spherical and Cartesian form, L^2, H, R^2, P_l."""

    cutoff: int
    k: float
    consistent: bool
    x: Dict[int, OperatorMatrix] = field(repr=False)
    x_cart: Dict[int, OperatorMatrix] = field(repr=False)
    angular: Dict[int, OperatorMatrix] = field(repr=False)
    angular_cart: Dict[int, OperatorMatrix] = field(repr=False)
    casimir: OperatorMatrix = field(repr=False)
    hamiltonian: OperatorMatrix = field(repr=False)
    radius_squared: OperatorMatrix = field(repr=False)
    projectors: Dict[int, OperatorMatrix] = field(repr=False)
    weights: np.ndarray = field(repr=False)
    ladders: LadderTable = field(repr=False)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    @property
    def K(self) -> float:
        return commutator_coefficient(self.cutoff, self.k)

    def index(self, l: int, m: int) -> int:
        return sphere_index(l, m)

    def operators(self) -> Dict[str, OperatorMatrix]:
        ops = {
            "x_plus": self.x[1], "x_zero": self.x[0], "x_minus": self.x[-1],
            "L_plus": self.angular[1], "L_zero": self.angular[0], "L_minus": self.angular[-1],
            "L2": self.casimir, "H": self.hamiltonian, "R2": self.radius_squared,
        }
        for i in AXES:
            ops[f"x_{i}"] = self.x_cart[i]
            ops[f"L_{i}"] = self.angular_cart[i]
        return ops

    def describe(self) -> Dict[str, Any]:
        return {"d": 3, "lambda": self.cutoff, "k": self.k, "dim": self.dim, "consistent": self.consistent}


def build_sphere(cutoff: int, k: float, ladders: Optional[LadderTable] = None) -> SphereModel:
    """Build the fuzzy sphere operators for cutoff L and stiffness k."""
    if cutoff < 1:
        raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if ladders is None:
        ladders = ladder_coefficients(cutoff)
    if not ladders.covers(cutoff + 1):
        raise ValueError(f"Ladder table up to l={ladders.max_l} does not cover l={cutoff + 1}")

    consistent = sphere_consistency(cutoff, k)
    if not consistent:
        logger.warning("[Sphere] L=%d, k=%.17g violates L(L+1) <= 2 sqrt(2k)", cutoff, k)

    weights = radial_weights(cutoff, k)
    x = _ladder_matrices(cutoff, ladders, weights)
    angular = angular_matrices(cutoff, ladders)
    angular_cart = spherical_to_cartesian(angular)
    casimir = angular_cart[1] @ angular_cart[1] + angular_cart[2] @ angular_cart[2] + angular_cart[3] @ angular_cart[3]
    projectors = {
        l: _block_diagonal(cutoff, lambda level, target=l: 1.0 if level == target else 0.0)
        for l in range(cutoff + 1)
    }

    return SphereModel(
        cutoff=cutoff,
        k=float(k),
        consistent=consistent,
        x=x,
        x_cart=spherical_to_cartesian(x),
        angular=angular,
        angular_cart=angular_cart,
        casimir=casimir,
        hamiltonian=_block_diagonal(cutoff, lambda l: l * (l + 1)),
        radius_squared=sum((x[a] @ x[-a] for a in SIGNS[1:]), x[-1] @ x[1]),
        projectors=projectors,
        weights=weights,
        ladders=ladders,
    )


class SphereIdentitySuite(VerificationSuiteInterface):
    """Exact algebraic identities of the fuzzy sphere."""

    def __init__(self, tolerance: Optional[float] = None):
        self.tolerance = tolerance or TOLERANCE_CONFIG["sphere_identity"]

    def verify(self, model: SphereModel) -> VerificationReport:
        """Residuals of the minimal polynomials, nilpotency, so(3) covariance, x.L, [x, x] and R^2."""
        report = VerificationReport(suite="sphere_identities", parameters=model.describe())
        tol = self.tolerance * model.dim
        lam, k = model.cutoff, model.k
        identity = OperatorMatrix.identity(model.dim)
        x, L = model.x_cart, model.angular_cart

        product, magnitude = identity, 1.0
        for l in range(lam + 1):
            product = product @ (model.casimir - l * (l + 1) * identity)
            magnitude *= max(1.0, float(max(abs(j * (j + 1) - l * (l + 1)) for j in range(lam + 1))))
        report.add(
            "sphere_casimir_polynomial",
            product.max_abs() / magnitude,
            tol,
            detail="residual scaled by product of factor norms",
        )

        worst = 0.0
        for l in range(lam + 1):
            block = model.projectors[l]
            for m in range(-l, l + 1):
                block = (L[3] - m * identity) @ block
            worst = max(worst, block.max_abs())
        report.add("sphere_angular_polynomial", worst, tol)

        report.add(
            "sphere_nilpotency",
            max(model.x[1].power(2 * lam + 1).max_abs(), model.x[-1].power(2 * lam + 1).max_abs()),
            tol,
        )

        covariance, algebra, bracket = 0.0, 0.0, 0.0
        shift = identity * (-1.0 / k) + model.projectors[lam] * model.K
        for i in AXES:
            for j in AXES:
                rotated_x = OperatorMatrix.zeros(model.dim)
                rotated_l = OperatorMatrix.zeros(model.dim)
                expected = OperatorMatrix.zeros(model.dim)
                for h in AXES:
                    e = epsilon(i, j, h)
                    if e:
                        rotated_x = rotated_x + x[h] * (1j * e)
                        rotated_l = rotated_l + L[h] * (1j * e)
                        expected = expected + (shift @ L[h]) * (1j * e)
                covariance = max(covariance, max_residual(commutator(L[i], x[j]), rotated_x))
                algebra = max(algebra, max_residual(commutator(L[i], L[j]), rotated_l))
                bracket = max(bracket, max_residual(commutator(x[i], x[j]), expected))
        report.add("sphere_vector_covariance", covariance, tol)
        report.add("sphere_angular_algebra", algebra, tol)
        report.add("sphere_orthogonality", (x[1] @ L[1] + x[2] @ L[2] + x[3] @ L[3]).max_abs(), tol)
        report.add("sphere_xi_commutator", bracket, tol)

        expected = (
            identity
            + (model.casimir + identity) / k
            - model.projectors[lam] * ((1.0 + (lam + 1) ** 2 / k) * (lam + 1) / (2 * lam + 1))
        )
        report.add("sphere_radius_squared", max_residual(model.radius_squared, expected), tol)

        if k == float(lam ** 2 * (lam + 1) ** 2):
            base = 1.0 / (lam ** 2 * (lam + 1) ** 2)
            special = identity * (-base) + model.projectors[lam] * (base + (1.0 + 1.0 / (lam + 1) ** 2) / (2 * lam + 1))
            worst = 0.0
            for i, j, h in LEVI_CIVITA:
                e = epsilon(i, j, h)
                worst = max(worst, max_residual(commutator(x[i], x[j]), (special @ L[h]) * (1j * e)))
            report.add("sphere_specialized_commutator", worst, tol, detail="k = L^2 (L+1)^2")
        return report


def verify_sphere_identities(model: SphereModel) -> VerificationReport:
    return SphereIdentitySuite().verify(model)


def sphere_spectra(model: SphereModel) -> Dict[str, np.ndarray]:
    """Ascending eigenvalues of H, R^2 and L^2."""
    return {name: hermitian_eig(model.operators()[name]).eigenvalues for name in ("H", "R2", "L2")}


def sphere_generation_dimension(model: SphereModel) -> int:
    """Span dimension of all words in x(+), x(-), x0."""
    if model.cutoff > GENERATION_CONFIG["sphere_max_lambda"]:
        logger.info("[Sphere] Generation check above L=%d is slow", GENERATION_CONFIG["sphere_max_lambda"])
    return algebra_span_dimension([model.x[1], model.x[-1], model.x[0]])


def so4_weight(cutoff: int, l: int) -> float:
    """d_l = sqrt((L+1)^2 - l^2)."""
    return float(np.sqrt(max(0.0, (cutoff + 1) ** 2 - l * l)))


def g_product_form(l: int, cutoff: int, k: float) -> float:
    """g(l) from the finite products, evaluated in log space."""
    if l < 0 or l > cutoff:
        raise ValueError(f"g(l) needs 0 <= l <= L, got l={l}, L={cutoff}")
    log_value = sum(np.log(cutoff + l - 2 * h) for h in range(l))
    log_value -= sum(np.log(cutoff + l + 1 - 2 * h) for h in range(l + 1))
    for j in range((l + 1) // 2):
        log_value += np.log1p((l - 2 * j) ** 2 / k) - np.log1p((l - 1 - 2 * j) ** 2 / k)
    return float(np.exp(0.5 * log_value))


def g_gamma_form(l: int, cutoff: int, k: float) -> float:
    """g(l) from the Gamma-function closed form via complex log-Gamma."""
    if l < 0 or l > cutoff:
        raise ValueError(f"g(l) needs 0 <= l <= L, got l={l}, L={cutoff}")
    y = np.sqrt(k) / 2.0
    log_value = (
        gammaln((cutoff + l) / 2.0 + 1.0)
        + gammaln((cutoff - l + 1) / 2.0)
        - gammaln((cutoff + 1 + l) / 2.0 + 1.0)
        - gammaln((cutoff - l) / 2.0 + 1.0)
    )
    # Gamma(z) Gamma(conj z) = exp(2 Re log Gamma(z))
    log_value += 2.0 * loggamma(l / 2.0 + 1.0 + 1j * y).real
    log_value -= 2.0 * loggamma((l + 1) / 2.0 + 1j * y).real
    log_value -= 0.5 * np.log(k)
    return float(np.exp(0.5 * log_value))


def gamma_form_ratio(l: int, k: float) -> float:
    """Expected g_gamma / g_product = coth(pi sqrt(k) / 2) ** ((-1)^l / 2)."""
    coth = 1.0 / np.tanh(np.pi * np.sqrt(k) / 2.0)
    return float(coth ** (0.5 * (-1) ** l))


@dataclass(frozen=True)
class So4Realization:
    """so(4) generators L, X, the su(2) + su(2) split E1, E2 and the rescaling g."""

    cutoff: int
    k: float
    L: Dict[int, OperatorMatrix] = field(repr=False)
    X: Dict[int, OperatorMatrix] = field(repr=False)
    X_spherical: Dict[int, OperatorMatrix] = field(repr=False)
    E1: Dict[int, OperatorMatrix] = field(repr=False)
    E2: Dict[int, OperatorMatrix] = field(repr=False)
    lam: OperatorMatrix = field(repr=False)
    d: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    def casimir(self, family: Dict[int, OperatorMatrix]) -> OperatorMatrix:
        return family[1] @ family[1] + family[2] @ family[2] + family[3] @ family[3]

    def g_of(self, function=None) -> OperatorMatrix:
        """g(lambda), or function(g)(lambda)."""
        values = self.g if function is None else function(self.g)
        return _block_diagonal(self.cutoff, lambda l: values[l])

    def to_frame(self) -> pd.DataFrame:
        """Per-level table l, d_l, g_product, g_gamma, ratio."""
        rows = []
        for l in range(self.cutoff + 1):
            gamma_value = g_gamma_form(l, self.cutoff, self.k)
            rows.append({
                "l": l,
                "d": float(self.d[l]),
                "g_product": float(self.g[l]),
                "g_gamma": gamma_value,
                "ratio": gamma_value / float(self.g[l]),
            })
        return pd.DataFrame(rows, columns=["l", "d", "g_product", "g_gamma", "ratio"])


def build_so4_realization(model: SphereModel) -> So4Realization:
    """X(a) with d_l in place of c_l, L shared with the model, g from the product form."""
    lam = model.cutoff
    d = np.array([so4_weight(lam, l) for l in range(lam + 2)])
    X_spherical = _ladder_matrices(lam, model.ladders, d)
    X = spherical_to_cartesian(X_spherical)
    L = model.angular_cart
    return So4Realization(
        cutoff=lam,
        k=model.k,
        L=L,
        X=X,
        X_spherical=X_spherical,
        E1={i: (L[i] + X[i]) / 2.0 for i in AXES},
        E2={i: (L[i] - X[i]) / 2.0 for i in AXES},
        lam=_block_diagonal(lam, float),
        d=d,
        g=np.array([g_product_form(l, lam, model.k) for l in range(lam + 1)]),
    )


def _structure_residual(family: Dict[int, OperatorMatrix], target: Dict[int, OperatorMatrix], left=None) -> float:
    # max over i, j of |[left_i, family_j] - i eps_ijh target_h|
    left = family if left is None else left
    worst = 0.0
    dim = family[1].dim
    for i in AXES:
        for j in AXES:
            expected = OperatorMatrix.zeros(dim)
            for h in AXES:
                e = epsilon(i, j, h)
                if e:
                    expected = expected + target[h] * (1j * e)
            worst = max(worst, max_residual(commutator(left[i], family[j]), expected))
    return worst


class So4RealizationSuite(VerificationSuiteInterface):
    """so(4) relations, the su(2) + su(2) split and the g rescaling."""

    def __init__(self, tolerance: Optional[float] = None):
        self.tolerance = tolerance or TOLERANCE_CONFIG["sphere_identity"]

    def verify(self, model: SphereModel) -> VerificationReport:
        """Check so(4), both Casimirs, x = g X g with its inverse, g(l-1) g(l) = c_l/d_l and lambda."""
        real = build_so4_realization(model)
        lam, k = model.cutoff, model.k
        tol = self.tolerance * model.dim
        identity = OperatorMatrix.identity(model.dim)
        report = VerificationReport(suite="sphere_so4", parameters=model.describe())
        L, X = real.L, real.X

        report.add("so4_x_commutator", _structure_residual(X, L), tol)
        report.add("so4_vector_covariance", _structure_residual(X, X, left=L), tol)
        dot_xl = X[1] @ L[1] + X[2] @ L[2] + X[3] @ L[3]
        dot_lx = L[1] @ X[1] + L[2] @ X[2] + L[3] @ X[3]
        report.add("so4_orthogonality", max(dot_xl.max_abs(), dot_lx.max_abs()), tol)
        report.add(
            "so4_casimir_sum",
            max_residual(real.casimir(X) + real.casimir(L), identity * (lam * (lam + 2))),
            tol,
        )

        mixed = 0.0
        for i in AXES:
            for j in AXES:
                mixed = max(mixed, commutator(real.E1[i], real.E2[j]).max_abs())
        report.add("so4_split_commute", mixed, tol)
        report.add(
            "so4_split_algebra",
            max(_structure_residual(real.E1, real.E1), _structure_residual(real.E2, real.E2)),
            tol,
        )
        spin = lam / 2.0 * (lam / 2.0 + 1.0)
        report.add(
            "so4_split_casimirs",
            max(
                max_residual(real.casimir(real.E1), identity * spin),
                max_residual(real.casimir(real.E2), identity * spin),
            ),
            tol,
        )
        report.add(
            "so4_weight_differences",
            max(abs(real.d[l] ** 2 - real.d[l + 1] ** 2 - (2 * l + 1)) for l in range(lam + 1)),
            tol,
        )

        g = real.g_of()
        g_inverse = real.g_of(lambda values: 1.0 / values)
        rescaled = max(max_residual(g @ real.X_spherical[a] @ g, model.x[a]) for a in SIGNS)
        report.add("so4_rescaling", rescaled, tol)
        inverse = max(max_residual(g_inverse @ model.x[a] @ g_inverse, real.X_spherical[a]) for a in SIGNS)
        report.add("so4_inverse_rescaling", inverse, tol)

        ratio = max(
            abs(real.g[l - 1] * real.g[l] * real.d[l] / model.weights[l] - 1.0) for l in range(1, lam + 1)
        )
        report.add("so4_g_recursion", ratio, tol)

        gamma_defect, plain = 0.0, 0.0
        for l in range(lam + 1):
            quotient = g_gamma_form(l, lam, k) / real.g[l]
            gamma_defect = max(gamma_defect, abs(quotient / gamma_form_ratio(l, k) - 1.0))
            plain = max(plain, abs(quotient - 1.0))
        report.add(
            "so4_gamma_form",
            gamma_defect,
            TOLERANCE_CONFIG["gamma_form"],
            detail=f"max |g_gamma/g_product - 1| = {plain:.3e} before the coth factor",
        )

        spectrum = hermitian_eig(model.casimir)
        lam_from_casimir = spectrum.apply(lambda values: (np.sqrt(4.0 * np.clip(values, 0.0, None) + 1.0) - 1.0) / 2.0)
        report.add(
            "so4_lambda_equation",
            max_residual(lam_from_casimir, real.lam),
            TOLERANCE_CONFIG["eigen_reconstruction"] * model.dim,
        )
        return report


def verify_so4_realization(model: SphereModel) -> VerificationReport:
    return So4RealizationSuite().verify(model)


@dataclass(frozen=True)
class ThetaLadders:
    """chi_i and the theta(+-) ladders shifting lambda by one."""

    chi: Dict[int, OperatorMatrix]
    lowering: Dict[int, OperatorMatrix]
    raising: Dict[int, OperatorMatrix]
    report: VerificationReport


def theta_ladders(real: So4Realization) -> ThetaLadders:
    """chi_i = i eps_ijk X_j L_k, theta(-) = [X lambda - chi](2 lambda - 1)(lambda - 1),
    theta(+) = [X (lambda + 1) + chi] lambda (2 lambda + 3)."""
    dim = real.dim
    identity = OperatorMatrix.identity(dim)
    lam = real.lam
    L2 = real.casimir(real.L)
    chi = {}
    for i in AXES:
        total = OperatorMatrix.zeros(dim)
        for j in AXES:
            for h in AXES:
                e = epsilon(i, j, h)
                if e:
                    total = total + (real.X[j] @ real.L[h]) * (1j * e)
        chi[i] = total

    lowering = {
        i: (real.X[i] @ lam - chi[i]) @ (2.0 * lam - identity) @ (lam - identity) for i in AXES
    }
    raising = {
        i: (real.X[i] @ (lam + identity) + chi[i]) @ lam @ (2.0 * lam + 3.0 * identity) for i in AXES
    }

    scale = max(1.0, max(op.max_abs() for op in list(lowering.values()) + list(raising.values())))
    tol = TOLERANCE_CONFIG["sphere_identity"] * dim * scale
    report = VerificationReport(suite="sphere_theta", parameters={"lambda": real.cutoff, "k": real.k})

    shift = max(max_residual(L2 @ real.X[i], real.X[i] @ L2 + 2.0 * (real.X[i] + chi[i])) for i in AXES)
    report.add("theta_casimir_shift", shift, tol)
    report.add(
        "theta_chi_shift",
        max(max_residual(L2 @ chi[i], (chi[i] + 2.0 * real.X[i]) @ L2) for i in AXES),
        tol,
    )
    report.add("theta_lowering", max(max_residual(lam @ lowering[i], lowering[i] @ (lam - identity)) for i in AXES), tol)
    report.add("theta_raising", max(max_residual(lam @ raising[i], raising[i] @ (lam + identity)) for i in AXES), tol)
    nu_minus = (lam - identity) @ lam
    nu_plus = (lam + identity) @ (lam + 2.0 * identity)
    report.add(
        "theta_casimir_eigen",
        max(
            max(max_residual(L2 @ lowering[i], lowering[i] @ nu_minus) for i in AXES),
            max(max_residual(L2 @ raising[i], raising[i] @ nu_plus) for i in AXES),
        ),
        tol,
    )
    report.add("theta_adjoint", max(max_residual(lowering[i].adjoint(), raising[i]) for i in AXES), tol)
    return ThetaLadders(chi=chi, lowering=lowering, raising=raising, report=report)


def harmonic_top_norm(l: int) -> float:
    """M_l = (-1)^l sqrt((2l+1)! / (4 pi)) / (2^(l/2) l!), so that Y_l^l = M_l (t+)^l."""
    log_value = 0.5 * (gammaln(2 * l + 2) - np.log(4.0 * np.pi)) - 0.5 * l * np.log(2.0) - gammaln(l + 1)
    return float((-1) ** l * np.exp(log_value))


def printed_harmonic_top_norm(l: int) -> float:
    """sqrt((2l+1)!! / (4 pi (2l)!!)), the magnitude quoted for sin-based normalization."""
    log_value = 0.5 * (gammaln(2 * l + 2) - np.log(4.0 * np.pi)) - l * np.log(2.0) - gammaln(l + 1)
    return float(np.exp(log_value))


def harmonic_normalization(l: int, m: int) -> float:
    """R_l^m = M_l sqrt((l+m)! 2^(l-m) / ((2l)! (l-m)!))."""
    log_ratio = 0.5 * (gammaln(l + m + 1) + (l - m) * np.log(2.0) - gammaln(2 * l + 1) - gammaln(l - m + 1))
    return harmonic_top_norm(l) * float(np.exp(log_ratio))


@dataclass(frozen=True)
class FuzzyHarmonicSet:
    """Fuzzy spherical harmonics Y(l, m) for l <= l_max."""

    cutoff: int
    l_max: int
    harmonics: Dict[Tuple[int, int], OperatorMatrix] = field(repr=False)
    normalizations: Dict[Tuple[int, int], float] = field(repr=False)

    def __getitem__(self, key: Tuple[int, int]) -> OperatorMatrix:
        return self.harmonics[key]

    def top_norm(self, l: int) -> float:
        return harmonic_top_norm(l)

    def to_frame(self) -> pd.DataFrame:
        """Non-zero entries as (l, m, row, col, re, im)."""
        frames = []
        for (l, m), op in sorted(self.harmonics.items()):
            frame = op.to_frame().drop(columns="name")
            frame.insert(0, "m", m)
            frame.insert(0, "l", l)
            frames.append(frame)
        if not frames:
            return pd.DataFrame(columns=["l", "m", "row", "col", "re", "im"])
        return pd.concat(frames, ignore_index=True)


def build_fuzzy_harmonics(model: SphereModel, l_max: Optional[int] = None) -> FuzzyHarmonicSet:
    """Y(l, m) = R_l^m ad(L-)^(l-m) (x+)^l for 0 <= l <= l_max <= 2L."""
    top = 2 * model.cutoff
    if l_max is None:
        l_max = top
    if l_max < 0 or l_max > top:
        raise ValueError(f"Fuzzy harmonics exist for 0 <= l <= 2L = {top}, got l_max={l_max}")

    harmonics: Dict[Tuple[int, int], OperatorMatrix] = {}
    normalizations: Dict[Tuple[int, int], float] = {}
    lowering = model.angular[-1]
    power = OperatorMatrix.identity(model.dim)
    for l in range(l_max + 1):
        if l > 0:
            power = power @ model.x[1]
        current = power
        for m in range(l, -l - 1, -1):
            norm = harmonic_normalization(l, m)
            harmonics[(l, m)] = current * norm
            normalizations[(l, m)] = norm
            current = commutator(lowering, current)
    logger.debug("[Sphere] Built %d fuzzy harmonics up to l=%d", len(harmonics), l_max)
    return FuzzyHarmonicSet(cutoff=model.cutoff, l_max=l_max, harmonics=harmonics, normalizations=normalizations)


def verify_fuzzy_harmonics(harmonics: FuzzyHarmonicSet, model: SphereModel) -> VerificationReport:
    """Grading under ad(L0), conjugation symmetry and tracelessness."""
    report = VerificationReport(
        suite="fuzzy_harmonics", parameters={**model.describe(), "l_max": harmonics.l_max}
    )
    base = TOLERANCE_CONFIG["sphere_identity"] * model.dim
    grading, conjugation, trace = 0.0, 0.0, 0.0
    for (l, m), op in harmonics.harmonics.items():
        scale = max(1.0, op.max_abs())
        grading = max(grading, max_residual(commutator(model.angular[0], op), op * m) / scale)
        conjugation = max(conjugation, max_residual(op.adjoint(), harmonics[(l, -m)] * (-1) ** m) / scale)
        if l >= 1:
            trace = max(trace, abs(op.trace()) / scale)
    report.add("harmonic_grading", grading, base, detail="relative to max |Y|")
    report.add("harmonic_conjugation", conjugation, base, detail="relative to max |Y|")
    report.add("harmonic_trace_free", trace, base, detail="relative to max |Y|")
    return report


@dataclass(frozen=True)
class SphereTransformResult:
    """O(3)-conjugated model with the law residuals and the extracted rotation."""

    kind: str
    unitary: OperatorMatrix
    model: SphereModel
    rotation: np.ndarray
    report: VerificationReport


def _conjugate_model(model: SphereModel, unitary: OperatorMatrix) -> SphereModel:
    conj = unitary.adjoint()

    def move(op: OperatorMatrix) -> OperatorMatrix:
        return unitary @ op @ conj

    return dataclasses.replace(
        model,
        x={a: move(op) for a, op in model.x.items()},
        x_cart={i: move(op) for i, op in model.x_cart.items()},
        angular={a: move(op) for a, op in model.angular.items()},
        angular_cart={i: move(op) for i, op in model.angular_cart.items()},
        casimir=move(model.casimir),
        hamiltonian=move(model.hamiltonian),
        radius_squared=move(model.radius_squared),
        projectors={l: move(op) for l, op in model.projectors.items()},
    )


def _rotation_matrix(before: Dict[int, OperatorMatrix], after: Dict[int, OperatorMatrix]) -> np.ndarray:
    # R[j, i] = <v_j, U v_i U^H> / <v_j, v_j> in the Hilbert-Schmidt product
    rotation = np.zeros((3, 3))
    for i in AXES:
        for j in AXES:
            overlap = np.vdot(before[j].data, after[i].data)
            rotation[j - 1, i - 1] = overlap.real / np.vdot(before[j].data, before[j].data).real
    return rotation


def o3_transform(
    model: SphereModel, kind: str = "rotation", angles: Sequence[float] = (0.0, 0.0, 0.0)
) -> SphereTransformResult:
    """Conjugate by exp(i sum_i alpha_i L_i) or by the parity diag((-1)^l)."""
    if kind == "rotation":
        if len(angles) != 3:
            raise ValueError(f"Rotation needs three angles, got {len(angles)}")
        generator = sum(
            (model.angular_cart[i] * float(alpha) for i, alpha in zip(AXES, angles)),
            OperatorMatrix.zeros(model.dim),
        )
        unitary = unitary_exponential(generator, 1.0)
    elif kind == "parity":
        unitary = _block_diagonal(model.cutoff, lambda l: (-1.0) ** l)
    else:
        raise ValueError(f"Unknown O(3) transformation: {kind}")

    moved = _conjugate_model(model, unitary)
    tol = TOLERANCE_CONFIG["transform"] * model.dim
    parameters = {**model.describe(), "kind": kind}
    if kind == "rotation":
        parameters["angles"] = [float(alpha) for alpha in angles]
    report = VerificationReport(suite=f"sphere_{kind}", parameters=parameters)
    report.add(
        "unitarity",
        max_residual(unitary @ unitary.adjoint(), OperatorMatrix.identity(model.dim)),
        TOLERANCE_CONFIG["unitary"] * model.dim,
    )

    if kind == "rotation":
        rotation = _rotation_matrix(model.x_cart, moved.x_cart)
        vector_law, angular_law = 0.0, 0.0
        for i in AXES:
            expected_x = sum((model.x_cart[j] * rotation[j - 1, i - 1] for j in AXES), OperatorMatrix.zeros(model.dim))
            expected_l = sum(
                (model.angular_cart[j] * rotation[j - 1, i - 1] for j in AXES), OperatorMatrix.zeros(model.dim)
            )
            vector_law = max(vector_law, max_residual(moved.x_cart[i], expected_x))
            angular_law = max(angular_law, max_residual(moved.angular_cart[i], expected_l))
        report.add("rotation_vector_law", vector_law, tol)
        report.add("rotation_angular_law", angular_law, tol)
        report.add("rotation_orthogonal", float(np.max(np.abs(rotation.T @ rotation - np.eye(3)))), tol)
        report.add("rotation_proper", abs(float(np.linalg.det(rotation)) - 1.0), tol)
    else:
        rotation = -np.eye(3)
        report.add(
            "parity_flips_coordinates",
            max(max_residual(moved.x_cart[i], -model.x_cart[i]) for i in AXES),
            tol,
        )
        report.add(
            "parity_fixes_angular",
            max(max_residual(moved.angular_cart[i], model.angular_cart[i]) for i in AXES),
            tol,
        )
        real = build_so4_realization(model)
        conj = unitary.adjoint()
        report.add(
            "parity_swaps_su2",
            max(max_residual(unitary @ real.E1[i] @ conj, real.E2[i]) for i in AXES),
            tol,
        )

    identities = SphereIdentitySuite().verify(moved)
    for check in identities.checks:
        report.add(f"transformed_{check.name}", check.residual, check.tolerance, detail=check.detail)
    return SphereTransformResult(kind=kind, unitary=unitary, model=moved, rotation=rotation, report=report)
