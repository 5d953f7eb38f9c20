"""
Angular data module for D=3.
Contains the t^a ladder coefficients A, B, the su(2) coefficients gamma,
orthonormal spherical harmonics (Condon-Shortley phase) and Gauss-Legendre sphere quadrature.

Conventions: t^0 = cos(theta), t^(+-) = sin(theta) exp(+-i phi) / sqrt(2), and
    t^a Y_l^m = A[a,l,m] Y_{l-1}^{m+a} + B[a,l,m] Y_{l+1}^{m+a}.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from .config import GRID_CONFIG, TOLERANCE_CONFIG
from .report import VerificationReport

logger = logging.getLogger(__name__)

SQRT_HALF = np.sqrt(0.5)
SIGNS = (-1, 0, 1)


def _root(value: float) -> float:
    return float(np.sqrt(max(0.0, value)))


def _check_ladder_index(a: int) -> None:
    if a not in SIGNS:
        raise ValueError(f"Ladder index must be -1, 0 or 1, got {a}")


def coefficient_a(a: int, l: int, m: int) -> float:
    """<Y_{l-1}^{m+a}, t^a Y_l^m>; zero outside the multiplets."""
    _check_ladder_index(a)
    if l < 1 or abs(m) > l or abs(m + a) > l - 1:
        return 0.0
    denominator = (2 * l + 1) * (2 * l - 1)
    if a == 0:
        return _root((l + m) * (l - m) / denominator)
    if a == 1:
        return SQRT_HALF * _root((l - m) * (l - m - 1) / denominator)
    if a == -1:
        return -SQRT_HALF * _root((l + m) * (l + m - 1) / denominator)


def coefficient_b(a: int, l: int, m: int) -> float:
    """<Y_{l+1}^{m+a}, t^a Y_l^m>; zero outside the multiplets."""
    _check_ladder_index(a)
    if l < 0 or abs(m) > l:
        return 0.0
    denominator = (2 * l + 1) * (2 * l + 3)
    if a == 0:
        return _root((l + m + 1) * (l - m + 1) / denominator)
    if a == 1:
        return -SQRT_HALF * _root((l + m + 1) * (l + m + 2) / denominator)
    if a == -1:
        return SQRT_HALF * _root((l - m + 1) * (l - m + 2) / denominator)


def coefficient_gamma(sign: int, l: int, m: int) -> float:
    """L_(+-) Y_l^m = gamma[+-,l,m] Y_l^{m+-1} with L_(+-) = (L_1 +- i L_2)/sqrt(2)."""
    if sign not in (-1, 1):
        raise ValueError(f"gamma sign must be -1 or 1, got {sign}")
    if l < 0 or abs(m) > l:
        return 0.0
    return SQRT_HALF * _root((l - sign * m) * (l + sign * m + 1))


@dataclass(frozen=True)
class LadderTable:
    """Precomputed A, B, gamma for 0 <= l <= lambda_max + 2."""

    lambda_max: int
    _a: np.ndarray = field(repr=False)
    _b: np.ndarray = field(repr=False)
    _gamma: np.ndarray = field(repr=False)

    @property
    def max_l(self) -> int:
        return self.lambda_max + 2

    @property
    def _offset(self) -> int:
        return self.max_l + 1

    def _lookup(self, table: np.ndarray, row: int, l: int, m: int) -> float:
        column = m + self._offset
        if l < 0 or l > self.max_l or column < 0 or column >= table.shape[2]:
            return 0.0
        return float(table[row, l, column])

    def A(self, a: int, l: int, m: int) -> float:
        return self._lookup(self._a, a + 1, l, m)

    def B(self, a: int, l: int, m: int) -> float:
        return self._lookup(self._b, a + 1, l, m)

    def gamma(self, sign: int, l: int, m: int) -> float:
        return self._lookup(self._gamma, 0 if sign < 0 else 1, l, m)

    def covers(self, l: int) -> bool:
        return 0 <= l <= self.max_l

    def to_frame(self) -> pd.DataFrame:
        """Rows (a, l, m, A, B) for every in-range index."""
        rows = []
        for a in SIGNS:
            for l in range(self.max_l + 1):
                for m in range(-l, l + 1):
                    rows.append({"a": a, "l": l, "m": m, "A": self.A(a, l, m), "B": self.B(a, l, m)})
        return pd.DataFrame(rows, columns=["a", "l", "m", "A", "B"])


def ladder_coefficients(lambda_max: int) -> LadderTable:
    """Build the ladder table from the closed forms."""
    if lambda_max < 0:
        raise ValueError(f"lambda_max must be >= 0, got {lambda_max}")
    max_l = lambda_max + 2
    offset = max_l + 1
    width = 2 * offset + 1
    a_table = np.zeros((3, max_l + 1, width))
    b_table = np.zeros((3, max_l + 1, width))
    g_table = np.zeros((2, max_l + 1, width))
    for l in range(max_l + 1):
        for m in range(-l, l + 1):
            for a in SIGNS:
                a_table[a + 1, l, m + offset] = coefficient_a(a, l, m)
                b_table[a + 1, l, m + offset] = coefficient_b(a, l, m)
            g_table[0, l, m + offset] = coefficient_gamma(-1, l, m)
            g_table[1, l, m + offset] = coefficient_gamma(1, l, m)
    for table in (a_table, b_table, g_table):
        table.setflags(write=False)
    return LadderTable(lambda_max=lambda_max, _a=a_table, _b=b_table, _gamma=g_table)


def verify_ladder_identities(table: LadderTable) -> VerificationReport:
    """Max violation per identity family over 0 <= l <= lambda_max, |m| <= l."""
    A, B, G = table.A, table.B, table.gamma
    tol = TOLERANCE_CONFIG["ladder_identity"]
    worst: Dict[str, float] = {}

    def record(name: str, value: float) -> None:
        worst[name] = max(worst.get(name, 0.0), abs(value))

    for l in range(table.lambda_max + 1):
        for m in range(-l, l + 1):
            for a in SIGNS:
                for b in SIGNS:
                    lhs = A(b, l, m) * A(-a, l, m + a + b) + A(-b, l + 1, m + b) * A(a, l + 1, m + b)
                    rhs = A(a, l, m) * A(-b, l, m + a + b) + A(-a, l + 1, m + a) * A(b, l + 1, m + a)
                    record("ladder_commuting_coordinates", lhs - rhs)
                    record(
                        "ladder_two_step_symmetry",
                        A(b, l + 1, m) * A(a, l, m + b) - A(a, l + 1, m) * A(b, l, m + a),
                    )
            for a in SIGNS:
                record("ladder_lower_upper_relation", A(a, l, m) - B(-a, l - 1, m + a))
            record("ladder_two_step_cancellation", sum(A(a, l + 1, m) * A(-a, l, m + a) for a in SIGNS))
            record("ladder_lower_norm", sum(A(a, l, m) ** 2 for a in SIGNS) - l / (2 * l + 1))
            record("ladder_upper_norm", sum(A(a, l + 1, m - a) ** 2 for a in SIGNS) - (l + 1) / (2 * l + 1))

            record(
                "mixed_angular_momentum_projection",
                A(-1, l, m) * B(1, l - 1, m - 1) - A(1, l, m) * B(-1, l - 1, m + 1) - m / (2 * l + 1),
            )
            record(
                "mixed_lower_trace",
                A(0, l, m) * B(0, l - 1, m) + A(-1, l, m) * B(1, l - 1, m - 1)
                + A(1, l, m) * B(-1, l - 1, m + 1) - l / (2 * l + 1),
            )
            for s in (-1, 1):
                record(
                    "mixed_ladder_commutator",
                    A(s, l, m) * B(0, l - 1, m + s) - A(0, l, m) * B(s, l - 1, m) - s * G(s, l, m) / (2 * l + 1),
                )
                record("mixed_lower_shift", A(s, l, m) * G(s, l - 1, m + s) - A(s, l, m + s) * G(s, l, m))
                record("mixed_upper_shift", B(s, l, m) * G(s, l + 1, m + s) - B(s, l, m + s) * G(s, l, m))
                record(
                    "mixed_lower_zero_rotation",
                    A(0, l, m) * G(s, l - 1, m) - A(0, l, m + s) * G(s, l, m) + s * A(s, l, m),
                )
                record(
                    "mixed_upper_zero_rotation",
                    B(0, l, m) * G(s, l + 1, m) - B(0, l, m + s) * G(s, l, m) + s * B(s, l, m),
                )
                record(
                    "mixed_lower_cross_rotation",
                    A(s, l, m) * G(-s, l - 1, m + s) - A(s, l, m - s) * G(-s, l, m) + s * A(0, l, m),
                )
                record(
                    "mixed_upper_cross_rotation",
                    B(s, l, m) * G(-s, l + 1, m + s) - B(s, l, m - s) * G(-s, l, m) + s * B(0, l, m),
                )

    report = VerificationReport(suite="ladder_identities", parameters={"lambda_max": table.lambda_max})
    for name, value in worst.items():
        report.add(name, value, tol)
    return report


def normalized_legendre(l_max: int, x: np.ndarray) -> np.ndarray:
    """P[l, m] for 0 <= m <= l <= l_max, normalized so that Y_l^m = P[l, m] exp(i m phi)."""
    x = np.asarray(x, dtype=float)
    sin_theta = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    table = np.zeros((l_max + 1, l_max + 1) + x.shape)
    table[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, l_max + 1):
        table[m, m] = -np.sqrt((2 * m + 1) / (2 * m)) * sin_theta * table[m - 1, m - 1]
    for m in range(0, l_max):
        table[m + 1, m] = np.sqrt(2 * m + 3) * x * table[m, m]
    for m in range(0, l_max + 1):
        for l in range(m + 2, l_max + 1):
            a_lm = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b_lm = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            table[l, m] = a_lm * (x * table[l - 1, m] - b_lm * table[l - 2, m])
    return table


def eval_Ylm(l: int, m: int, theta, phi):
    """Orthonormal spherical harmonic with the Condon-Shortley phase."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"Spherical harmonic needs |m| <= l, got l={l}, m={m}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    legendre = normalized_legendre(l, np.cos(theta))[l, abs(m)]
    value = legendre * np.exp(1j * abs(m) * phi)
    if m < 0:
        value = (-1) ** abs(m) * np.conj(value)
    if value.ndim == 0:
        return complex(value)
    return value


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times uniform phi nodes."""

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("SphereGrid needs positive node counts")

    @classmethod
    def for_degree(cls, l_max: int) -> "SphereGrid":
        return cls(2 * l_max + GRID_CONFIG["theta_pad"], 4 * l_max + GRID_CONFIG["phi_pad"])

    @property
    def cos_theta(self) -> np.ndarray:
        return np.polynomial.legendre.leggauss(self.n_theta)[0]

    @property
    def theta_weights(self) -> np.ndarray:
        return np.polynomial.legendre.leggauss(self.n_theta)[1]

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def phi_weights(self) -> np.ndarray:
        return np.full(self.n_phi, 2.0 * np.pi / self.n_phi)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_theta, self.n_phi)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(theta, phi) arrays of shape (n_theta, n_phi)."""
        theta = np.arccos(self.cos_theta)
        return np.meshgrid(theta, self.phi, indexing="ij")

    def weights(self) -> np.ndarray:
        return np.outer(self.theta_weights, self.phi_weights)

    def exact_degree(self) -> int:
        """Largest l + l' integrated exactly by the theta rule."""
        return 2 * self.n_theta - 1

    def sample(self, function) -> np.ndarray:
        theta, phi = self.mesh()
        return np.asarray(function(theta, phi), dtype=complex)

    def harmonics(self, l_max: int) -> Dict[Tuple[int, int], np.ndarray]:
        """Samples of Y_l^m for all l <= l_max on the grid."""
        legendre = normalized_legendre(l_max, self.cos_theta)
        phases = np.exp(1j * np.outer(np.arange(l_max + 1), self.phi))
        samples = {}
        for l in range(l_max + 1):
            for m in range(l + 1):
                value = np.outer(legendre[l, m], phases[m])
                samples[(l, m)] = value
                if m > 0:
                    samples[(l, -m)] = (-1) ** m * np.conj(value)
        return samples

    def coordinate(self, a: int) -> np.ndarray:
        """Samples of t^a."""
        theta, phi = self.mesh()
        if a == 0:
            return np.cos(theta).astype(complex)
        return np.sin(theta) * np.exp(1j * a * phi) * SQRT_HALF


def sphere_inner_product(f_samples: np.ndarray, g_samples: np.ndarray, grid: SphereGrid) -> complex:
    """<f, g> = sum of weights * conj(f) * g."""
    f_samples = np.asarray(f_samples)
    g_samples = np.asarray(g_samples)
    if f_samples.shape != grid.shape or g_samples.shape != grid.shape:
        raise ValueError(
            f"Samples must have grid shape {grid.shape}, got {f_samples.shape} and {g_samples.shape}"
        )
    return complex(np.sum(grid.weights() * np.conj(f_samples) * g_samples))
