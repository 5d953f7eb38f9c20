"""
Dense complex linear algebra module.
Contains the immutable operator matrix type and the spectral services
(Jacobi eigensolver, power iteration, Horner polynomials) every model builds on.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .config import (
    GENERATION_CONFIG,
    JACOBI_CONFIG,
    POWER_ITERATION_CONFIG,
    TOLERANCE_CONFIG,
)

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex]


class OperatorMatrix:
    """Immutable dense complex square matrix."""

    __slots__ = ("_data",)
    __array_ufunc__ = None

    def __init__(self, data):
        array = np.array(data, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError(f"OperatorMatrix needs a square 2D array, got shape {array.shape}")
        if array.shape[0] == 0:
            raise ValueError("OperatorMatrix needs a positive dimension")
        array.setflags(write=False)
        self._data = array

    @classmethod
    def identity(cls, dim: int) -> "OperatorMatrix":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def zeros(cls, dim: int) -> "OperatorMatrix":
        return cls(np.zeros((dim, dim), dtype=complex))

    @classmethod
    def diagonal(cls, values: Sequence[Scalar]) -> "OperatorMatrix":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._data

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self._data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._data)))

    def hermitian_defect(self) -> float:
        """Largest entry of |A - A^H|."""
        return float(np.max(np.abs(self._data - self._data.conj().T)))

    def is_hermitian(self, tol: Optional[float] = None) -> bool:
        if tol is None:
            tol = TOLERANCE_CONFIG["hermitian"] * self.dim * max(1.0, self.max_abs())
        return self.hermitian_defect() <= tol

    def power(self, exponent: int) -> "OperatorMatrix":
        if exponent < 0:
            raise ValueError("Only non-negative powers are defined")
        result = OperatorMatrix.identity(self.dim)
        for _ in range(exponent):
            result = matmul(result, self)
        return result

    def to_frame(self, name: str = "") -> pd.DataFrame:
        """Non-zero entries as a (name, row, col, re, im) table."""
        rows, cols = np.nonzero(self._data)
        values = self._data[rows, cols]
        return pd.DataFrame({
            "name": [name] * len(rows),
            "row": rows.astype(int),
            "col": cols.astype(int),
            "re": values.real,
            "im": values.imag,
        })

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return matmul(self, other)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_dim(self, other)
        return OperatorMatrix(self._data + other._data)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_dim(self, other)
        return OperatorMatrix(self._data - other._data)

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(-self._data)

    def __mul__(self, scalar: Scalar) -> "OperatorMatrix":
        if isinstance(scalar, OperatorMatrix):
            raise TypeError("Use @ for operator products")
        return OperatorMatrix(self._data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Scalar) -> "OperatorMatrix":
        return OperatorMatrix(self._data / scalar)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"OperatorMatrix(dim={self.dim})"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: OperatorMatrix

    def apply(self, function: Callable[[np.ndarray], np.ndarray]) -> OperatorMatrix:
        """Spectral calculus: V f(diag) V^H."""
        v = self.eigenvectors.data
        weights = np.asarray(function(self.eigenvalues), dtype=complex)
        return OperatorMatrix((v * weights) @ v.conj().T)

    def reconstruct(self) -> OperatorMatrix:
        return self.apply(lambda values: values)


@dataclass(frozen=True)
class PowerIterationResult:
    """Operator norm estimate with its convergence flag."""

    norm: float
    iterations: int
    converged: bool
    method: str = "power"


def _check_same_dim(a: OperatorMatrix, b: OperatorMatrix) -> None:
    if a.dim != b.dim:
        raise ValueError(f"Dimension mismatch: {a.dim} vs {b.dim}")


def matmul(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """Exact complex matrix product."""
    _check_same_dim(a, b)
    return OperatorMatrix(a.data @ b.data)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    _check_same_dim(a, b)
    return OperatorMatrix(a.data @ b.data - b.data @ a.data)


def anticommutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    _check_same_dim(a, b)
    return OperatorMatrix(a.data @ b.data + b.data @ a.data)


def max_residual(a: OperatorMatrix, b: OperatorMatrix) -> float:
    """Largest entry of |A - B|."""
    _check_same_dim(a, b)
    return float(np.max(np.abs(a.data - b.data)))


def _jacobi_pair(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    magnitude = abs(apq)
    if magnitude == 0.0:
        return
    phase = apq / magnitude
    theta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
    if abs(theta) > JACOBI_CONFIG["large_theta"]:
        # theta^2 would overflow; t -> 1/(2 theta)
        t = 1.0 / (2.0 * theta)
    else:
        t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # block acting on columns (p, q); removes the phase first, then rotates
    block = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
    pair = [p, q]
    a[:, pair] = a[:, pair] @ block
    a[pair, :] = block.conj().T @ a[pair, :]
    v[:, pair] = v[:, pair] @ block
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def hermitian_eig(matrix: OperatorMatrix) -> SpectralDecomposition:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix."""
    scale = max(1.0, matrix.max_abs())
    tol = TOLERANCE_CONFIG["hermitian"] * matrix.dim * scale
    defect = matrix.hermitian_defect()
    if defect > tol:
        raise ValueError(
            f"hermitian_eig needs a Hermitian matrix: max |A - A^H| = {defect:.3e} exceeds {tol:.3e}"
        )

    n = matrix.dim
    a = 0.5 * (matrix.data + matrix.data.conj().T)
    v = np.eye(n, dtype=complex)
    total = np.linalg.norm(a)
    threshold = JACOBI_CONFIG["off_diagonal_tol"] * total

    sweeps = 0
    while total > 0.0:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        if sweeps >= JACOBI_CONFIG["max_sweeps"]:
            logger.warning("[Jacobi] Stopped after %d sweeps with off-diagonal norm %.3e", sweeps, off)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_pair(a, v, p, q)
        sweeps += 1

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    v = v[:, order]

    # first significant component of each eigenvector is real positive
    for column in range(n):
        significant = np.nonzero(np.abs(v[:, column]) > JACOBI_CONFIG["phase_threshold"])[0]
        if significant.size:
            pivot = v[significant[0], column]
            v[:, column] *= np.conj(pivot) / abs(pivot)

    logger.debug("[Jacobi] dim=%d converged in %d sweeps", n, sweeps)
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=OperatorMatrix(v))


def unitary_exponential(generator: OperatorMatrix, angle: float) -> OperatorMatrix:
    """exp(i * angle * H) for Hermitian H."""
    spectrum = hermitian_eig(generator)
    return spectrum.apply(lambda values: np.exp(1j * angle * values))


def power_iteration(matrix: OperatorMatrix) -> PowerIterationResult:
    """Largest singular value by power iteration on A^H A."""
    a = matrix.data
    if not np.any(a):
        return PowerIterationResult(norm=0.0, iterations=0, converged=True)

    config = POWER_ITERATION_CONFIG
    x = np.ones(matrix.dim, dtype=complex) / np.sqrt(matrix.dim)
    ratio_old = np.inf
    stable = 0
    ratio = 0.0
    for iteration in range(1, config["max_iterations"] + 1):
        ax = a @ x
        ratio = float(np.linalg.norm(ax))
        if ratio > 0.0 and abs(ratio - ratio_old) / ratio < config["relative_tol"]:
            stable += 1
            if stable >= config["stable_iterations"]:
                return PowerIterationResult(norm=ratio, iterations=iteration, converged=True)
        else:
            stable = 0
        ratio_old = ratio
        x = a.conj().T @ ax
        length = np.linalg.norm(x)
        if length == 0.0:
            # start vector orthogonal to the row space; restart on the heaviest column
            x = np.zeros(matrix.dim, dtype=complex)
            x[int(np.argmax(np.linalg.norm(a, axis=0)))] = 1.0
            ratio_old = np.inf
            stable = 0
        else:
            x = x / length

    logger.info("[Power] No convergence after %d iterations, estimate %.17g", config["max_iterations"], ratio)
    return PowerIterationResult(norm=ratio, iterations=config["max_iterations"], converged=False)


def operator_norm_estimate(matrix: OperatorMatrix) -> PowerIterationResult:
    """Power iteration, falling back to the top eigenvalue of A^H A when it stalls."""
    result = power_iteration(matrix)
    if result.converged:
        return result
    gram = hermitian_eig(matrix.adjoint() @ matrix)
    norm = float(np.sqrt(max(0.0, gram.eigenvalues[-1])))
    logger.info("[Power] Jacobi fallback: %.17g (power estimate %.17g)", norm, result.norm)
    return PowerIterationResult(norm=norm, iterations=result.iterations, converged=True, method="jacobi")


def operator_norm(matrix: OperatorMatrix) -> float:
    return operator_norm_estimate(matrix).norm


def matrix_polynomial(matrix: OperatorMatrix, coeffs: Sequence[float]) -> OperatorMatrix:
    """Horner evaluation of sum_i coeffs[i] * A**i."""
    coefficients = list(coeffs)
    identity = np.eye(matrix.dim, dtype=complex)
    if not coefficients:
        return OperatorMatrix.zeros(matrix.dim)
    result = coefficients[-1] * identity
    for c in reversed(coefficients[:-1]):
        result = result @ matrix.data + c * identity
    return OperatorMatrix(result)


def lagrange_projector_coefficients(points: Sequence[float], target: float) -> np.ndarray:
    """Ascending coefficients of the Lagrange basis polynomial equal to 1 at target."""
    others = [p for p in points if p != target]
    if len(others) == len(points):
        raise ValueError(f"{target} is not one of the interpolation points")
    numerator = np.polynomial.polynomial.polyfromroots(others) if others else np.array([1.0])
    denominator = np.prod([target - p for p in others]) if others else 1.0
    return np.real(numerator) / denominator


def _orthonormal_rows(rows: np.ndarray, threshold: float) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    _, singular, vh = np.linalg.svd(rows, full_matrices=False)
    if singular.size == 0 or singular[0] == 0.0:
        return rows[:0]
    keep = singular > threshold * singular[0]
    return vh[keep]


def algebra_span_dimension(
    generators: List[OperatorMatrix],
    max_length: Optional[int] = None,
    rank_threshold: Optional[float] = None,
) -> int:
    """Dimension of the linear span of all words of length <= max_length in the generators."""
    if not generators:
        return 0
    if rank_threshold is None:
        rank_threshold = GENERATION_CONFIG["rank_threshold"]
    dim = generators[0].dim
    full = dim * dim
    basis = np.zeros((0, full), dtype=complex)
    frontier = [g.data.reshape(-1) for g in generators]
    length = 1
    while True:
        grown = _orthonormal_rows(np.vstack([basis] + frontier), rank_threshold)
        if grown.shape[0] == basis.shape[0]:
            break
        basis = grown
        if basis.shape[0] == full or (max_length is not None and length >= max_length):
            break
        frontier = [
            (row.reshape(dim, dim) @ g.data).reshape(1, -1)
            for row in basis
            for g in generators
        ]
        length += 1
    return int(basis.shape[0])
