"""
Convergence lab module implementing SOLID principles.
Contains truncated test functions, the k(L) schedules, the fuzzy analogs f_L of
multiplication operators and the strong-convergence, uniform-bound and
operator-norm witness sweeps on the circle and the sphere.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .interfaces import KScheduleInterface
from .config import CONVERGENCE_CONFIG, SCHEDULE_CONFIG, TOLERANCE_CONFIG
from .circle import CircleModel, build_circle, default_k_schedule
from .harmonics import SphereGrid, ladder_coefficients
from .linalg import OperatorMatrix, commutator, operator_norm, operator_norm_estimate
from .sphere import FuzzyHarmonicSet, SphereModel, build_fuzzy_harmonics, build_sphere, sphere_index

logger = logging.getLogger(__name__)

DECAY_COLUMNS = ["lambda", "k", "schedule", "error", "bound", "pass", "below_schedule_bound"]


@dataclass(frozen=True)
class TruncatedFourier:
    """Fourier coefficients phi_m for |m| <= N; entry m sits at index m + N."""

    coefficients: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.coefficients, dtype=complex)
        if data.ndim != 1 or data.size % 2 == 0:
            raise ValueError(f"TruncatedFourier needs an odd-length 1-D array, got shape {data.shape}")
        object.__setattr__(self, "coefficients", data)

    @classmethod
    def from_dict(cls, values: Dict[int, complex]) -> "TruncatedFourier":
        degree = max((abs(m) for m in values), default=0)
        data = np.zeros(2 * degree + 1, dtype=complex)
        for m, value in values.items():
            data[m + degree] = value
        return cls(data)

    @classmethod
    def monomial(cls, h: int) -> "TruncatedFourier":
        """u^h."""
        return cls.from_dict({h: 1.0})

    @classmethod
    def gaussian(cls, width: Optional[float] = None, support: Optional[int] = None) -> "TruncatedFourier":
        """Normalized coefficients proportional to exp(-m^2 / (2 width^2))."""
        width = width or CONVERGENCE_CONFIG["gaussian_width"]
        support = support or CONVERGENCE_CONFIG["circle_support"]
        m = np.arange(-support, support + 1)
        return cls(np.exp(-m * m / (2.0 * width * width))).normalized()

    @classmethod
    def step(cls, support: Optional[int] = None) -> "TruncatedFourier":
        """Indicator of (0, pi): f_0 = 1/2, f_m = (1 - (-1)^m) / (2 pi i m)."""
        support = support or CONVERGENCE_CONFIG["circle_support"]
        values: Dict[int, complex] = {0: 0.5}
        for m in range(1, support + 1):
            if m % 2:
                values[m] = 1.0 / (1j * np.pi * m)
                values[-m] = -1.0 / (1j * np.pi * m)
        return cls.from_dict(values)

    @classmethod
    def random(cls, degree: int, seed: int = 0) -> "TruncatedFourier":
        rng = np.random.default_rng(seed)
        size = 2 * degree + 1
        return cls(rng.standard_normal(size) + 1j * rng.standard_normal(size)).normalized()

    @property
    def degree(self) -> int:
        return (self.coefficients.size - 1) // 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def normalized(self) -> "TruncatedFourier":
        norm = self.norm
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero function")
        return TruncatedFourier(self.coefficients / norm)

    def component(self, m: int) -> complex:
        if abs(m) > self.degree:
            return 0j
        return complex(self.coefficients[m + self.degree])

    def padded(self, degree: int) -> np.ndarray:
        """Coefficients for |m| <= degree, cut or zero-filled."""
        out = np.zeros(2 * degree + 1, dtype=complex)
        for m in range(-min(degree, self.degree), min(degree, self.degree) + 1):
            out[m + degree] = self.coefficients[m + self.degree]
        return out

    def tail_norm_squared(self, cutoff: int) -> float:
        """Sum of |phi_m|^2 over |m| > cutoff."""
        inside = self.padded(cutoff)
        return float(max(self.norm ** 2 - np.sum(np.abs(inside) ** 2), 0.0))

    def times(self, other: "TruncatedFourier") -> "TruncatedFourier":
        """Pointwise product: (f g)_n = sum_m f_(n-m) g_m."""
        return TruncatedFourier(np.convolve(self.coefficients, other.coefficients))

    def values(self, phi: np.ndarray) -> np.ndarray:
        m = np.arange(-self.degree, self.degree + 1)
        return np.exp(1j * np.outer(np.asarray(phi, dtype=float), m)) @ self.coefficients

    def sup_norm(self, samples: Optional[int] = None) -> float:
        """max |f| over a uniform grid of the circle."""
        samples = samples or max(1024, 32 * (self.degree + 1))
        phi = 2.0 * np.pi * np.arange(samples) / samples
        return float(np.max(np.abs(self.values(phi))))


@dataclass(frozen=True)
class TruncatedSphFn:
    """Spherical-harmonic coefficients phi_l^m for l <= l_max; (l, m) sits at index l^2 + l + m."""

    coefficients: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.coefficients, dtype=complex)
        root = int(round(np.sqrt(data.size)))
        if data.ndim != 1 or root * root != data.size or root == 0:
            raise ValueError(f"TruncatedSphFn needs (L+1)^2 coefficients, got shape {data.shape}")
        object.__setattr__(self, "coefficients", data)

    @classmethod
    def from_dict(cls, values: Dict[tuple, complex]) -> "TruncatedSphFn":
        l_max = max((l for l, _ in values), default=0)
        data = np.zeros((l_max + 1) ** 2, dtype=complex)
        for (l, m), value in values.items():
            if abs(m) > l:
                raise ValueError(f"Invalid harmonic index ({l}, {m})")
            data[sphere_index(l, m)] = value
        return cls(data)

    @classmethod
    def coordinate(cls, a: int) -> "TruncatedSphFn":
        """t^a with t(+-) = sin(theta) e^(+-i phi) / sqrt(2) = -+ sqrt(4 pi / 3) Y_1^(+-1) and t^0 = sqrt(4 pi / 3) Y_1^0."""
        scale = np.sqrt(4.0 * np.pi / 3.0)
        if a == 0:
            return cls.from_dict({(1, 0): scale})
        return cls.from_dict({(1, a): -a * scale})

    @classmethod
    def constant(cls, value: complex = 1.0) -> "TruncatedSphFn":
        return cls.from_dict({(0, 0): value * np.sqrt(4.0 * np.pi)})

    @classmethod
    def random(cls, l_max: int, seed: int = 0) -> "TruncatedSphFn":
        rng = np.random.default_rng(seed)
        size = (l_max + 1) ** 2
        return cls(rng.standard_normal(size) + 1j * rng.standard_normal(size)).normalized()

    @property
    def l_max(self) -> int:
        return int(round(np.sqrt(self.coefficients.size))) - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def normalized(self) -> "TruncatedSphFn":
        norm = self.norm
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero function")
        return TruncatedSphFn(self.coefficients / norm)

    @property
    def support(self) -> int:
        """Largest l carrying a non-zero coefficient."""
        nonzero = np.nonzero(self.coefficients)[0]
        if nonzero.size == 0:
            return 0
        return int(np.floor(np.sqrt(nonzero[-1])))

    def padded(self, l_max: int) -> np.ndarray:
        out = np.zeros((l_max + 1) ** 2, dtype=complex)
        size = min(out.size, self.coefficients.size)
        out[:size] = self.coefficients[:size]
        return out

    def tail_norm_squared(self, cutoff: int) -> float:
        return float(max(self.norm ** 2 - np.sum(np.abs(self.padded(cutoff)) ** 2), 0.0))

    def samples(self, grid: SphereGrid) -> np.ndarray:
        harmonics = grid.harmonics(self.l_max)
        total = np.zeros(grid.shape, dtype=complex)
        for (l, m), values in harmonics.items():
            c = self.coefficients[sphere_index(l, m)]
            if c != 0:
                total += c * values
        return total

    @classmethod
    def from_samples(cls, samples: np.ndarray, grid: SphereGrid, l_max: int) -> "TruncatedSphFn":
        """Projection onto Y_l^m, l <= l_max, by the grid quadrature."""
        weights = grid.weights()
        data = np.zeros((l_max + 1) ** 2, dtype=complex)
        for (l, m), values in grid.harmonics(l_max).items():
            data[sphere_index(l, m)] = np.sum(weights * np.conj(values) * samples)
        return cls(data)

    def sup_norm(self, grid: Optional[SphereGrid] = None) -> float:
        grid = grid or SphereGrid.for_degree(max(4 * self.l_max, 8))
        return float(np.max(np.abs(self.samples(grid))))


def circle_schedule_bound(cutoff: int) -> float:
    """2L(L+1)(2L+1)^2."""
    return float(2 * cutoff * (cutoff + 1) * (2 * cutoff + 1) ** 2)


def sphere_schedule_bound(cutoff: int) -> float:
    """2^(3L+3) L^(L+5) (L+1)."""
    return float(2.0 ** (3 * cutoff + 3) * float(cutoff) ** (cutoff + 5) * (cutoff + 1))


class DefaultSchedule(KScheduleInterface):
    """k = L^2 (L+1)^2."""

    @property
    def name(self) -> str:
        return "default"

    def __call__(self, cutoff: int) -> float:
        return default_k_schedule(cutoff)


class CircleProofSchedule(KScheduleInterface):
    """Smallest k for which the circle convergence estimate holds."""

    @property
    def name(self) -> str:
        return "prop-circle"

    def __call__(self, cutoff: int) -> float:
        if cutoff < 1:
            raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
        return circle_schedule_bound(cutoff)


class SphereProofSchedule(KScheduleInterface):
    """Smallest k for which the sphere convergence estimate holds; capped in L."""

    def __init__(self, max_cutoff: Optional[int] = None):
        self.max_cutoff = max_cutoff or SCHEDULE_CONFIG["prop_sphere_max_lambda"]

    @property
    def name(self) -> str:
        return "prop-sphere"

    def __call__(self, cutoff: int) -> float:
        if cutoff < 1:
            raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
        if cutoff > self.max_cutoff:
            raise ValueError(f"prop-sphere schedule is capped at L={self.max_cutoff}, got {cutoff}")
        return sphere_schedule_bound(cutoff)


class PracticalSchedule(KScheduleInterface):
    """k = L^6, far below the proof requirement on the sphere."""

    @property
    def name(self) -> str:
        return "practical"

    def __call__(self, cutoff: int) -> float:
        if cutoff < 1:
            raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
        return float(cutoff) ** 6


class CustomSchedule(KScheduleInterface):
    """User callable or a fixed k."""

    def __init__(self, function: Union[Callable[[int], float], float], label: str = "custom"):
        if callable(function):
            self.function = function
        else:
            value = float(function)
            if value <= 0:
                raise ValueError(f"k must be positive, got {value}")
            self.function = lambda cutoff: value
        self.label = label

    @property
    def name(self) -> str:
        return self.label

    def __call__(self, cutoff: int) -> float:
        value = float(self.function(cutoff))
        if value <= 0:
            raise ValueError(f"Schedule {self.label} returned non-positive k={value} at L={cutoff}")
        return value


def make_schedule(name: str, k: Optional[float] = None,
                  function: Optional[Callable[[int], float]] = None) -> KScheduleInterface:
    """Schedule by name; "custom" needs a callable or a literal k."""
    if name == "default":
        return DefaultSchedule()
    if name == "prop-circle":
        return CircleProofSchedule()
    if name == "prop-sphere":
        return SphereProofSchedule()
    if name == "practical":
        return PracticalSchedule()
    if name == "custom":
        if function is not None:
            return CustomSchedule(function)
        if k is not None:
            return CustomSchedule(k)
        raise ValueError("custom schedule needs a function or a literal k")
    raise ValueError(f"Unknown schedule: {name}")


def eta_operators(model: CircleModel) -> Dict[int, OperatorMatrix]:
    """eta(+-) = sqrt(2) xi(+-)."""
    return {1: model.xi_plus * np.sqrt(2.0), -1: model.xi_minus * np.sqrt(2.0)}


def alpha_mn(m: int, n: int, cutoff: int, k: float) -> float:
    """Coefficient of u^n in eta^(n-m) u^m."""
    if abs(m) > cutoff or abs(n) > cutoff:
        return 0.0
    low, high = min(m, n), max(m, n)
    return float(np.prod([np.sqrt(1.0 + j * (j + 1) / k) for j in range(low, high)]))


def fhat_circle(f: TruncatedFourier, model: CircleModel) -> OperatorMatrix:
    """sum over |h| <= 2L of f_h eta^h."""
    eta = eta_operators(model)
    top = 2 * model.cutoff
    if f.degree > top and (np.any(f.coefficients[: f.degree - top]) or np.any(f.coefficients[f.degree + top + 1:])):
        logger.debug("[Converge] Dropping Fourier modes beyond |h| = %d", top)
    result = OperatorMatrix.identity(model.dim) * f.component(0)
    for sign in (1, -1):
        power = OperatorMatrix.identity(model.dim)
        for h in range(1, min(f.degree, top) + 1):
            power = power @ eta[sign]
            coefficient = f.component(sign * h)
            if coefficient != 0:
                result = result + power * coefficient
    return result


def _check_schedule(model_consistent: bool, cutoff: int, k: float, force: bool, tag: str) -> None:
    if model_consistent:
        return
    message = f"L={cutoff}, k={k:.17g} violates the consistency condition"
    if not force:
        raise ValueError(f"{message}; pass force=True to run anyway")
    logger.warning("[Converge] %s (%s, forced)", message, tag)


def _circle_embed(vector: np.ndarray, cutoff: int, degree: int) -> np.ndarray:
    out = np.zeros(2 * degree + 1, dtype=complex)
    out[degree - cutoff: degree + cutoff + 1] = vector
    return out


def _circle_apply(operator: OperatorMatrix, phi: TruncatedFourier, cutoff: int) -> np.ndarray:
    return operator.data @ phi.padded(cutoff)


def _circle_error(target: TruncatedFourier, image: np.ndarray, cutoff: int) -> float:
    degree = max(target.degree, cutoff)
    difference = target.padded(degree) - _circle_embed(image, cutoff, degree)
    return float(np.linalg.norm(difference))


def circle_error_bound(f: TruncatedFourier, phi: TruncatedFourier, cutoff: int) -> float:
    """Square root of the three-term estimate: outer tail of f phi, 2|f|_inf^2 |phi - phi_L|^2 and 2 F^2 Phi^2 / (2L+1)."""
    product = f.times(phi)
    outer = product.tail_norm_squared(cutoff)
    truncation = 2.0 * f.sup_norm() ** 2 * phi.tail_norm_squared(cutoff)
    big_f = float(np.max(np.abs(f.coefficients)))
    big_phi = float(np.max(np.abs(phi.coefficients)))
    coupling = 2.0 * big_f ** 2 * big_phi ** 2 / (2 * cutoff + 1)
    return float(np.sqrt(outer + truncation + coupling))


def _sweep(function: Callable[[int], Dict[str, object]], cutoffs: Sequence[int], threads: int) -> pd.DataFrame:
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        rows = list(executor.map(function, list(cutoffs)))
    return pd.DataFrame(rows)


def strong_convergence_circle(
    f: TruncatedFourier,
    phi: TruncatedFourier,
    schedule: KScheduleInterface,
    cutoffs: Optional[Sequence[int]] = None,
    g: Optional[TruncatedFourier] = None,
    threads: int = 1,
    force: bool = False,
) -> pd.DataFrame:
    """|| (f - f_L) phi || per L, with the product and commutator tests when g is given."""
    if cutoffs is None:
        cutoffs = CONVERGENCE_CONFIG["circle_lambdas"]
    if abs(phi.norm - 1.0) > 1e-12:
        raise ValueError(f"phi must be normalized, got norm {phi.norm}")
    target = f.times(phi)
    product_target = f.times(g).times(phi) if g is not None else None

    def row(cutoff: int) -> Dict[str, object]:
        k = schedule(cutoff)
        model = build_circle(cutoff, k)
        _check_schedule(model.consistent, cutoff, k, force, schedule.name)
        f_hat = fhat_circle(f, model)
        error = _circle_error(target, _circle_apply(f_hat, phi, cutoff), cutoff)
        bound = circle_error_bound(f, phi, cutoff)
        below = k < circle_schedule_bound(cutoff)
        record: Dict[str, object] = {
            "lambda": cutoff,
            "k": k,
            "schedule": schedule.name,
            "error": error,
            "bound": bound,
            "pass": bool(error <= bound * (1.0 + 1e-12)),
            "below_schedule_bound": below,
        }
        if g is not None:
            g_hat = fhat_circle(g, model)
            record["product_error"] = _circle_error(product_target, _circle_apply(f_hat @ g_hat, phi, cutoff), cutoff)
            record["commutator"] = float(np.linalg.norm(_circle_apply(commutator(f_hat, g_hat), phi, cutoff)))
        return record

    table = _sweep(row, cutoffs, threads)
    logger.info("[Converge] Circle sweep over %d cutoffs (%s): max error %.3e",
                len(table), schedule.name, float(table["error"].max()))
    return table


def uniform_norm_bound_circle(
    f: TruncatedFourier,
    schedule: KScheduleInterface,
    cutoffs: Optional[Sequence[int]] = None,
    threads: int = 1,
    force: bool = False,
) -> pd.DataFrame:
    """||f_L||_op against 3 ||f||_inf."""
    if cutoffs is None:
        cutoffs = CONVERGENCE_CONFIG["circle_lambdas"]
    bound = 3.0 * f.sup_norm()

    def row(cutoff: int) -> Dict[str, object]:
        k = schedule(cutoff)
        model = build_circle(cutoff, k)
        _check_schedule(model.consistent, cutoff, k, force, schedule.name)
        estimate = operator_norm_estimate(fhat_circle(f, model))
        norm = estimate.norm
        return {
            "lambda": cutoff,
            "k": k,
            "schedule": schedule.name,
            "norm": norm,
            "norm_method": estimate.method,
            "bound": bound,
            "pass": bool(norm <= bound * (1.0 + 1e-12)),
            "below_schedule_bound": k < circle_schedule_bound(cutoff),
        }

    return _sweep(row, cutoffs, threads)


def fhat_sphere(f: TruncatedSphFn, model: SphereModel, harmonics: Optional[FuzzyHarmonicSet] = None) -> OperatorMatrix:
    """sum over l <= 2L of f_l^m Y(l, m)."""
    top = min(f.l_max, 2 * model.cutoff)
    if f.support > 2 * model.cutoff:
        logger.warning("[Converge] Dropping harmonics of degree > 2L = %d (f has degree %d)", 2 * model.cutoff, f.support)
    if harmonics is None or harmonics.l_max < top:
        harmonics = build_fuzzy_harmonics(model, top)
    result = OperatorMatrix.zeros(model.dim)
    for l in range(top + 1):
        for m in range(-l, l + 1):
            coefficient = f.coefficients[sphere_index(l, m)]
            if coefficient != 0:
                result = result + harmonics[(l, m)] * coefficient
    return result


def _sphere_grid(grid: Optional[SphereGrid], degree: int) -> SphereGrid:
    required = 2 * degree
    if grid is None:
        return SphereGrid.for_degree(degree)
    if grid.exact_degree() < required or grid.n_phi <= required:
        raise ValueError(
            f"Sphere grid {grid.shape} integrates degree {grid.exact_degree()} exactly, need {required}"
        )
    return grid


def _sphere_product(functions: Sequence[TruncatedSphFn], grid: SphereGrid) -> TruncatedSphFn:
    samples = np.ones(grid.shape, dtype=complex)
    for function in functions:
        samples = samples * function.samples(grid)
    return TruncatedSphFn.from_samples(samples, grid, sum(function.l_max for function in functions))


def _sphere_error(target: TruncatedSphFn, image: np.ndarray, cutoff: int) -> float:
    l_max = max(target.l_max, cutoff)
    embedded = np.zeros((l_max + 1) ** 2, dtype=complex)
    embedded[: image.size] = image
    return float(np.linalg.norm(target.padded(l_max) - embedded))


def sphere_error_bound(f: TruncatedSphFn, phi: TruncatedSphFn, product: TruncatedSphFn, cutoff: int,
                       sup_norm: float) -> float:
    """Square root of |f|^2 |phi|^2 / L^2 plus the outer tail of f phi.

    When phi reaches beyond l = L the inner part doubles and 2 |f|_inf^2 |phi - phi_L|^2 is added.
    """
    outer = product.tail_norm_squared(cutoff)
    inner = f.norm ** 2 * phi.norm ** 2 / cutoff ** 2
    truncation = phi.tail_norm_squared(cutoff)
    if truncation > 0.0:
        return float(np.sqrt(outer + 2.0 * inner + 2.0 * sup_norm ** 2 * truncation))
    return float(np.sqrt(outer + inner))


def strong_convergence_sphere(
    f: TruncatedSphFn,
    phi: TruncatedSphFn,
    schedule: KScheduleInterface,
    cutoffs: Optional[Sequence[int]] = None,
    grid: Optional[SphereGrid] = None,
    g: Optional[TruncatedSphFn] = None,
    threads: int = 1,
    force: bool = False,
) -> pd.DataFrame:
    """|| (f - f_L) phi || per L, with f phi evaluated by sphere quadrature."""
    if cutoffs is None:
        cutoffs = CONVERGENCE_CONFIG["sphere_lambdas"]
    if abs(phi.norm - 1.0) > 1e-12:
        raise ValueError(f"phi must be normalized, got norm {phi.norm}")
    degree = f.l_max + phi.l_max + (g.l_max if g is not None else 0)
    grid = _sphere_grid(grid, degree)
    target = _sphere_product([f, phi], grid)
    product_target = _sphere_product([f, g, phi], grid) if g is not None else None
    sup_norm = f.sup_norm(grid)

    def row(cutoff: int) -> Dict[str, object]:
        k = schedule(cutoff)
        model = build_sphere(cutoff, k)
        _check_schedule(model.consistent, cutoff, k, force, schedule.name)
        top = min(max(f.l_max, g.l_max if g is not None else 0), 2 * cutoff)
        harmonics = build_fuzzy_harmonics(model, top)
        f_hat = fhat_sphere(f, model, harmonics)
        vector = phi.padded(cutoff)
        error = _sphere_error(target, f_hat.data @ vector, cutoff)
        bound = sphere_error_bound(f, phi, target, cutoff, sup_norm)
        record: Dict[str, object] = {
            "lambda": cutoff,
            "k": k,
            "schedule": schedule.name,
            "error": error,
            "bound": bound,
            "pass": bool(error <= bound * (1.0 + 1e-12)),
            "below_schedule_bound": k < sphere_schedule_bound(cutoff),
        }
        if g is not None:
            g_hat = fhat_sphere(g, model, harmonics)
            record["product_error"] = _sphere_error(product_target, (f_hat @ g_hat).data @ vector, cutoff)
        return record

    table = _sweep(row, cutoffs, threads)
    logger.info("[Converge] Sphere sweep over %d cutoffs (%s): max error %.3e",
                len(table), schedule.name, float(table["error"].max()))
    return table


@dataclass(frozen=True)
class WitnessResult:
    """|| (t - x) v || for the witness vector v just outside the truncated space."""

    kind: str
    component: str
    cutoff: int
    value: float
    expected: float
    band_norm: float
    lower_bound: float
    single_denominator: Optional[float] = None

    @property
    def passed(self) -> bool:
        tol = TOLERANCE_CONFIG["identity"] * 100
        return abs(self.value - self.expected) <= tol and self.value >= self.lower_bound - tol

    def to_record(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "component": self.component,
            "lambda": self.cutoff,
            "value": self.value,
            "expected": self.expected,
            "lower_bound": self.lower_bound,
            "single_denominator": self.single_denominator,
            "band_norm": self.band_norm,
            "pass": self.passed,
        }


def _circle_witness(model: CircleModel, band: int) -> List[WitnessResult]:
    lam = model.cutoff
    size = 2 * band + 1
    shift = np.zeros((size, size), dtype=complex)
    for m in range(-band, band):
        shift[m + 1 + band, m + band] = 1.0
    eta = np.zeros((size, size), dtype=complex)
    eta[band - lam: band + lam + 1, band - lam: band + lam + 1] = eta_operators(model)[1].data
    difference = OperatorMatrix(shift - eta)
    vector = np.zeros(size, dtype=complex)
    vector[lam + 1 + band] = 1.0
    value = float(np.linalg.norm(difference.data @ vector))
    return [WitnessResult("circle", "plus", lam, value, 1.0, operator_norm(difference), lower_bound=1.0)]


def _sphere_witness(model: SphereModel, band: int) -> List[WitnessResult]:
    lam = model.cutoff
    ladders = ladder_coefficients(band)
    size = (band + 1) ** 2
    inner = model.dim
    results = []
    for a, component, m_witness in ((1, "plus", lam + 1), (0, "zero", 0), (-1, "minus", -(lam + 1))):
        multiplication = np.zeros((size, size), dtype=complex)
        for l in range(band + 1):
            for m in range(-l, l + 1):
                column = sphere_index(l, m)
                if l >= 1 and abs(m + a) <= l - 1:
                    multiplication[sphere_index(l - 1, m + a), column] = ladders.A(a, l, m)
                if l + 1 <= band and abs(m + a) <= l + 1:
                    multiplication[sphere_index(l + 1, m + a), column] = ladders.B(a, l, m)
        fuzzy = np.zeros((size, size), dtype=complex)
        fuzzy[:inner, :inner] = model.x[a].data
        difference = OperatorMatrix(multiplication - fuzzy)
        vector = np.zeros(size, dtype=complex)
        vector[sphere_index(lam + 1, m_witness)] = 1.0
        value = float(np.linalg.norm(difference.data @ vector))
        single_denominator = None
        if a == 0:
            # |A|^2 + |B|^2 of t0 Y(L+1, 0)
            expected = np.sqrt(
                (lam + 1) ** 2 / ((2 * lam + 1) * (2 * lam + 3)) + (lam + 2) ** 2 / ((2 * lam + 3) * (2 * lam + 5))
            )
            single_denominator = float(np.sqrt(((lam + 2) ** 2 + (lam + 1) ** 2) / ((2 * lam + 3) * (2 * lam + 5))))
            lower_bound = np.sqrt(1.0 / 3.0)
        else:
            expected = np.sqrt((2 * lam + 4) / (2.0 * (2 * lam + 5)))
            lower_bound = np.sqrt(3.0 / 7.0)
        results.append(WitnessResult(
            "sphere", component, lam, value, float(expected), operator_norm(difference),
            lower_bound=float(lower_bound), single_denominator=single_denominator,
        ))
    return results


def nonconvergence_witness(model: Union[CircleModel, SphereModel], margin: Optional[int] = None) -> List[WitnessResult]:
    """Norm of (t - x) on the vector one level above the cutoff, in a band of L + margin levels."""
    margin = margin if margin is not None else CONVERGENCE_CONFIG["witness_margin"]
    if margin < 2:
        raise ValueError(f"Witness band needs a margin of at least 2 levels, got {margin}")
    band = model.cutoff + margin
    if isinstance(model, CircleModel):
        return _circle_witness(model, band)
    return _sphere_witness(model, band)


def witness_table(models: Sequence[Union[CircleModel, SphereModel]]) -> pd.DataFrame:
    rows = [result.to_record() for model in models for result in nonconvergence_witness(model)]
    return pd.DataFrame(rows)


def circle_test_corpus(support: Optional[int] = None) -> Dict[str, TruncatedFourier]:
    """Fixed functions for the circle sweeps: trigonometric, Gaussian-coefficient and a step."""
    support = support or CONVERGENCE_CONFIG["circle_support"]
    gaussian = TruncatedFourier.gaussian(support=support)
    return {
        "u": TruncatedFourier.monomial(1),
        "two_cos": TruncatedFourier.from_dict({1: 1.0, -1: 1.0}),
        "gaussian": TruncatedFourier(gaussian.coefficients / gaussian.coefficients[support]),
        "step": TruncatedFourier.step(support),
    }


def sphere_test_corpus() -> Dict[str, TruncatedSphFn]:
    return {
        "t_zero": TruncatedSphFn.coordinate(0),
        "t_plus": TruncatedSphFn.coordinate(1),
        "constant": TruncatedSphFn.constant(),
        "quadratic": TruncatedSphFn.from_dict({(2, 0): 1.0, (2, 1): 0.5, (2, -1): -0.5}),
    }
