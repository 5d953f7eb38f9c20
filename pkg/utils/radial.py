"""
Radial oracle module implementing SOLID principles.
Independent numerical checks of the radial asymptotics: Gaussian moments, the V0 and
energy root solves, finite-difference spectra, circle and sphere matrix elements,
the derivative integrals J_l and M_l, and the tail left out by integrating over the whole line.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.special import erfc, erfcx

from .config import ORACLE_CONFIG, TOLERANCE_CONFIG
from .circle import derivative_coefficient
from .harmonics import SIGNS, LadderTable, ladder_coefficients
from .linalg import OperatorMatrix, commutator
from .report import VerificationReport
from .sphere import angular_matrices, sphere_index

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)

# alpha[a, b] in [d_a, d_b] = coefficient * alpha[a, b] * L_(-a-b)
ALPHA: Dict[Tuple[int, int], int] = {
    (0, 1): -1, (1, 0): 1,
    (0, -1): 1, (-1, 0): -1,
    (-1, 1): 1, (1, -1): -1,
}


def alpha(a: int, b: int) -> int:
    return ALPHA.get((a, b), 0)


@dataclass(frozen=True)
class GaussianProfile:
    """Ground-state profile exp(-(x - center)^2 stiffness / 2)."""

    center: float
    stiffness: float
    hermite_order: int = 0

    def __post_init__(self):
        if not self.stiffness > 0:
            raise ValueError(f"GaussianProfile needs a positive stiffness, got {self.stiffness}")

    @property
    def length(self) -> float:
        """Oscillator length 1/sqrt(stiffness)."""
        return float(1.0 / np.sqrt(self.stiffness))


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid of n_points interior nodes between Dirichlet ends r_min and r_max."""

    r_min: float
    r_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError(f"RadialGrid needs at least 3 points, got {self.n_points}")
        if not self.r_max > self.r_min:
            raise ValueError(f"RadialGrid needs r_max > r_min, got [{self.r_min}, {self.r_max}]")

    @classmethod
    def centered(cls, center: float, k: float, n_points: Optional[int] = None) -> "RadialGrid":
        """Half-width fd_half_width_lengths oscillator lengths (2k)^(-1/4), capped."""
        config = ORACLE_CONFIG
        half_width = min(config["fd_half_width_lengths"] * (2.0 * k) ** -0.25, config["fd_max_half_width"])
        return cls(center - half_width, center + half_width, n_points or config["fd_points"])

    @property
    def spacing(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points + 1)

    def nodes(self) -> np.ndarray:
        return self.r_min + self.spacing * np.arange(1, self.n_points + 1)

    def refined(self) -> "RadialGrid":
        """Same interval at half the spacing."""
        return RadialGrid(self.r_min, self.r_max, 2 * self.n_points + 1)

    def points_per_length(self, profile: GaussianProfile) -> float:
        return profile.length / self.spacing

    def covers(self, profile: GaussianProfile, lengths: Optional[float] = None) -> bool:
        if lengths is None:
            lengths = ORACLE_CONFIG["fd_half_width_lengths"]
        reach = lengths * profile.length
        return self.r_min <= profile.center - reach and self.r_max >= profile.center + reach


@dataclass(frozen=True)
class EnergySolveResult:
    """Root of the circle energy equation for one (m, n)."""

    k: float
    m: int
    n: int
    e_prime: float
    v0: float
    residual: float

    @property
    def energy(self) -> float:
        return self.e_prime + self.v0

    @property
    def physical(self) -> bool:
        return 0.0 < self.e_prime < self.k

    @property
    def profile(self) -> GaussianProfile:
        """rho_m = E'/k_m with stiffness sqrt(k_m), k_m = 2(k - E')."""
        k_m = 2.0 * (self.k - self.e_prime)
        return GaussianProfile(center=self.e_prime / k_m, stiffness=float(np.sqrt(k_m)), hermite_order=self.n)


@dataclass(frozen=True)
class ElementComparison:
    """Exact value next to its asymptotic estimate."""

    exact: float
    asymptotic: float

    @property
    def difference(self) -> float:
        return self.exact - self.asymptotic


@dataclass(frozen=True)
class TailShiftResult:
    """Tail integral over r > 0 against its erfc asymptotic."""

    exact: float
    estimate: float
    ratio: float


def gaussian_moment(a: float, b: float, n: int) -> float:
    """Integral over the real line of exp(-a x^2 + b x) x^n."""
    if not a > 0:
        raise ValueError(f"gaussian_moment needs a > 0, got {a}")
    if n < 0:
        raise ValueError(f"gaussian_moment needs n >= 0, got {n}")
    total = 0.0
    double_factorial = 1.0
    for h in range(n // 2 + 1):
        if h > 0:
            double_factorial *= 2 * h - 1
        total += math.comb(n, 2 * h) * (b / (2.0 * a)) ** (n - 2 * h) * double_factorial / (2.0 * a) ** h
    return float(np.exp(b * b / (4.0 * a)) * np.sqrt(np.pi / a) * total)


def _centred_moments(coefficients: Sequence[float], center: float, a: float) -> float:
    # integral of P(center + z) exp(-a z^2) dz for the polynomial with ascending coefficients
    shifted = Polynomial(coefficients)(Polynomial([center, 1.0]))
    return float(sum(c * gaussian_moment(a, 0.0, j) for j, c in enumerate(shifted.coef) if c != 0.0))


def _energy_equation(e_prime: float, k: float, m: int, n: int) -> float:
    return e_prime ** 2 / (2.0 * (k - e_prime)) + e_prime - m * m - (2 * n + 1) * np.sqrt(2.0 * (k - e_prime))


def solve_V0(k: float) -> float:
    """Potential offset V0 making the ground level E(0, 0) vanish."""
    if not k > 8.0:
        raise ValueError(f"solve_V0 needs k > 8 so that 1 + V0/k stays positive, got {k}")
    s = 1.0 / np.sqrt(2.0 * k)

    def equation(v0: float) -> float:
        return -s * v0 - s ** 3 * v0 ** 2 - (1.0 + v0 / k) ** 1.5

    lower, upper = -2.0 * np.sqrt(2.0 * k), 0.0
    if equation(lower) * equation(upper) > 0:
        raise ValueError(f"No V0 root in [{lower}, {upper}] for k={k}")
    v0 = brentq(equation, lower, upper, xtol=ORACLE_CONFIG["root_xtol"], rtol=4 * np.finfo(float).eps, maxiter=500)
    logger.debug("[Oracle] k=%.6g V0=%.17g residual=%.3e", k, v0, abs(equation(v0)))
    return float(v0)


def solve_Em(k: float, m: int, n: int = 0, v0: Optional[float] = None) -> EnergySolveResult:
    """Physical root E' in (0, k) of the energy equation; E = E' + V0."""
    if v0 is None:
        v0 = solve_V0(k)
    lower, upper = 0.0, k * (1.0 - 1e-6)
    if _energy_equation(lower, k, m, n) * _energy_equation(upper, k, m, n) > 0:
        raise ValueError(f"No physical root of the energy equation for k={k}, m={m}, n={n}")
    e_prime = brentq(
        _energy_equation, lower, upper, args=(k, m, n),
        xtol=ORACLE_CONFIG["root_xtol"], rtol=4 * np.finfo(float).eps, maxiter=500,
    )
    residual = abs(_energy_equation(e_prime, k, m, n))
    if residual > 1e-10 * k:
        logger.warning("[Oracle] Energy residual %.3e above 1e-10 k at k=%.6g, m=%d, n=%d", residual, k, m, n)
    return EnergySolveResult(k=float(k), m=m, n=n, e_prime=float(e_prime), v0=float(v0), residual=float(residual))


def quartic_gap_expansion(k: float, m: int, n: int = 1) -> float:
    """E'(n, m) - E'(0, m) from the energy equation, through order 1/sqrt(2k).

    With N = 2n + 1 the root is E' = N s + m^2 - 2 N^2 + (7 N^3 / 2 - 3 N m^2) / s, s = sqrt(2k).
    """
    s = np.sqrt(2.0 * k)
    levels = 2 * n + 1
    return (
        2.0 * n * s
        - 2.0 * (levels ** 2 - 1)
        + (3.5 * (levels ** 3 - 1) - 3.0 * m * m * (levels - 1)) / s
    )


def circle_profile(m: int, k: float) -> GaussianProfile:
    return solve_Em(k, m, 0).profile


def sphere_profile(l: int, k: float) -> GaussianProfile:
    """r_l = (2k + 4 l(l+1)) / k_l with stiffness sqrt(k_l), k_l = 2k + 3 l(l+1)."""
    k_l = 2.0 * k + 3.0 * l * (l + 1)
    return GaussianProfile(center=1.0 + l * (l + 1) / k_l, stiffness=float(np.sqrt(k_l)))


def _fd_levels(grid: RadialGrid, d: int, k: float, angular: int, n_levels: int, v0: float) -> np.ndarray:
    x = grid.nodes()
    h2 = grid.spacing ** 2
    if d == 3:
        potential = v0 + 2.0 * k * (x - 1.0) ** 2 + angular * (angular + 1) / x ** 2
        diagonal = 2.0 / h2 + potential
        off_diagonal = np.full(x.size - 1, -1.0 / h2)
    else:
        # -f'' + (m^2 + e^(2 rho) V) f = E e^(2 rho) f, symmetrized by e^(-rho) on both sides
        radius = np.exp(x)
        potential = angular * angular + radius ** 2 * (v0 + 2.0 * k * (radius - 1.0) ** 2)
        diagonal = (2.0 / h2 + potential) / radius ** 2
        off_diagonal = -1.0 / h2 / (radius[:-1] * radius[1:])
    return eigh_tridiagonal(
        diagonal, off_diagonal, eigvals_only=True, select="i", select_range=(0, n_levels - 1)
    )


def fd_spectrum(d: int, k: float, angular: int, n_levels: int, grid: Optional[RadialGrid] = None) -> np.ndarray:
    """Lowest n_levels eigenvalues of the radial equation, Richardson-extrapolated over two spacings."""
    if d not in (2, 3):
        raise ValueError(f"fd_spectrum supports d=2 or d=3, got {d}")
    if n_levels < 1:
        raise ValueError(f"n_levels must be >= 1, got {n_levels}")
    if d == 3:
        v0 = -np.sqrt(2.0 * k)
        profile = sphere_profile(angular, k)
        center = 1.0
    else:
        v0 = solve_V0(k)
        profile = GaussianProfile(center=0.0, stiffness=float(np.sqrt(2.0 * k)))
        center = 0.0
    if grid is None:
        grid = RadialGrid.centered(center, k)
    if d == 3 and grid.r_min <= 0.0:
        raise ValueError(f"Radial grid must stay in r > 0, got r_min={grid.r_min}")
    resolution = grid.points_per_length(profile)
    if resolution < ORACLE_CONFIG["fd_min_points_per_length"]:
        raise ValueError(
            f"Grid under-resolved: {resolution:.1f} points per oscillator length, "
            f"need {ORACLE_CONFIG['fd_min_points_per_length']}"
        )
    if not grid.covers(profile):
        logger.debug("[Oracle] Grid [%.4g, %.4g] narrower than the default reach at k=%.6g", grid.r_min, grid.r_max, k)

    coarse = _fd_levels(grid, d, k, angular, n_levels, v0)
    fine = _fd_levels(grid.refined(), d, k, angular, n_levels, v0)
    return (4.0 * fine - coarse) / 3.0


def normalization_overlap(m: int, m_prime: int, k: float) -> float:
    """K_{m,m'} = sqrt(2 sqrt(s s') / (s + s')) exp(-s s' (u - u')^2 / (2 (s + s'))), u = rho_m + 1/s."""
    p, q = circle_profile(m, k), circle_profile(m_prime, k)
    s, t = p.stiffness, q.stiffness
    u = p.center + 1.0 / s
    v = q.center + 1.0 / t
    log_value = 0.5 * (np.log(2.0) + 0.5 * np.log(s * t) - np.log(s + t)) - s * t * (u - v) ** 2 / (2.0 * (s + t))
    return float(np.exp(log_value))


def _exp_polynomial_derivatives(coefficients: Sequence[float], exponent: float, orders: int) -> List[Polynomial]:
    # d^j/drho^j [exp(n rho) P(rho)] = exp(n rho) P_j(rho)
    current = Polynomial(coefficients)
    result = [current]
    for _ in range(orders):
        current = exponent * current + current.deriv()
        result.append(current)
    return result


def circle_matrix_element(
    f: Sequence[float],
    m: int,
    m_prime: int,
    k: float,
    exponent: int = 0,
    h: Optional[int] = None,
) -> ElementComparison:
    """<psi_m', exp(exponent rho) P(rho) exp(i h phi) psi_m> exactly and through the Gaussian lemma.

    f holds the ascending coefficients of P; h defaults to m' - m and any other value gives 0.
    """
    if h is not None and h != m_prime - m:
        return ElementComparison(exact=0.0, asymptotic=0.0)
    p, q = circle_profile(m, k), circle_profile(m_prime, k)
    s, t = p.stiffness, q.stiffness
    c = 0.5 * (s + t)
    drift = s * p.center + t * q.center
    center = (2.0 + exponent + drift) / (2.0 * c)
    log_prefactor = (
        np.log(2.0 * np.pi)
        + 0.25 * np.log(s / (4.0 * np.pi ** 3)) + 0.25 * np.log(t / (4.0 * np.pi ** 3))
        - 0.5 / s - p.center - 0.5 / t - q.center
        + c * center ** 2 - 0.5 * (s * p.center ** 2 + t * q.center ** 2)
    )
    exact = float(np.exp(log_prefactor) * _centred_moments(f, center, c))

    rho = (2.0 + drift) / (2.0 * c)
    derivatives = _exp_polynomial_derivatives(f, exponent, 4)
    series = derivatives[0](rho) + derivatives[2](rho) / (4.0 * c) + derivatives[4](rho) / (32.0 * c * c)
    asymptotic = normalization_overlap(m, m_prime, k) * float(np.exp(exponent * rho) * series)
    return ElementComparison(exact=exact, asymptotic=asymptotic)


def xplus_element(m: int, k: float) -> ElementComparison:
    """<psi_(m+1), exp(rho + i phi) psi_m> against a sqrt(1 + m(m+1)/k)."""
    element = circle_matrix_element([1.0], m, m + 1, k, exponent=1)
    a = 1.0 + 9.0 / (4.0 * np.sqrt(2.0 * k)) + 137.0 / (64.0 * k)
    return ElementComparison(exact=element.exact, asymptotic=a * np.sqrt(1.0 + m * (m + 1) / k))


def dplus_element(m: int, k: float) -> ElementComparison:
    """<psi_(m-1), d+ psi_m> against the truncated series for d+."""
    p = circle_profile(m, k)
    s = p.stiffness
    coefficients = [(m + s * p.center) / SQRT2, -s / SQRT2]
    element = circle_matrix_element(coefficients, m, m - 1, k, exponent=-1)
    return ElementComparison(exact=element.exact, asymptotic=derivative_coefficient(m, k) / SQRT2)


def radial_derivative_element(m: int, k: float) -> float:
    """<psi_m, (d_rho + 1) psi_m>, the anti-Hermitian part of d_rho in the measure r dr."""
    p = circle_profile(m, k)
    coefficients = [1.0 + p.stiffness * p.center, -p.stiffness]
    return circle_matrix_element(coefficients, m, m, k).exact


@dataclass(frozen=True)
class _SpherePair:
    scale: float
    center: float
    log_prefactor: float
    offset_l: float


def _sphere_pair(l: int, L: int, k: float) -> _SpherePair:
    if l < 0 or L < 0:
        raise ValueError(f"Angular levels must be >= 0, got l={l}, L={L}")
    p, q = sphere_profile(l, k), sphere_profile(L, k)
    s, t = p.stiffness, q.stiffness
    j_l, j_L = l * (l + 1), L * (L + 1)
    # r_l - r_L in closed form
    delta = 2.0 * k * (j_l - j_L) / (s * s * t * t)
    residual = s * t * delta ** 2 / (2.0 * (s + t))
    log_norms = (np.log(s * s) + np.log(t * t)) / 8.0 - 0.5 * np.log(np.pi)
    return _SpherePair(
        scale=0.5 * (s + t),
        center=q.center + s * delta / (s + t),
        log_prefactor=log_norms - residual,
        offset_l=-t * delta / (s + t),
    )


def sphere_radial_integral(g: Sequence[float], l: int, L: int, k: float) -> ElementComparison:
    """Integral of f_l f_L g(r) for polynomial g, exactly and through the even-derivative series."""
    if abs(l - L) > 1:
        raise ValueError(f"sphere_radial_integral needs |l - L| <= 1, got l={l}, L={L}")
    pair = _sphere_pair(l, L, k)
    exact = float(np.exp(pair.log_prefactor) * _centred_moments(g, pair.center, pair.scale))

    polynomial = Polynomial(g)
    total, n = 0.0, 0
    derivative = polynomial
    while True:
        total += derivative(pair.center) / (2.0 ** n * math.factorial(n) * (2.0 * pair.scale) ** n)
        derivative = derivative.deriv(2)
        n += 1
        if derivative.degree() == 0 and not np.any(derivative.coef):
            break
    # same N_l N_L exp(-residual) weight as the exact path, times the Gaussian mass
    asymptotic = float(np.exp(pair.log_prefactor) * np.sqrt(np.pi / pair.scale) * total)
    return ElementComparison(exact=exact, asymptotic=asymptotic)


def _sphere_quadrature(l: int, L: int, k: float, integrand: Callable[[float, _SpherePair], float]) -> float:
    # r = center + y / sqrt(scale); integrand receives the offset y / sqrt(scale)
    pair = _sphere_pair(l, L, k)
    root = np.sqrt(pair.scale)
    lower = max(-40.0, -0.9 * pair.center * root)
    value, _ = quad(
        lambda y: integrand(y / root, pair) * np.exp(-y * y),
        lower,
        40.0,
        epsabs=ORACLE_CONFIG["quad_epsabs"],
        epsrel=ORACLE_CONFIG["quad_epsrel"],
        limit=ORACLE_CONFIG["quad_limit"],
    )
    return float(np.exp(pair.log_prefactor) * value / root)


def sphere_rational_integral(function: Callable[[float], float], l: int, L: int, k: float) -> float:
    """Integral of f_l f_L g(r) by adaptive quadrature, for g with a pole at r = 0."""
    if abs(l - L) > 1:
        raise ValueError(f"sphere_rational_integral needs |l - L| <= 1, got l={l}, L={L}")
    return _sphere_quadrature(l, L, k, lambda offset, pair: function(pair.center + offset))


def jl_integral(l: int, k: float) -> float:
    """J_l = integral of f_l f_(l-1) / r."""
    if l < 1:
        raise ValueError(f"J_l needs l >= 1, got {l}")
    return sphere_rational_integral(lambda r: 1.0 / r, l, l - 1, k)


def jl_expansion(l: int, k: float) -> float:
    return 1.0 + 1.0 / np.sqrt(8.0 * k) + (3.0 - 4.0 * l * l) / (8.0 * k)


def jl_printed(l: int, k: float) -> float:
    return 1.0 + 1.0 / np.sqrt(8.0 * k) - l * l / (2.0 * k)


def sphere_deriv_integral(l: int, k: float) -> float:
    """M_l = integral of f_(l-1) f_l' by quadrature, with f_l' = -sqrt(k_l) (r - r_l) f_l."""
    if l < 1:
        raise ValueError(f"M_l needs l >= 1, got {l}")
    stiffness = sphere_profile(l, k).stiffness
    return _sphere_quadrature(l, l - 1, k, lambda offset, pair: -stiffness * (pair.offset_l + offset))


def ml_leading(l: int, k: float) -> float:
    return l / np.sqrt(2.0 * k)


def ml_expansion(l: int, k: float) -> float:
    return l / np.sqrt(2.0 * k) - 18.0 * l ** 3 / (8.0 * k * np.sqrt(2.0 * k))


def tail_shift_bound(a: float, b: float) -> TailShiftResult:
    """Integral over r > 0 of exp(-a (r + b)^2) against exp(-a b^2)/(2ab) [1 - 1/(2ab^2)]."""
    if not a > 0 or not b > 0:
        raise ValueError(f"tail_shift_bound needs a > 0 and b > 0, got a={a}, b={b}")
    # both sides carry exp(-a b^2); integrate the remaining factor
    upper = 40.0 / max(2.0 * a * b, np.sqrt(a))
    reduced, _ = quad(
        lambda r: np.exp(-a * r * r - 2.0 * a * b * r),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=ORACLE_CONFIG["quad_epsrel"],
        limit=ORACLE_CONFIG["quad_limit"],
    )
    reduced_estimate = (1.0 - 1.0 / (2.0 * a * b * b)) / (2.0 * a * b)
    closed = 0.5 * np.sqrt(np.pi / a) * erfcx(b * np.sqrt(a))
    if abs(closed - reduced) > 1e-8 * closed:
        logger.warning("[Oracle] Tail quadrature %.17g differs from erfcx form %.17g", reduced, closed)
    weight = np.exp(-a * b * b)
    return TailShiftResult(
        exact=float(weight * reduced),
        estimate=float(weight * reduced_estimate),
        ratio=float(reduced_estimate / reduced),
    )


def tail_fraction(a: float, b: float) -> float:
    """Share of a unit Gaussian exp(-a x^2) lying beyond distance b on one side."""
    return float(0.5 * erfc(b * np.sqrt(a)))


def slope_fit(ks: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log|value| against log k."""
    values = np.abs(np.asarray(values, dtype=float))
    if values.size < 2 or np.any(values == 0.0) or not np.all(np.isfinite(values)):
        return float("nan")
    return float(np.polyfit(np.log(np.asarray(ks, dtype=float)), np.log(values), 1)[0])


@dataclass(frozen=True)
class SphereDerivatives:
    """Projected derivatives d_a on the truncated sphere with their radial integrals."""

    d: Dict[int, OperatorMatrix]
    j: np.ndarray
    m: np.ndarray
    coefficients: np.ndarray
    report: VerificationReport


def sphere_derivative_matrices(cutoff: int, k: float, ladders: Optional[LadderTable] = None) -> SphereDerivatives:
    """d_a psi_l^m = psi_(l-1)^(m-a) [M_l + l J_l] A(-a, l, m) - psi_(l+1)^(m-a) [M_(l+1) + (l+1) J_(l+1)] B(-a, l, m)."""
    if cutoff < 1:
        raise ValueError(f"Cutoff must be >= 1, got {cutoff}")
    if ladders is None:
        ladders = ladder_coefficients(cutoff)
    dim = (cutoff + 1) ** 2
    j = np.zeros(cutoff + 2)
    m_values = np.zeros(cutoff + 2)
    for l in range(1, cutoff + 1):
        j[l] = jl_integral(l, k)
        m_values[l] = sphere_deriv_integral(l, k)
    down = np.array([m_values[l] + l * j[l] for l in range(cutoff + 2)])

    blocks = {a: np.zeros((dim, dim), dtype=complex) for a in SIGNS}
    for l in range(cutoff + 1):
        for m in range(-l, l + 1):
            column = sphere_index(l, m)
            for a in SIGNS:
                if l >= 1 and abs(m - a) <= l - 1:
                    blocks[a][sphere_index(l - 1, m - a), column] = down[l] * ladders.A(-a, l, m)
                if l + 1 <= cutoff:
                    blocks[a][sphere_index(l + 1, m - a), column] = -down[l + 1] * ladders.B(-a, l, m)
    d = {a: OperatorMatrix(block) for a, block in blocks.items()}

    coefficients = np.array([(down[l + 1] ** 2 - down[l] ** 2) / (2 * l + 1) for l in range(cutoff + 1)])
    printed = np.array([
        (j[l + 1] ** 2 * (l + 1) ** 2 - j[l] ** 2 * l ** 2 + m_values[l + 1] ** 2 - m_values[l] ** 2) / (2 * l + 1)
        + 2 * (l + 1) * j[l + 1] * m_values[l + 1] - 2 * l * j[l] * m_values[l]
        for l in range(cutoff)
    ])

    angular = angular_matrices(cutoff, ladders)
    inner = [sphere_index(l, m) for l in range(cutoff) for m in range(-l, l + 1)]
    weights = OperatorMatrix.diagonal(
        [coefficients[l] for l in range(cutoff + 1) for _ in range(2 * l + 1)]
    )
    worst = 0.0
    for a in SIGNS:
        for b in SIGNS:
            if a == b or abs(a + b) > 1:
                continue
            bracket = commutator(d[a], d[b])
            expected = (weights @ angular[-a - b]) * alpha(a, b)
            worst = max(worst, float(np.max(np.abs((bracket.data - expected.data)[:, inner]))))

    report = VerificationReport(suite="sphere_derivatives", parameters={"lambda": cutoff, "k": float(k)})
    scale = max(1.0, max(op.max_abs() for op in d.values()) ** 2)
    report.add(
        "derivative_commutator_structure",
        worst,
        TOLERANCE_CONFIG["sphere_identity"] * dim * scale,
        detail="l < L blocks",
    )
    leading = float(np.max(np.abs(coefficients[:cutoff] - 1.0)))
    report.add(
        "derivative_commutator_leading",
        leading,
        5.0 / np.sqrt(k),
        detail=f"max deviation of the printed coefficient {float(np.max(np.abs(printed - coefficients[:cutoff]))):.3e}",
    )
    return SphereDerivatives(d=d, j=j, m=m_values, coefficients=coefficients, report=report)


@dataclass
class OracleSweep:
    """Per-k rows plus the slope and threshold checks of one oracle run."""

    table: pd.DataFrame
    report: VerificationReport


ROW_COLUMNS = ["k", "quantity", "exact", "asymptotic", "abs_diff"]


def _row(k: float, quantity: str, exact: float, asymptotic: float) -> Dict[str, float]:
    return {
        "k": float(k),
        "quantity": quantity,
        "exact": float(exact),
        "asymptotic": float(asymptotic),
        "abs_diff": float(abs(exact - asymptotic)),
    }


class RadialOracle:
    """Runs the radial checks over a k sweep, one k per worker thread."""

    def __init__(self, k_sweep: Optional[Sequence[float]] = None, threads: int = 1):
        self.k_sweep = [float(k) for k in (k_sweep or ORACLE_CONFIG["k_sweep"])]
        if not self.k_sweep:
            raise ValueError("The k sweep must not be empty")
        if any(k <= 8.0 for k in self.k_sweep):
            raise ValueError(f"Every k in the sweep must exceed 8, got {self.k_sweep}")
        self.threads = max(1, int(threads))
        self.handlers: Dict[str, Callable[[float, int], List[Dict[str, float]]]] = {
            "energies": self._energy_rows,
            "gap": self._gap_rows,
            "cl": self._cl_rows,
            "jl": self._jl_rows,
            "ml": self._ml_rows,
            "xplus": self._xplus_rows,
            "overlap": self._overlap_rows,
            "dplus": self._dplus_rows,
            "tail": self._tail_rows,
        }

    def run(self, check: str, d: int = 3) -> OracleSweep:
        """Sweep one check over k and evaluate its pass criteria."""
        if check not in self.handlers:
            raise ValueError(f"Unknown oracle check: {check}")
        if d not in (2, 3):
            raise ValueError(f"Oracle supports d=2 or d=3, got {d}")
        logger.info("[Oracle] Running %s (d=%d) over %d values of k", check, d, len(self.k_sweep))
        handler = self.handlers[check]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            chunks = list(executor.map(lambda k: handler(k, d), self.k_sweep))
        rows = [row for chunk in chunks for row in chunk]
        table = pd.DataFrame(rows, columns=ROW_COLUMNS)
        report = VerificationReport(
            suite=f"oracle_{check}", parameters={"check": check, "d": d, "k_sweep": list(self.k_sweep)}
        )
        self._evaluate(check, d, table, report)
        return OracleSweep(table=table, report=report)

    def run_all(self, checks: Optional[Sequence[str]] = None, d: int = 3) -> Dict[str, OracleSweep]:
        return {check: self.run(check, d) for check in (checks or ORACLE_CONFIG["checks"])}

    def _energy_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        if d == 2:
            v0 = solve_V0(k)
            rows.append(_row(k, "E_0_0", solve_Em(k, 0, 0, v0).energy, 0.0))
            for m in (1, 2):
                rows.append(_row(k, f"E_0_{m}", solve_Em(k, m, 0, v0).energy, m * m))
        else:
            ground = fd_spectrum(3, k, 0, 2)
            rows.append(_row(k, "E_0_0", ground[0], 0.0))
            rows.append(_row(k, "gap_0", ground[1] - ground[0], 2.0 * np.sqrt(2.0 * k)))
            for l in (1, 2):
                rows.append(_row(k, f"E_0_{l}", fd_spectrum(3, k, l, 1)[0], l * (l + 1)))
        return rows

    def _gap_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        if d == 2:
            levels = fd_spectrum(2, k, 1, 2)
            v0 = solve_V0(k)
            quartic = solve_Em(k, 1, 1, v0).energy - solve_Em(k, 1, 0, v0).energy
            target = 2.0 * np.sqrt(2.0 * k) - 2.0
            return [
                _row(k, "gap_fd_1", levels[1] - levels[0], target),
                _row(k, "gap_quartic_1", quartic, target),
                _row(k, "gap_quartic_1_expansion", quartic, quartic_gap_expansion(k, 1, 1)),
            ]
        levels = fd_spectrum(3, k, 0, 2)
        return [_row(k, "gap_fd_0", levels[1] - levels[0], 2.0 * np.sqrt(2.0 * k))]

    def _cl_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        for l in (1, 2):
            element = sphere_radial_integral([0.0, 1.0], l, l - 1, k)
            rows.append(_row(k, f"c_{l}", element.exact, np.sqrt(1.0 + l * l / k)))
        return rows

    def _jl_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        for l in (1, 2):
            value = jl_integral(l, k)
            rows.append(_row(k, f"J_{l}", value, jl_expansion(l, k)))
            rows.append(_row(k, f"J_{l}_printed", value, jl_printed(l, k)))
        return rows

    def _ml_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        for l in range(1, 6):
            value = sphere_deriv_integral(l, k)
            rows.append(_row(k, f"M_{l}", value, ml_leading(l, k)))
            rows.append(_row(k, f"M_{l}_expansion", value, ml_expansion(l, k)))
        return rows

    def _xplus_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        for m in (0, 1):
            element = xplus_element(m, k)
            rows.append(_row(k, f"xplus_{m}", element.exact, element.asymptotic))
        return rows

    def _overlap_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        for m in (1, 2):
            rows.append(_row(k, f"K_{m}_{m + 1}", normalization_overlap(m, m + 1, k), 1.0))
            element = circle_matrix_element([1.0], m, m + 1, k)
            rows.append(_row(k, f"T1_{m}_{m + 1}", element.exact, element.asymptotic))
        rows.append(_row(k, "norm_1", circle_matrix_element([1.0], 1, 1, k).exact, 1.0))
        return rows

    def _dplus_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        rows = []
        for m in (1, 2):
            element = dplus_element(m, k)
            rows.append(_row(k, f"dplus_{m}", element.exact, element.asymptotic))
            rows.append(_row(k, f"dplus_{m}_leading", element.exact, (m - 0.5) / SQRT2))
        rows.append(_row(k, "drho_1", radial_derivative_element(1, k), 0.0))
        return rows

    def _tail_rows(self, k: float, d: int) -> List[Dict[str, float]]:
        a = np.sqrt(2.0 * k)
        result = tail_shift_bound(a, 1.0)
        return [
            _row(k, "tail_ratio", result.ratio, 1.0),
            _row(k, "tail_fraction", tail_fraction(a, sphere_profile(0, k).center), 0.0),
        ]

    def _quantity(self, table: pd.DataFrame, quantity: str) -> pd.DataFrame:
        return table[table["quantity"] == quantity].sort_values("k")

    def _slope_check(
        self, report: VerificationReport, table: pd.DataFrame, quantity: str, target: float, band: float
    ) -> None:
        rows = self._quantity(table, quantity)
        slope = slope_fit(rows["k"], rows["abs_diff"])
        report.add(f"{quantity}_slope", abs(slope - target), band, detail=f"slope {slope:.4f}, expected {target}")

    def _evaluate(self, check: str, d: int, table: pd.DataFrame, report: VerificationReport) -> None:
        config = ORACLE_CONFIG
        energy = (config["energy_slope"], config["energy_slope_band"])
        element = (config["element_slope"], config["element_slope_band"])
        if check == "energies":
            ground = self._quantity(table, "E_0_0")
            if d == 2:
                report.add("energy_calibration", float(ground["abs_diff"].max()), 1e-6)
                for m in (1, 2):
                    self._slope_check(report, table, f"E_0_{m}", *energy)
            else:
                gaps = self._quantity(table, "gap_0")
                report.add(
                    "fd_ground_state",
                    float(np.max(ground["abs_diff"].to_numpy() / gaps["exact"].to_numpy())),
                    1e-3,
                    detail="|E_0_0| relative to the n=1 gap",
                )
                for l in (1, 2):
                    self._slope_check(report, table, f"E_0_{l}", *energy)
        elif check == "gap":
            for quantity in table["quantity"].unique():
                rows = self._quantity(table, quantity)
                if quantity.endswith("_expansion"):
                    report.add(
                        quantity, float(rows["abs_diff"].max()), config["quartic_gap_abs_tol"],
                        detail="quartic root against its own 1/sqrt(k) expansion",
                    )
                    continue
                # relative band from gap_min_k on, else the largest k
                gated = rows[rows["k"] >= config["gap_min_k"]]
                if gated.empty:
                    gated = rows.tail(1)
                relative = np.abs(gated["exact"] - gated["asymptotic"]) / gated["asymptotic"]
                report.add(
                    f"{quantity}_relative", float(relative.max()), config["gap_relative_tol"],
                    detail=f"k >= {float(gated['k'].min()):.6g}",
                )
        elif check == "cl":
            for l in (1, 2):
                self._slope_check(report, table, f"c_{l}", *element)
        elif check == "jl":
            for l in (1, 2):
                self._slope_check(report, table, f"J_{l}", *element)
                rows = self._quantity(table, f"J_{l}_printed")
                slope = slope_fit(rows["k"], rows["abs_diff"])
                logger.info("[Oracle] Printed J_%d remainder slope %.4f", l, slope)
        elif check == "ml":
            positive = all((self._quantity(table, f"M_{l}")["exact"] > 0).all() for l in range(1, 6))
            report.add("M_positive", 0.0 if positive else 1.0, 0.0, detail="M_l > 0 for 1 <= l <= 5")
            for l in (1, 2):
                self._slope_check(report, table, f"M_{l}", *element)
        elif check == "xplus":
            for m in (0, 1):
                self._slope_check(report, table, f"xplus_{m}", *element)
        elif check == "overlap":
            for m in (1, 2):
                self._slope_check(report, table, f"K_{m}_{m + 1}", *element)
                rows = self._quantity(table, f"T1_{m}_{m + 1}")
                report.add(f"T1_{m}_{m + 1}_matches_K", float(rows["abs_diff"].max()), 1e-12)
            rows = self._quantity(table, "norm_1")
            report.add("normalization", float(rows["abs_diff"].max()), 1e-12)
        elif check == "dplus":
            for m in (1, 2):
                series = self._quantity(table, f"dplus_{m}")["abs_diff"].to_numpy()
                leading = self._quantity(table, f"dplus_{m}_leading")["abs_diff"].to_numpy()
                report.add(
                    f"dplus_{m}_series_gain",
                    float(np.max(series / leading)),
                    0.1,
                    detail="series error over leading-term error",
                )
            rows = self._quantity(table, "drho_1")
            report.add("radial_derivative_vanishes", float(rows["abs_diff"].max()), 1e-10)
        elif check == "tail":
            rows = self._quantity(table, "tail_ratio")
            report.add("tail_ratio", float(rows["abs_diff"].max()), 0.01)
            rows = self._quantity(table, "tail_fraction")
            report.add("tail_fraction", float(rows["exact"].max()), 1e-10)
