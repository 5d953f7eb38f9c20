"""
Configuration module for the fuzzy geometry lab.
Contains all constants and configuration settings.
"""

from typing import Dict, Any, List
import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Residual tolerances (scaled by dim where noted)
TOLERANCE_CONFIG: Dict[str, float] = {
    "hermitian": 1e-12,
    "identity": 1e-12,
    "circle_identity": 1e-12,
    "sphere_identity": 1e-11,
    "ladder_identity": 1e-13,
    "eigen_reconstruction": 1e-10,
    "unitary": 1e-12,
    "gamma_form": 1e-10,
    "transform": 1e-11,
}

# Cyclic Jacobi eigensolver
JACOBI_CONFIG: Dict[str, Any] = {
    "off_diagonal_tol": 1e-13,
    "max_sweeps": 100,
    "phase_threshold": 1e-10,
    "large_theta": 1e100,
}

# Power iteration for the operator norm
POWER_ITERATION_CONFIG: Dict[str, Any] = {
    "relative_tol": 1e-12,
    "stable_iterations": 5,
    "max_iterations": 10000,
}

# Algebra generation (word closure rank)
GENERATION_CONFIG: Dict[str, Any] = {
    "rank_threshold": 1e-8,
    "circle_max_lambda": 4,
    "sphere_max_lambda": 2,
}

# Sphere quadrature defaults: n_theta = 2*L + theta_pad, n_phi = 4*L + phi_pad
GRID_CONFIG: Dict[str, int] = {
    "theta_pad": 16,
    "phi_pad": 33,
}

# k(Lambda) schedules
SCHEDULE_CONFIG: Dict[str, Any] = {
    "names": ["default", "prop-circle", "prop-sphere", "practical", "custom"],
    "default_schedule": "default",
    "prop_sphere_max_lambda": 5,
}

# Radial oracle
ORACLE_CONFIG: Dict[str, Any] = {
    "k_sweep": [1e4, 1e5, 1e6, 1e7, 1e8],
    "fd_points": 4000,
    "fd_half_width_lengths": 12.0,
    "fd_min_points_per_length": 40,
    "fd_max_half_width": 0.9,
    "root_xtol": 1e-12,
    "quad_epsabs": 1e-15,
    "quad_epsrel": 1.2e-14,
    "quad_limit": 400,
    "energy_slope": -0.5,
    "energy_slope_band": 0.15,
    "element_slope": -1.5,
    "element_slope_band": 0.2,
    "gap_relative_tol": 0.02,
    "gap_min_k": 1e6,
    "quartic_gap_abs_tol": 1.0,
    "checks": ["energies", "gap", "cl", "jl", "ml", "xplus", "overlap", "dplus", "tail"],
}

# Convergence lab
CONVERGENCE_CONFIG: Dict[str, Any] = {
    "circle_lambdas": list(range(2, 11)),
    "sphere_lambdas": [1, 2, 3, 4],
    "witness_margin": 3,
    "gaussian_width": 1.5,
    "circle_support": 40,
}

# Report formatting
REPORT_CONFIG: Dict[str, Any] = {
    "float_format": "%.17g",
    "line_terminator": "\n",
    "default_format": "json",
    "formats": ["csv", "json"],
    "default_output_dir": ".",
}

# Relation verified by each check, written out for the report's label column
CHECK_LABELS: Dict[str, str] = {
    # circle identities
    "circle_nilpotency": "(xi+)^(2Lam+1) = (xi-)^(2Lam+1) = 0",
    "circle_minimal_polynomial": "prod_m (L - m) = 0",
    "circle_grading": "[L, xi+-] = +-xi+-",
    "circle_xi_commutator": "[xi+, xi-] = -L/k + mu/2 (P_Lam - P_-Lam)",
    "circle_radius_squared": "R^2 = 1 + H/k - mu/2 (P_Lam + P_-Lam)",
    "circle_projector_polynomial": "P_m = polynomial in L",
    # circle so(3)
    "so3_plus_minus": "[E+, E-] = E0",
    "so3_grading": "[E0, E+-] = +-E+-",
    "so3_casimir": "C = Lam(Lam+1)",
    "so3_xi_factorization": "xi+- = f+-(L) E+-",
    "so3_inverse_factorization": "E+- = f+-(L)^-1 xi+-",
    "so3_casimir_from_xi": "2 xi- xi+ f+(L+1)^-2 = Lam(Lam+1) - L(L+1)",
    "so3_partial_isometry": "U^H U = 1 - P_Lam",
    # circle O(2)
    "unitarity": "U U^H = 1",
    "rotation_phase_law": "xi+- -> exp(+-i theta) xi+-",
    "rotation_fixes_angular": "L -> L",
    "reflection_flips_angular": "L -> -L",
    "reflection_swaps_ladders": "xi+ <-> xi-",
    "transformed_xi_commutator": "[xi+, xi-] = -L/k + mu/2 (P_Lam - P_-Lam) after the map",
    # circle derivatives
    "derivative_brackets_diagonal": "[d+, d-], {d+, d-} diagonal",
    "derivative_commutator_interior": "[d+, d-]_mm = m - 3m/(2s) - (4m^3 + 31m/8)/(2k)",
    "derivative_anticommutator_interior": "{d+, d-}_mm = m^2 + 1/4 - (3m^2/2 + 3/8)/s - (2m^4 + 47m^2/8 + 27/32)/(2k)",
    "derivative_boundary_terms": "{d+, d-} at m = +-Lam",
    "derivative_commutator_structure": "[d_a, d_b] = alpha(a, b) w L_(-a-b)",
    "derivative_commutator_leading": "(Q_l^2 - P_l^2)/(2l+1) = 1 + O(1/sqrt(k))",
    # sphere identities
    "sphere_casimir_polynomial": "prod_l (L^2 - l(l+1)) = 0",
    "sphere_angular_polynomial": "prod_m (L3 - m) P_l = 0",
    "sphere_nilpotency": "(x+-)^(2Lam+1) = 0",
    "sphere_vector_covariance": "[L_i, x_j] = i eps_ijh x_h",
    "sphere_angular_algebra": "[L_i, L_j] = i eps_ijh L_h",
    "sphere_orthogonality": "x . L = 0",
    "sphere_xi_commutator": "[x_i, x_j] = i eps_ijh (-1/k + K P_Lam) L_h",
    "sphere_radius_squared": "R^2 = 1 + (L^2 + 1)/k - c P_Lam",
    "sphere_specialized_commutator": "[x_i, x_j] at k = Lam^2 (Lam+1)^2",
    # sphere so(4)
    "so4_x_commutator": "[X_i, X_j] = i eps_ijh L_h",
    "so4_vector_covariance": "[L_i, X_j] = i eps_ijh X_h",
    "so4_orthogonality": "X . L = L . X = 0",
    "so4_casimir_sum": "X^2 + L^2 = Lam(Lam+2)",
    "so4_split_commute": "[E1_i, E2_j] = 0",
    "so4_split_algebra": "E1, E2 close su(2)",
    "so4_split_casimirs": "E1^2 = E2^2 = Lam/2 (Lam/2 + 1)",
    "so4_weight_differences": "d_l^2 - d_(l+1)^2 = 2l + 1",
    "so4_rescaling": "x^a = g X^a g",
    "so4_inverse_rescaling": "X^a = g^-1 x^a g^-1",
    "so4_g_recursion": "g_(l-1) g_l d_l = c_l",
    "so4_gamma_form": "g from Gamma functions = product form x coth factor",
    "so4_lambda_equation": "Lambda(Lambda+1) = L^2",
    # sphere theta ladders
    "theta_casimir_shift": "[L^2, X_i] = 2 (X_i + chi_i)",
    "theta_chi_shift": "L^2 chi_i = (chi_i + 2 X_i) L^2",
    "theta_lowering": "Lambda theta-_i = theta-_i (Lambda - 1)",
    "theta_raising": "Lambda theta+_i = theta+_i (Lambda + 1)",
    "theta_casimir_eigen": "L^2 theta+-_i = theta+-_i nu+-",
    "theta_adjoint": "(theta-_i)^H = theta+_i",
    # sphere O(3)
    "rotation_vector_law": "x_i -> R_ji x_j",
    "rotation_angular_law": "L_i -> R_ji L_j",
    "rotation_orthogonal": "R^T R = 1",
    "rotation_proper": "det R = 1",
    "parity_flips_coordinates": "x_i -> -x_i",
    "parity_fixes_angular": "L_i -> L_i",
    "parity_swaps_su2": "E1 <-> E2",
    # fuzzy harmonics
    "harmonic_grading": "[L3, Y_lm] = m Y_lm",
    "harmonic_conjugation": "Y_lm^H = (-1)^m Y_l,-m",
    "harmonic_trace_free": "tr Y_lm = 0 for l >= 1",
    # ladder coefficients
    "ladder_commuting_coordinates": "[t^a, t^b] = 0 on Y_lm",
    "ladder_two_step_symmetry": "A(b, l+1, m) A(a, l, m+b) = A(a, l+1, m) A(b, l, m+a)",
    "ladder_lower_upper_relation": "A(a, l, m) = B(-a, l-1, m+a)",
    "ladder_two_step_cancellation": "sum_a A(a, l+1, m) A(-a, l, m+a) = 0",
    "ladder_lower_norm": "sum_a A(a, l, m)^2 = l/(2l+1)",
    "ladder_upper_norm": "sum_a A(a, l+1, m-a)^2 = (l+1)/(2l+1)",
    "mixed_angular_momentum_projection": "A(-1) B(1) - A(1) B(-1) = m/(2l+1)",
    "mixed_lower_trace": "sum_a A(a, l, m) B(-a, l-1, m+a) = l/(2l+1)",
    "mixed_ladder_commutator": "A(s) B(0) - A(0) B(s) = s gamma/(2l+1)",
    "mixed_lower_shift": "[L_s, t_s] = 0 on lower terms",
    "mixed_upper_shift": "[L_s, t_s] = 0 on upper terms",
    "mixed_lower_zero_rotation": "[L_s, t0] prop t_s on lower terms",
    "mixed_upper_zero_rotation": "[L_s, t0] prop t_s on upper terms",
    "mixed_lower_cross_rotation": "[L_s, t_-s] prop t0 on lower terms",
    "mixed_upper_cross_rotation": "[L_s, t_-s] prop t0 on upper terms",
    # radial oracle
    "energy_calibration": "E(0, 0) = 0",
    "fd_ground_state": "E(0, 0) = 0 against the n=1 gap",
    "M_positive": "M_l > 0",
    "normalization": "|psi_m| = 1",
    "radial_derivative_vanishes": "<psi, (d_rho + 1) psi> = 0",
    "tail_ratio": "tail integral against its bound",
    "tail_fraction": "mass beyond the cutoff",
}

# Exit codes of the command line
EXIT_CODES: Dict[str, int] = {
    "ok": 0,
    "failed": 1,
    "usage": 2,
}


def _parse_float_list(raw: str) -> List[float]:
    """Parse a comma separated list of floats."""
    return [float(item) for item in raw.split(",") if item.strip()]


# Environment-based runtime configuration
def get_runtime_config() -> Dict[str, Any]:
    """Get runtime configuration from environment variables with fallbacks."""
    threads = os.getenv("FUZZYLAB_THREADS")
    k_sweep = os.getenv("FUZZYLAB_K_SWEEP")
    return {
        "seed": int(os.getenv("FUZZYLAB_SEED", "0")),
        "threads": int(threads) if threads else (os.cpu_count() or 1),
        "output_dir": os.getenv("FUZZYLAB_OUTPUT_DIR", REPORT_CONFIG["default_output_dir"]),
        "format": os.getenv("FUZZYLAB_FORMAT", REPORT_CONFIG["default_format"]),
        "k_sweep": _parse_float_list(k_sweep) if k_sweep else list(ORACLE_CONFIG["k_sweep"]),
    }
