"""
Unit tests for the fuzzy sphere module.
Tests operator construction, the identity suite, spectra, the so(4) realization,
the theta ladders, fuzzy harmonics and the O(3) action.
"""

import dataclasses
import pytest
import numpy as np
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.linalg import OperatorMatrix, max_residual
from utils.sphere import (
    SphereIdentitySuite,
    build_fuzzy_harmonics,
    build_so4_realization,
    build_sphere,
    commutator_coefficient,
    g_gamma_form,
    g_product_form,
    gamma_form_ratio,
    harmonic_top_norm,
    o3_transform,
    radial_weights,
    sphere_consistency,
    sphere_generation_dimension,
    sphere_index,
    sphere_spectra,
    theta_ladders,
    verify_fuzzy_harmonics,
    verify_so4_realization,
    verify_sphere_identities,
)


def default_k(cutoff):
    return float(cutoff ** 2 * (cutoff + 1) ** 2)


@pytest.fixture
def model():
    """Sphere with L = 2 on the default schedule."""
    return build_sphere(2, default_k(2))


class TestSphereModel:
    """Tests for build_sphere."""

    def test_dimension_and_index(self, model):
        """Test the (L+1)^2 basis and the l^2 + l + m ordering."""
        assert model.dim == 9
        assert sphere_index(0, 0) == 0
        assert sphere_index(1, -1) == 1
        assert sphere_index(2, 2) == 8

    def test_radial_weights(self):
        """Test c_0 = c_(L+1) = 0 and c_l = sqrt(1 + l^2 / k)."""
        weights = radial_weights(3, 16.0)
        assert weights[0] == 0.0
        assert weights[4] == 0.0
        assert weights[2] == pytest.approx(np.sqrt(1.25))

    def test_ladder_adjoints(self, model):
        """Test x(+)^H = x(-) and Hermitian Cartesian coordinates."""
        assert max_residual(model.x[1].adjoint(), model.x[-1]) <= 1e-14
        assert model.x[0].is_hermitian()
        assert all(model.x_cart[i].is_hermitian() for i in (1, 2, 3))

    def test_invalid_parameters(self):
        """Test that L < 1 or k <= 0 raise."""
        with pytest.raises(ValueError):
            build_sphere(0, 4.0)
        with pytest.raises(ValueError):
            build_sphere(1, -1.0)

    def test_consistency(self):
        """Test L(L+1) <= 2 sqrt(2k)."""
        assert sphere_consistency(2, default_k(2))
        assert not sphere_consistency(3, 1.0)

    def test_commutator_coefficient(self):
        """Test K = 1/k + (1 + L^2/k) / (2L+1)."""
        assert commutator_coefficient(2, 36.0) == pytest.approx(1.0 / 36.0 + (1.0 + 4.0 / 36.0) / 5.0)


class TestSphereIdentities:
    """Tests for SphereIdentitySuite."""

    @pytest.mark.parametrize("cutoff", [1, 2, 3])
    def test_identities_hold(self, cutoff):
        """Test the exact identities, including the default-schedule commutator."""
        report = verify_sphere_identities(build_sphere(cutoff, default_k(cutoff)))
        assert report.passed, report.failures
        assert "sphere_specialized_commutator" in [check.name for check in report.checks]

    def test_identities_hold_off_schedule(self):
        """Test that the identities hold for k away from the default schedule."""
        report = verify_sphere_identities(build_sphere(2, 1000.0))
        assert report.passed, report.failures
        assert "sphere_specialized_commutator" not in [check.name for check in report.checks]

    def test_broken_radius_is_caught(self, model):
        """Test that a perturbed R^2 fails its check."""
        broken = dataclasses.replace(model, radius_squared=model.radius_squared * 1.01)
        assert not SphereIdentitySuite().verify(broken).get("sphere_radius_squared").passed

    def test_spectra(self, model):
        """Test H = l(l+1) with multiplicities 1, 3, 5."""
        spectra = sphere_spectra(model)
        values, counts = np.unique(np.round(spectra["H"], 10), return_counts=True)
        assert list(values) == [0.0, 2.0, 6.0]
        assert list(counts) == [1, 3, 5]
        assert np.allclose(spectra["L2"], spectra["H"])

    def test_operator_names_are_distinct(self, model):
        """Test that the Casimir and the Cartesian L_2 keep separate entries."""
        ops = model.operators()
        assert max_residual(ops["L2"], model.casimir) == 0.0
        assert max_residual(ops["L_2"], model.angular_cart[2]) == 0.0
        assert len(ops) == 15

    def test_generation(self):
        """Test that x(+), x(-), x0 generate the full matrix algebra."""
        sphere = build_sphere(1, default_k(1))
        assert sphere_generation_dimension(sphere) == sphere.dim ** 2


class TestSo4Realization:
    """Tests for the so(4) realization, g and the theta ladders."""

    @pytest.mark.parametrize("cutoff", [1, 2, 3])
    def test_realization_checks(self, cutoff):
        """Test so(4), the split Casimirs and the g rescaling."""
        report = verify_so4_realization(build_sphere(cutoff, default_k(cutoff)))
        assert report.passed, report.failures

    def test_gamma_form_ratio(self):
        """Test g_gamma / g_product = coth(pi sqrt(k) / 2)^((-1)^l / 2)."""
        k = 3.0
        for l in range(4):
            ratio = g_gamma_form(l, 3, k) / g_product_form(l, 3, k)
            assert ratio == pytest.approx(gamma_form_ratio(l, k), rel=1e-10)

    def test_g_range(self):
        """Test that g(l) outside 0 <= l <= L raises."""
        with pytest.raises(ValueError):
            g_product_form(4, 3, 10.0)

    def test_to_frame(self, model):
        """Test the per-level g table."""
        frame = build_so4_realization(model).to_frame()
        assert list(frame.columns) == ["l", "d", "g_product", "g_gamma", "ratio"]
        assert len(frame) == model.cutoff + 1

    def test_theta_ladders(self, model):
        """Test that theta(+-) shift lambda by one and are adjoint."""
        ladders = theta_ladders(build_so4_realization(model))
        assert ladders.report.passed, ladders.report.failures


class TestFuzzyHarmonics:
    """Tests for the fuzzy spherical harmonics."""

    def test_count(self, model):
        """Test (2L+1)^2 harmonics for l <= 2L."""
        harmonics = build_fuzzy_harmonics(model)
        assert len(harmonics.harmonics) == (2 * model.cutoff + 1) ** 2

    def test_properties(self, model):
        """Test grading, conjugation and tracelessness."""
        report = verify_fuzzy_harmonics(build_fuzzy_harmonics(model), model)
        assert report.passed, report.failures

    def test_y00_is_constant(self, model):
        """Test Y(0, 0) = 1 / sqrt(4 pi)."""
        harmonics = build_fuzzy_harmonics(model, 0)
        expected = OperatorMatrix.identity(model.dim) / np.sqrt(4.0 * np.pi)
        assert max_residual(harmonics[(0, 0)], expected) <= 1e-14

    def test_top_norm_sign(self):
        """Test M_1 = -sqrt(3 / (4 pi)) so that Y_1^1 = M_1 t(+)."""
        assert harmonic_top_norm(1) == pytest.approx(-np.sqrt(3.0 / (4.0 * np.pi)))

    def test_degree_limit(self, model):
        """Test that l_max above 2L raises."""
        with pytest.raises(ValueError):
            build_fuzzy_harmonics(model, 2 * model.cutoff + 1)

    def test_to_frame(self, model):
        """Test the (l, m, row, col, re, im) export."""
        frame = build_fuzzy_harmonics(model, 1).to_frame()
        assert list(frame.columns) == ["l", "m", "row", "col", "re", "im"]


class TestO3Transform:
    """Tests for rotations and parity."""

    def test_rotation(self, model):
        """Test that a rotation acts as an SO(3) matrix on x and L."""
        result = o3_transform(model, "rotation", (0.3, -0.5, 0.7))
        assert result.report.passed, result.report.failures
        assert np.allclose(result.rotation.T @ result.rotation, np.eye(3), atol=1e-10)

    def test_parity(self, model):
        """Test x -> -x, L -> L and E1 <-> E2."""
        result = o3_transform(model, "parity")
        assert result.report.passed, result.report.failures

    def test_rotation_needs_three_angles(self, model):
        """Test that a wrong angle count raises."""
        with pytest.raises(ValueError):
            o3_transform(model, "rotation", (0.1, 0.2))

    def test_unknown_kind(self, model):
        """Test that an unknown transformation raises."""
        with pytest.raises(ValueError):
            o3_transform(model, "boost")
