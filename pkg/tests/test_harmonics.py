"""
Unit tests for the angular data module.
Tests the ladder coefficients, their identities, spherical harmonics and sphere quadrature.
"""

import pytest
import numpy as np
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.harmonics import (
    SIGNS,
    SphereGrid,
    coefficient_a,
    coefficient_b,
    coefficient_gamma,
    eval_Ylm,
    ladder_coefficients,
    sphere_inner_product,
    verify_ladder_identities,
)


@pytest.fixture
def table():
    """Ladder table up to L = 4."""
    return ladder_coefficients(4)


class TestLadderCoefficients:
    """Tests for the closed-form A, B and gamma."""

    def test_ladder_table_matches_closed_forms(self, table):
        """Test table lookups against the closed forms."""
        for l in range(5):
            for m in range(-l, l + 1):
                for a in SIGNS:
                    assert table.A(a, l, m) == coefficient_a(a, l, m)
                    assert table.B(a, l, m) == coefficient_b(a, l, m)

    def test_out_of_range_is_zero(self, table):
        """Test that indices outside the multiplets give zero."""
        assert table.A(1, 0, 0) == 0.0
        assert table.B(0, 2, 3) == 0.0
        assert table.gamma(1, 2, 2) == 0.0
        assert table.A(0, 50, 0) == 0.0

    def test_known_values(self):
        """Test cos(theta) Y_0^0 = Y_1^0 / sqrt(3)."""
        assert coefficient_b(0, 0, 0) == pytest.approx(1.0 / np.sqrt(3.0))
        assert coefficient_a(0, 1, 0) == pytest.approx(1.0 / np.sqrt(3.0))
        assert coefficient_gamma(1, 1, 0) == pytest.approx(1.0)

    def test_invalid_ladder_index(self):
        """Test that a ladder index outside -1, 0, 1 raises even out of range."""
        with pytest.raises(ValueError):
            coefficient_a(2, 2, 0)
        with pytest.raises(ValueError):
            coefficient_a(-2, 0, 0)
        with pytest.raises(ValueError):
            coefficient_b(2, 5, 9)
        with pytest.raises(ValueError):
            coefficient_gamma(0, 1, 0)
        with pytest.raises(ValueError):
            coefficient_gamma(0, -1, 0)

    def test_lower_coefficient_is_shifted_upper(self):
        """Test A(a, l, m) = B(-a, l-1, m+a) from the closed forms."""
        for l in range(1, 7):
            for m in range(-l, l + 1):
                for a in SIGNS:
                    assert coefficient_a(a, l, m) == pytest.approx(
                        coefficient_b(-a, l - 1, m + a), abs=1e-15
                    )

    def test_negative_lambda_raises(self):
        """Test that a negative table size is refused."""
        with pytest.raises(ValueError):
            ladder_coefficients(-1)

    def test_table_is_immutable(self, table):
        """Test that the stored arrays are read-only."""
        with pytest.raises(ValueError):
            table._a[0, 0, 0] = 1.0

    def test_to_frame(self, table):
        """Test the (a, l, m, A, B) export."""
        frame = table.to_frame()
        assert list(frame.columns) == ["a", "l", "m", "A", "B"]
        assert len(frame) == 3 * sum(2 * l + 1 for l in range(table.max_l + 1))


class TestLadderIdentities:
    """Tests for verify_ladder_identities."""

    @pytest.mark.parametrize("lambda_max", [0, 1, 3, 6])
    def test_all_identities_hold(self, lambda_max):
        """Test that every identity family passes."""
        report = verify_ladder_identities(ladder_coefficients(lambda_max))
        assert report.passed, report.failures
        assert "ladder_commuting_coordinates" in [check.name for check in report.checks]
        assert "mixed_ladder_commutator" in [check.name for check in report.checks]
        assert "ladder_lower_upper_relation" in [check.name for check in report.checks]


class TestSphericalHarmonics:
    """Tests for eval_Ylm and SphereGrid."""

    def test_y00(self):
        """Test Y_0^0 = 1 / sqrt(4 pi)."""
        assert eval_Ylm(0, 0, 0.3, 1.2) == pytest.approx(1.0 / np.sqrt(4.0 * np.pi))

    def test_condon_shortley_phase(self):
        """Test Y_1^1 = -sqrt(3 / (8 pi)) sin(theta) exp(i phi)."""
        theta, phi = 0.7, 0.4
        expected = -np.sqrt(3.0 / (8.0 * np.pi)) * np.sin(theta) * np.exp(1j * phi)
        assert eval_Ylm(1, 1, theta, phi) == pytest.approx(expected)

    def test_conjugation(self):
        """Test Y_l^(-m) = (-1)^m conj(Y_l^m)."""
        value = eval_Ylm(3, 2, 1.1, 2.3)
        assert eval_Ylm(3, -2, 1.1, 2.3) == pytest.approx(np.conj(value))

    def test_invalid_indices(self):
        """Test that |m| > l raises."""
        with pytest.raises(ValueError):
            eval_Ylm(1, 2, 0.0, 0.0)

    def test_grid_orthonormality(self):
        """Test <Y_l^m, Y_l'^m'> = delta on an exact grid."""
        grid = SphereGrid.for_degree(4)
        samples = grid.harmonics(4)
        keys = sorted(samples)
        gram = np.array([[sphere_inner_product(samples[p], samples[q], grid) for q in keys] for p in keys])
        assert np.allclose(gram, np.eye(len(keys)), atol=1e-12)

    def test_coordinate_expansion(self, table):
        """Test t^a Y_l^m = A Y_(l-1) + B Y_(l+1) by quadrature."""
        grid = SphereGrid.for_degree(6)
        samples = grid.harmonics(6)
        for a in SIGNS:
            t = grid.coordinate(a)
            for l, m in ((2, 1), (3, -2), (1, 0)):
                product = t * samples[(l, m)]
                if abs(m + a) <= l - 1:
                    lower = sphere_inner_product(samples[(l - 1, m + a)], product, grid)
                    assert lower == pytest.approx(table.A(a, l, m), abs=1e-12)
                upper = sphere_inner_product(samples[(l + 1, m + a)], product, grid)
                assert upper == pytest.approx(table.B(a, l, m), abs=1e-12)

    def test_inner_product_shape_check(self):
        """Test that mismatched sample shapes raise."""
        grid = SphereGrid(4, 5)
        with pytest.raises(ValueError):
            sphere_inner_product(np.zeros((3, 3)), np.zeros(grid.shape), grid)

    def test_grid_needs_nodes(self):
        """Test that an empty grid is refused."""
        with pytest.raises(ValueError):
            SphereGrid(0, 4)
