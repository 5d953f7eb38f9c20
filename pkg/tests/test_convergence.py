"""
Unit tests for the convergence lab module.
Tests truncated functions, schedules, the fuzzy analogs of multiplication operators
and the convergence and witness sweeps.
"""

import pytest
import numpy as np
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.circle import build_circle
from utils.harmonics import SphereGrid
from utils.linalg import max_residual, operator_norm
from utils.sphere import build_sphere
from utils.convergence import (
    DECAY_COLUMNS,
    CustomSchedule,
    SphereProofSchedule,
    TruncatedFourier,
    TruncatedSphFn,
    alpha_mn,
    circle_test_corpus,
    fhat_circle,
    fhat_sphere,
    make_schedule,
    nonconvergence_witness,
    sphere_test_corpus,
    strong_convergence_circle,
    strong_convergence_sphere,
    uniform_norm_bound_circle,
    witness_table,
)


@pytest.fixture
def phi():
    """Normalized Gaussian-coefficient test vector."""
    return TruncatedFourier.gaussian()


class TestTruncatedFourier:
    """Tests for TruncatedFourier."""

    def test_components(self):
        """Test component lookup inside and outside the support."""
        f = TruncatedFourier.from_dict({2: 3.0, -1: 1.0})
        assert f.degree == 2
        assert f.component(2) == 3.0
        assert f.component(-1) == 1.0
        assert f.component(5) == 0

    def test_product_of_conjugate_monomials(self):
        """Test u * u^(-1) = 1."""
        product = TruncatedFourier.monomial(1).times(TruncatedFourier.monomial(-1))
        assert product.component(0) == pytest.approx(1.0)
        assert product.norm == pytest.approx(1.0)

    def test_gaussian_is_normalized(self, phi):
        """Test the unit norm and the tail beyond L."""
        assert phi.norm == pytest.approx(1.0)
        assert 0.0 < phi.tail_norm_squared(2) < 1.0
        assert phi.tail_norm_squared(phi.degree) == pytest.approx(0.0, abs=1e-14)

    def test_step_coefficients(self):
        """Test f_0 = 1/2 and vanishing even modes."""
        step = TruncatedFourier.step(5)
        assert step.component(0) == pytest.approx(0.5)
        assert step.component(2) == 0
        assert step.component(1) == pytest.approx(1.0 / (1j * np.pi))

    def test_sup_norm(self):
        """Test |u| = 1 and |1 + u| <= 2."""
        assert TruncatedFourier.monomial(1).sup_norm() == pytest.approx(1.0)
        assert TruncatedFourier.from_dict({0: 1.0, 1: 1.0}).sup_norm() == pytest.approx(2.0)

    def test_zero_cannot_be_normalized(self):
        """Test that normalizing zero raises."""
        with pytest.raises(ValueError):
            TruncatedFourier.from_dict({0: 0.0}).normalized()


class TestTruncatedSphFn:
    """Tests for TruncatedSphFn."""

    def test_invalid_size(self):
        """Test that a non-square coefficient count raises."""
        with pytest.raises(ValueError):
            TruncatedSphFn(np.zeros(3))

    def test_invalid_index(self):
        """Test that |m| > l raises."""
        with pytest.raises(ValueError):
            TruncatedSphFn.from_dict({(1, 2): 1.0})

    def test_coordinate_samples(self):
        """Test that t0 samples cos(theta) and t(+) samples sin(theta) exp(i phi) / sqrt(2)."""
        grid = SphereGrid.for_degree(2)
        assert np.allclose(TruncatedSphFn.coordinate(0).samples(grid), grid.coordinate(0))
        assert np.allclose(TruncatedSphFn.coordinate(1).samples(grid), grid.coordinate(1))
        assert np.allclose(TruncatedSphFn.constant().samples(grid), 1.0)

    def test_projection_recovers_coefficients(self):
        """Test from_samples on a band-limited function."""
        grid = SphereGrid.for_degree(3)
        f = TruncatedSphFn.random(3, seed=5)
        recovered = TruncatedSphFn.from_samples(f.samples(grid), grid, 3)
        assert np.allclose(recovered.coefficients, f.coefficients, atol=1e-12)

    def test_support_and_tail(self):
        """Test the largest occupied degree and the tail norm."""
        f = TruncatedSphFn.from_dict({(0, 0): 1.0, (2, 1): 2.0, (3, 0): 0.0})
        assert f.l_max == 3
        assert f.support == 2
        assert f.tail_norm_squared(1) == pytest.approx(4.0)


class TestSchedules:
    """Tests for the k(L) schedules."""

    def test_named_schedules(self):
        """Test the closed forms at L = 2."""
        assert make_schedule("default")(2) == 36.0
        assert make_schedule("prop-circle")(2) == 2 * 2 * 3 * 25
        assert make_schedule("prop-sphere")(1) == 2.0 ** 6 * 2
        assert make_schedule("practical")(2) == 64.0

    def test_prop_sphere_cap(self):
        """Test that the sphere proof schedule refuses large L."""
        with pytest.raises(ValueError):
            SphereProofSchedule()(6)

    def test_custom(self):
        """Test literal and callable custom schedules."""
        assert make_schedule("custom", k=7.5)(3) == 7.5
        assert make_schedule("custom", function=lambda cutoff: cutoff * 10.0)(3) == 30.0
        with pytest.raises(ValueError):
            make_schedule("custom")
        with pytest.raises(ValueError):
            CustomSchedule(-1.0)
        with pytest.raises(ValueError):
            CustomSchedule(lambda cutoff: 0.0)(2)

    def test_unknown(self):
        """Test that an unknown name raises."""
        with pytest.raises(ValueError):
            make_schedule("fibonacci")


class TestFuzzyAnalogs:
    """Tests for fhat_circle and fhat_sphere."""

    def test_fhat_of_u(self):
        """Test that u maps to eta(+) = sqrt(2) xi(+)."""
        model = build_circle(3, 144.0)
        f_hat = fhat_circle(TruncatedFourier.monomial(1), model)
        assert max_residual(f_hat, model.xi_plus * np.sqrt(2.0)) <= 1e-14

    def test_fhat_of_constant(self):
        """Test that a constant maps to a multiple of the identity."""
        model = build_circle(2, 36.0)
        f_hat = fhat_circle(TruncatedFourier.from_dict({0: 2.5}), model)
        assert np.allclose(f_hat.data, 2.5 * np.eye(model.dim))

    def test_alpha_mn(self):
        """Test alpha(m, m) = 1 and zero outside the truncation."""
        assert alpha_mn(1, 1, 3, 144.0) == 1.0
        assert alpha_mn(0, 1, 3, 144.0) == pytest.approx(1.0)
        assert alpha_mn(1, 2, 3, 144.0) == pytest.approx(np.sqrt(1.0 + 2.0 / 144.0))
        assert alpha_mn(0, 5, 3, 144.0) == 0.0

    def test_fhat_sphere_of_coordinate(self):
        """Test that t0 maps to x0."""
        model = build_sphere(2, 36.0)
        f_hat = fhat_sphere(TruncatedSphFn.coordinate(0), model)
        assert max_residual(f_hat, model.x[0]) <= 1e-12


class TestCircleConvergence:
    """Tests for the circle sweeps."""

    def test_decay_table(self, phi):
        """Test the columns, the row order and the estimate on the default schedule."""
        corpus = circle_test_corpus()
        table = strong_convergence_circle(corpus["u"], phi, make_schedule("default"), [2, 4, 6], g=corpus["two_cos"])
        assert list(table.columns) == DECAY_COLUMNS + ["product_error", "commutator"]
        assert list(table["lambda"]) == [2, 4, 6]
        assert table["pass"].all()
        assert "single_denominator" in table.columns
        assert table.loc[table["component"] != "zero", "single_denominator"].isna().all()
        assert table["error"].iloc[-1] < table["error"].iloc[0]

    def test_needs_normalized_phi(self):
        """Test that an unnormalized vector raises."""
        with pytest.raises(ValueError):
            strong_convergence_circle(
                TruncatedFourier.monomial(1), TruncatedFourier.from_dict({0: 2.0}), make_schedule("default"), [2]
            )

    def test_inconsistent_schedule(self, phi):
        """Test that a too-small k is refused unless forced."""
        small = make_schedule("custom", k=1.0)
        f = TruncatedFourier.monomial(1)
        with pytest.raises(ValueError):
            strong_convergence_circle(f, phi, small, [3])
        table = strong_convergence_circle(f, phi, small, [3], force=True)
        assert bool(table["below_schedule_bound"].iloc[0])

    def test_thread_count_does_not_change_rows(self, phi):
        """Test identical tables for one and several threads."""
        f = circle_test_corpus()["gaussian"]
        schedule = make_schedule("prop-circle")
        single = strong_convergence_circle(f, phi, schedule, [2, 3, 4, 5], threads=1)
        multi = strong_convergence_circle(f, phi, schedule, [2, 3, 4, 5], threads=4)
        assert single.equals(multi)

    def test_uniform_norm_bound(self):
        """Test |f_L| <= 3 |f|_inf for the corpus."""
        for f in circle_test_corpus(support=10).values():
            table = uniform_norm_bound_circle(f, make_schedule("prop-circle"), [2, 3, 4])
            assert table["pass"].all()
            assert set(table["norm_method"]) <= {"power", "jacobi"}

    def test_eta_norm(self):
        """Test |eta(+)| <= 3 for u."""
        model = build_circle(4, 400.0)
        assert operator_norm(fhat_circle(TruncatedFourier.monomial(1), model)) <= 3.0


class TestSphereConvergence:
    """Tests for the sphere sweep."""

    def test_coordinate_on_constant(self):
        """Test |(t0 - x0) Y00| = |1 - c_1| / sqrt(3)."""
        phi = TruncatedSphFn.from_dict({(0, 0): 1.0})
        schedule = make_schedule("default")
        table = strong_convergence_sphere(TruncatedSphFn.coordinate(0), phi, schedule, [1, 2])
        for cutoff, error in zip(table["lambda"], table["error"]):
            k = schedule(cutoff)
            assert error == pytest.approx(abs(np.sqrt(1.0 + 1.0 / k) - 1.0) / np.sqrt(3.0), abs=1e-12)
        assert table["pass"].all()

    def test_grid_too_coarse(self):
        """Test that an under-resolved grid raises."""
        phi = TruncatedSphFn.from_dict({(0, 0): 1.0})
        with pytest.raises(ValueError):
            strong_convergence_sphere(
                sphere_test_corpus()["quadratic"], phi, make_schedule("default"), [1], grid=SphereGrid(1, 2)
            )


class TestWitness:
    """Tests for the operator-norm non-convergence witnesses."""

    def test_circle_witness_is_one(self):
        """Test |(u - eta) e_(L+1)| = 1."""
        [result] = nonconvergence_witness(build_circle(3, 144.0))
        assert result.value == pytest.approx(1.0)
        assert result.band_norm >= 1.0

    def test_sphere_witness_values(self):
        """Test the three sphere witnesses against their closed forms and lower bounds."""
        results = nonconvergence_witness(build_sphere(2, 36.0))
        assert [result.component for result in results] == ["plus", "zero", "minus"]
        for result in results:
            assert result.value == pytest.approx(result.expected, abs=1e-12)
            assert result.value >= result.lower_bound
            assert result.passed

    def test_sphere_zero_component_exact(self):
        """Test the zero component at L = 2 against |A|^2 + |B|^2 with separate denominators."""
        [_, zero, _] = nonconvergence_witness(build_sphere(2, 36.0))
        exact = np.sqrt(9.0 / 35.0 + 16.0 / 63.0)
        assert zero.value == pytest.approx(exact, abs=1e-12)
        assert zero.value == pytest.approx(0.71492, abs=1e-5)
        assert zero.single_denominator == pytest.approx(np.sqrt(25.0 / 63.0), abs=1e-12)
        assert abs(zero.value - zero.single_denominator) > 0.05
        assert zero.lower_bound == pytest.approx(np.sqrt(1.0 / 3.0))

    @pytest.mark.parametrize("cutoff", [1, 3, 5])
    def test_sphere_witness_stays_above_bounds(self, cutoff):
        """Test that no witness drops below sqrt(1/3) or sqrt(3/7) as L grows."""
        results = nonconvergence_witness(build_sphere(cutoff, float((cutoff * (cutoff + 1)) ** 2)))
        bounds = {result.component: result.lower_bound for result in results}
        assert bounds["zero"] == pytest.approx(np.sqrt(1.0 / 3.0))
        assert bounds["plus"] == pytest.approx(np.sqrt(3.0 / 7.0))
        assert all(result.value >= result.lower_bound for result in results)

    def test_margin(self):
        """Test that a band margin below 2 raises."""
        with pytest.raises(ValueError):
            nonconvergence_witness(build_circle(2, 36.0), margin=1)

    def test_table(self):
        """Test one row per circle model and three per sphere model."""
        table = witness_table([build_circle(2, 36.0), build_sphere(1, 4.0)])
        assert len(table) == 4
        assert table["pass"].all()
