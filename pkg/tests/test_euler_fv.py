"""
Tests for the positivity-preserving Euler finite-volume operator.
"""

import math

import numpy as np
import pytest

from ppct_mhd.checks import check_zero_slope_reduction, random_field, random_primitive
from ppct_mhd.core import BX, BZ, EULER_ROWS, RHO, CellState, GasModel, is_admissible, prim_to_cons
from ppct_mhd.errors import ConfigurationError, NonPhysicalStateError, StepRejectedError
from ppct_mhd.euler_fv import (
    LimiterCoefficients,
    SlopePair,
    WaveSpeeds,
    compute_wave_speeds,
    euler_forward_step,
    euler_ssprk2_step,
    face_lax_friedrichs_flux,
    lax_friedrichs_flux,
    limited_interface_states,
    limiter_coefficients,
    pp_limit,
    van_albada_slope,
)
from ppct_mhd.grid import BoundarySpec, FieldGrid, GridGeometry, apply_boundaries

GAS = GasModel(1.4)


def unit_speeds(dim: int = 2) -> WaveSpeeds:
    return WaveSpeeds(alpha=(1.0,) * dim, spacing=(1.0,) * dim)


class TestWaveSpeeds:
    """Tests for stage wave speeds."""

    def test_fluid_at_rest(self):
        """rho = 1, v = 0, p = 1 gives alpha = sqrt(gamma) on each axis."""
        geom = GridGeometry((4, 4), (0.0, 0.0), (1.0, 1.0))
        field = FieldGrid.uniform(geom, CellState.from_primitive(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 1.0, GAS))
        speeds = compute_wave_speeds(field, GAS)
        assert speeds.alpha == pytest.approx((math.sqrt(1.4), math.sqrt(1.4)))

    def test_moving_fluid(self):
        """The normal velocity adds to the sound speed."""
        geom = GridGeometry((4, 4), (0.0, 0.0), (1.0, 1.0))
        field = FieldGrid.uniform(geom, CellState.from_primitive(1.0, (2.0, 0.0, 0.0), (0.0, 0.0, 0.0), 1.0, GAS))
        speeds = compute_wave_speeds(field, GAS)
        assert speeds.alpha[0] == pytest.approx(2.0 + math.sqrt(1.4))
        assert speeds.alpha[1] == pytest.approx(math.sqrt(1.4))

    def test_weights_are_convex(self):
        """Weights are positive and sum to one."""
        speeds = WaveSpeeds(alpha=(1.0, 3.0), spacing=(0.5, 0.25))
        assert speeds.rate == pytest.approx(2.0 + 12.0)
        assert speeds.weights == pytest.approx((2.0 / 14.0, 12.0 / 14.0))
        assert speeds.max_dt(4.0) == pytest.approx(0.25 / 14.0)

    def test_inadmissible_cell_rejected(self):
        """Wave speeds of a field with zero pressure cannot be computed."""
        geom = GridGeometry((2, 2), (0.0, 0.0), (1.0, 1.0))
        field = FieldGrid.uniform(geom, CellState(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 0.0))
        with pytest.raises(NonPhysicalStateError):
            compute_wave_speeds(field, GAS)


class TestVanAlbada:
    """Tests for the van Albada slope."""

    def test_equal_differences(self):
        """Equal one-sided differences give that difference."""
        assert van_albada_slope(np.array(1.0), np.array(1.0), 0.0) == pytest.approx(1.0)

    def test_linear_data(self):
        """Values (0, 1, 2) have unit slope."""
        assert van_albada_slope(np.array(1.0 - 0.0), np.array(2.0 - 1.0), 1e-3) == pytest.approx(1.0)

    def test_extremum(self):
        """At an extremum (0, 1, 0) the slope vanishes."""
        assert van_albada_slope(np.array(1.0), np.array(-1.0), 1e-3) == pytest.approx(0.0)


class TestPositivityLimiter:
    """Tests for the three-step limiter."""

    def test_zero_slopes_untouched(self):
        """Vanishing slopes leave every coefficient at exactly one."""
        w = random_primitive(np.random.default_rng(3), (7,))
        coeffs = pp_limit(w, SlopePair.zeros(2, (7,)), unit_speeds(), 3.0, GAS)
        assert np.all(coeffs.untouched)

    def test_density_step(self):
        """rho = 1 with d_rho = 2 is scaled to about 0.5."""
        w = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        slopes = SlopePair.zeros(2, ())
        slopes.delta[0, 0] = 2.0
        coeffs = pp_limit(w, slopes, unit_speeds(), 3.0, GAS)
        assert float(coeffs.alpha[0]) == pytest.approx(0.5, rel=1e-12)
        assert float(coeffs.alpha[1]) == 1.0
        assert float(coeffs.beta) == 1.0

    def test_pressure_step(self):
        """Pressure slopes larger than p are scaled below one."""
        w = np.array([1.0, 0.0, 0.0, 0.0, 0.5])
        slopes = SlopePair.zeros(2, ())
        slopes.delta[1, 4] = -1.0
        coeffs = pp_limit(w, slopes, unit_speeds(), 3.0, GAS)
        assert float(coeffs.kappa[1]) == pytest.approx(0.5, rel=1e-12)

    def test_q_must_exceed_two(self):
        """q <= 2 is rejected."""
        w = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            pp_limit(w, SlopePair.zeros(2, ()), unit_speeds(), 2.0, GAS)

    def test_inadmissible_average_rejected(self):
        """A cell average with p <= 0 is an error."""
        w = np.array([1.0, 0.0, 0.0, 0.0, -1.0])
        with pytest.raises(NonPhysicalStateError):
            pp_limit(w, SlopePair.zeros(2, ()), unit_speeds(), 3.0, GAS)

    def test_random_faces_stay_positive(self):
        """Limited faces of random data have rho > 0, p > 0 and beta satisfies its bound."""
        rng = np.random.default_rng(11)
        w = random_primitive(rng, (2000,))
        delta = rng.uniform(-3.0, 3.0, (2, 5, 2000)) * np.abs(w)[None]
        speeds = WaveSpeeds(alpha=(1.3, 0.7), spacing=(0.1, 0.2))
        slopes = SlopePair(delta)
        q = 3.0
        coeffs = pp_limit(w, slopes, speeds, q, GAS)
        for array in (coeffs.alpha, coeffs.kappa, coeffs.beta):
            assert np.all((array >= 0.0) & (array <= 1.0))
        faces = limited_interface_states(w, slopes, coeffs)
        assert np.all(faces.upper[:, [0, 4]] > 0.0)
        assert np.all(faces.lower[:, [0, 4]] > 0.0)

        weights = np.asarray(speeds.weights)[:, None]
        d_rho, d_v = delta[:, 0], delta[:, 1:4]
        a1 = np.sum(np.sum((weights * coeffs.alpha * d_rho)[:, None] * d_v, axis=0) ** 2, axis=0)
        a2 = np.sum(weights * np.sum(d_v * d_v, axis=1), axis=0)
        lhs = (2.0 * a1 + (q - 2.0) * w[0] ** 2 * a2) * coeffs.beta**2
        rhs = (q - 2.0) ** 2 * w[0] * w[4] / (GAS.gamma - 1.0)
        assert np.all(lhs <= rhs * (1.0 + 1e-12))


class TestInterfaceStates:
    """Tests for limited face values and the numerical flux."""

    def test_face_values(self):
        """rho = 1, d_rho = 0.5, alpha = 1 gives faces 1.5 and 0.5."""
        w = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        slopes = SlopePair.zeros(2, ())
        slopes.delta[0, 0] = 0.5
        faces = limited_interface_states(w, slopes, LimiterCoefficients.inactive(2, ()))
        assert faces.upper[0, 0] == pytest.approx(1.5)
        assert faces.lower[0, 0] == pytest.approx(0.5)
        assert faces.upper[1, 0] == pytest.approx(1.0)

    def test_lax_friedrichs_at_rest(self):
        """Equal resting states give the pressure flux only."""
        q = np.array([1.0, 0.0, 0.0, 0.0, 1.0 / 0.4])
        flux = lax_friedrichs_flux(q, q, 0, unit_speeds(), GAS)
        assert np.allclose(flux, [0.0, 1.0, 0.0, 0.0, 0.0])

    def test_lax_friedrichs_rejects_bad_face(self):
        """Inadmissible face states are an error."""
        good = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        bad = np.array([1.0, 0.0, 0.0, 0.0, -1.0])
        with pytest.raises(NonPhysicalStateError):
            lax_friedrichs_flux(good, bad, 0, unit_speeds(), GAS)

    def test_face_flux_near_vacuum_pressure(self):
        """A limited face with p of order 1e-16 under fast flow still has a flux."""
        w = np.array([3.54, 1.675, -0.3, 0.0, 1.0e-16])
        flux = face_lax_friedrichs_flux(w, w, 0, unit_speeds(), GAS)
        q = prim_to_cons(w, GAS)
        assert np.all(np.isfinite(flux))
        assert flux[0] == pytest.approx(q[1])
        assert flux[1] == pytest.approx(q[1] * w[1])
        assert flux[4] == pytest.approx(q[4] * w[1])

    def test_face_flux_matches_conserved_flux(self):
        """For ordinary states both flux forms agree."""
        w_minus = np.array([1.0, 0.5, -0.2, 0.1, 1.0])
        w_plus = np.array([0.7, 0.3, 0.4, -0.1, 0.4])
        from_faces = face_lax_friedrichs_flux(w_minus, w_plus, 1, unit_speeds(), GAS)
        from_cons = lax_friedrichs_flux(prim_to_cons(w_minus, GAS), prim_to_cons(w_plus, GAS), 1, unit_speeds(), GAS)
        assert np.allclose(from_faces, from_cons, rtol=1e-13, atol=1e-14)

    def test_face_flux_rejects_non_positive_pressure(self):
        """Faces are judged on rho and p."""
        good = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        bad = np.array([1.0, 2.0, 0.0, 0.0, 0.0])
        with pytest.raises(NonPhysicalStateError, match="face state"):
            face_lax_friedrichs_flux(good, bad, 0, unit_speeds(), GAS)


class TestForwardStep:
    """Tests for the forward-Euler and SSP-RK2 updates."""

    geom = GridGeometry((4, 4), (0.0, 0.0), (1.0, 1.0))
    spec = BoundarySpec.periodic(2)

    def test_random_fields_stay_admissible(self):
        """A step at the stage bound keeps random fields admissible."""
        rng = np.random.default_rng(5)
        for _ in range(50):
            field = apply_boundaries(random_field(rng, self.geom, GAS), self.spec)
            dt = compute_wave_speeds(field, GAS).max_dt(3.0)
            stepped = euler_forward_step(field, dt, self.spec, 3.0, GAS)
            assert np.all(is_admissible(stepped.interior[list(EULER_ROWS)]))

    def test_wide_range_random_fields(self):
        """Limiter-bound faces do not stop a step at the stage bound on strongly varying data."""
        rng = np.random.default_rng(12)
        geom = GridGeometry((6, 6), (0.0, 0.0), (1.0, 1.0))
        for _ in range(300):
            field = random_field(rng, geom, GAS, rho_range=(0.1, 10.0), p_range=(0.01, 10.0), v_max=2.0)
            field = apply_boundaries(field, self.spec)
            dt = compute_wave_speeds(field, GAS).max_dt(3.0)
            stepped = euler_forward_step(field, dt, self.spec, 3.0, GAS)
            assert np.all(is_admissible(stepped.interior[list(EULER_ROWS)]))

    def test_zero_slopes_match_lax_friedrichs(self):
        """Without slopes the update is first-order Lax-Friedrichs bit for bit."""
        result = check_zero_slope_reduction(GAS)
        assert result.passed, result.detail

    def test_cfl_violation_rejected(self):
        """Too large a dt raises with the admissible step attached."""
        field = apply_boundaries(random_field(np.random.default_rng(6), self.geom, GAS), self.spec)
        admissible = compute_wave_speeds(field, GAS).max_dt(3.0)
        with pytest.raises(StepRejectedError) as info:
            euler_forward_step(field, 2.0 * admissible, self.spec, 3.0, GAS)
        assert info.value.admissible_dt == pytest.approx(admissible)

    def test_uniform_field_unchanged(self):
        """A uniform state is a steady solution."""
        state = CellState.from_primitive(1.0, (0.3, -0.2, 0.1), (0.5, 0.5, 0.0), 1.0, GAS)
        field = FieldGrid.uniform(self.geom, state)
        dt = compute_wave_speeds(field, GAS).max_dt(3.0)
        stepped = euler_ssprk2_step(field, dt, self.spec, 3.0, GAS)
        assert np.allclose(stepped.interior, field.interior, rtol=1e-14, atol=1e-14)

    def test_periodic_mass_conserved(self):
        """Total mass is conserved on a periodic grid."""
        field = apply_boundaries(random_field(np.random.default_rng(7), self.geom, GAS), self.spec)
        dt = compute_wave_speeds(field, GAS).max_dt(3.0)
        stepped = euler_ssprk2_step(field, dt, self.spec, 3.0, GAS)
        before = float(np.sum(field.interior[RHO]))
        after = float(np.sum(stepped.interior[RHO]))
        assert abs(after - before) <= 1e-13 * before

    def test_magnetic_field_frozen(self):
        """The Euler step copies B through unchanged."""
        field = apply_boundaries(random_field(np.random.default_rng(8), self.geom, GAS), self.spec)
        dt = compute_wave_speeds(field, GAS).max_dt(3.0)
        stepped = euler_ssprk2_step(field, dt, self.spec, 3.0, GAS)
        assert np.array_equal(stepped.interior[BX : BZ + 1], field.interior[BX : BZ + 1])

    def test_q_two_is_configuration_error(self):
        """q = 2 is rejected before any work."""
        field = FieldGrid.uniform(self.geom, CellState(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 2.5))
        with pytest.raises(ConfigurationError):
            euler_forward_step(field, 1e-3, self.spec, 2.0, GAS)

    def test_limiter_coefficients_cover_interior(self):
        """Limiter coefficients cover the interior and stay in [0, 1]."""
        field = apply_boundaries(random_field(np.random.default_rng(9), self.geom, GAS), self.spec)
        speeds = compute_wave_speeds(field, GAS)
        coeffs = limiter_coefficients(field, speeds, 3.0, GAS)
        assert coeffs.beta.shape == self.geom.shape
        assert np.all((coeffs.beta > 0.0) & (coeffs.beta <= 1.0))
