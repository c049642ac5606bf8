"""
Tests for time-step selection, the Strang-split step and the run loop.
"""

import numpy as np
import pytest

from ppct_mhd.core import BX, MAGNETIC, MX, CellState, GasModel
from ppct_mhd.diagnostics import convergence_order, relative_drift, scaled_divergence, totals
from ppct_mhd.errors import StepRejectedError
from ppct_mhd.grid import BoundarySpec, FieldGrid, GridGeometry, apply_boundaries
from ppct_mhd.parameters import RunConfig
from ppct_mhd.problems import (
    VORTEX_EXTREME_MU,
    blast,
    exact_vortex_error,
    jet,
    orszag_tang,
    smooth_3d,
    vortex,
)
from ppct_mhd.splitting import check_initial_field, ppct_step, run, select_dt


@pytest.fixture
def orszag_tang_16():
    problem = orszag_tang(resolution=(16, 16), t_end=0.1)
    config = RunConfig(t_end=0.1, gas=problem.gas)
    return problem, config


class TestSelectDt:
    """Tests for time-step selection."""

    def test_resting_gas_example(self):
        """alpha = (1, 1) on a 100 x 100 unit grid with q = 3 gives dt = 1/300."""
        gas = GasModel(5.0 / 3.0)
        geom = GridGeometry((100, 100), (0.0, 0.0), (1.0, 1.0))
        state = CellState.from_primitive(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 1.0 / gas.gamma, gas)
        field = FieldGrid.uniform(geom, state)
        assert select_dt(field, RunConfig(t_end=1.0, gas=gas)) == pytest.approx(1.0 / 300.0)

    def test_safety_factor(self):
        """safety scales the step."""
        gas = GasModel(5.0 / 3.0)
        geom = GridGeometry((100, 100), (0.0, 0.0), (1.0, 1.0))
        state = CellState.from_primitive(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 1.0 / gas.gamma, gas)
        field = FieldGrid.uniform(geom, state)
        dt = select_dt(field, RunConfig(t_end=1.0, gas=gas, safety=0.5))
        assert dt == pytest.approx(0.5 / 300.0)

    def test_clipped_to_output_time(self, orszag_tang_16):
        """dt never steps past the next output time."""
        problem, config = orszag_tang_16
        field = problem.initial_field()
        assert select_dt(field, config, t=0.25, t_next=0.25 + 1e-5) == pytest.approx(1e-5)


class TestPpctStep:
    """Tests for one Strang-split step."""

    def test_invariants_after_one_step(self, orszag_tang_16):
        """Positivity, divergence and mass survive a step."""
        problem, config = orszag_tang_16
        field = problem.initial_field()
        dt = select_dt(field, config)
        new_field, record = ppct_step(field, dt, config, problem.boundary)
        assert record.min_rho > 0.0 and record.min_p > 0.0
        assert record.dt == dt
        assert record.halvings == 0
        assert record.ct_iterations >= 1
        assert scaled_divergence(new_field, problem.boundary) <= 1e-11
        assert relative_drift(totals(field).mass, record.total_mass) <= 1e-12
        assert relative_drift(totals(field).total_energy, record.total_energy) <= 1e-9

    def test_oversized_step_is_halved(self, orszag_tang_16):
        """Ten times the stable step is accepted after repeated halving."""
        problem, config = orszag_tang_16
        field = problem.initial_field()
        dt = select_dt(field, config)
        _, record = ppct_step(field, 10.0 * dt, config, problem.boundary)
        assert record.halvings >= 3
        assert record.dt == pytest.approx(10.0 * dt / 2**record.halvings)
        assert record.dt <= dt * (1.0 + 1e-12)

    def test_no_halvings_left(self, orszag_tang_16):
        """With max_halvings = 0 an oversized step fails."""
        problem, _ = orszag_tang_16
        config = RunConfig(t_end=0.1, gas=problem.gas, max_halvings=0)
        field = problem.initial_field()
        dt = select_dt(field, config)
        with pytest.raises(StepRejectedError) as info:
            ppct_step(field, 10.0 * dt, config, problem.boundary)
        assert info.value.admissible_dt > 0.0


class TestInitialField:
    """Tests for the divergence check of initial data."""

    def test_divergence_free_field_is_quiet(self, orszag_tang_16, recwarn):
        """The Orszag-Tang field passes without a warning."""
        problem, _ = orszag_tang_16
        scaled = check_initial_field(problem.initial_field(), problem.boundary, problem.name)
        assert scaled <= 1e-12
        assert len(recwarn) == 0

    def test_divergent_field_warns(self):
        """A random magnetic field is reported."""
        geom = GridGeometry((8, 8), (0.0, 0.0), (1.0, 1.0))
        cells = np.zeros((8,) + geom.shape)
        cells[0] = 1.0
        cells[7] = 2.0
        cells[MAGNETIC] = np.random.default_rng(0).standard_normal((3,) + geom.shape)
        field = FieldGrid.from_interior(geom, cells)
        spec = BoundarySpec.periodic(2)
        with pytest.warns(UserWarning, match="divergence"):
            scaled = check_initial_field(apply_boundaries(field, spec), spec, "random")
        assert scaled > 1e-12


class TestRun:
    """Tests for the run loop."""

    def test_zero_final_time(self, orszag_tang_16):
        """t_end = 0 gives only the initial snapshot."""
        problem, _ = orszag_tang_16
        result = run(problem, RunConfig(t_end=0.0, gas=problem.gas))
        assert len(result.snapshots) == 1
        assert result.final.t == 0.0
        assert result.records == []
        assert result.mean_ct_iterations == 0.0

    def test_snapshot_times_hit_exactly(self):
        """Steps are clipped so snapshots land on the requested times."""
        problem = vortex(resolution=(16, 16))
        config = RunConfig(t_end=0.05, gas=problem.gas, snapshot_times=(0.02,))
        result = run(problem, config)
        assert [s.t for s in result.snapshots] == [0.0, 0.02, 0.05]
        assert result.records[-1].t == 0.05

    def test_records_reported_per_step(self, orszag_tang_16):
        """on_step sees every accepted step."""
        problem, _ = orszag_tang_16
        config = RunConfig(t_end=0.05, gas=problem.gas)
        seen = []
        result = run(problem, config, on_step=seen.append)
        assert seen == result.records
        assert result.max_ct_iterations >= 1

    def test_deterministic(self):
        """Identical inputs give bitwise-identical results."""
        problem = orszag_tang(resolution=(8, 8), t_end=0.05)
        config = RunConfig(t_end=0.05, gas=problem.gas)
        first = run(problem, config).final.field
        second = run(problem, config).final.field
        assert np.array_equal(first.data, second.data)

    def test_smooth_3d_ten_steps(self):
        """Ten 3D steps keep positivity, the discrete divergence and the energy."""
        problem = smooth_3d(resolution=(16, 16, 16))
        config = RunConfig(t_end=1.0, gas=problem.gas)
        field = problem.initial_field()
        start = totals(field)
        t = 0.0
        for _ in range(10):
            dt = select_dt(field, config)
            field, record = ppct_step(field, dt, config, problem.boundary, t=t)
            t = record.t
            assert record.min_rho > 0.0 and record.min_p > 0.0
        assert scaled_divergence(field, problem.boundary) <= 1e-11
        assert relative_drift(start.total_energy, totals(field).total_energy) <= 1e-9
        assert relative_drift(start.mass, totals(field).mass) <= 1e-12


class TestMirrorSymmetry:
    """The jet is symmetric about x = 0."""

    def advance(self, problem, dt: float, steps: int = 2):
        config = RunConfig(t_end=1.0, gas=problem.gas)
        field = problem.initial_field()
        for _ in range(steps):
            field, _ = ppct_step(field, dt, config, problem.boundary)
        return field.interior

    @staticmethod
    def mirrored(cells: np.ndarray) -> np.ndarray:
        """Reflect about x = 0, flipping the normal velocity and field."""
        out = cells[..., ::-1].copy()
        out[MX] *= -1.0
        out[BX] *= -1.0
        return out

    @staticmethod
    def scales(cells: np.ndarray) -> np.ndarray:
        """Magnitude of rho, momentum, B and E, shared within each group."""
        out = np.empty((cells.shape[0], 1, 1))
        for rows in (slice(0, 1), slice(1, 4), slice(4, 7), slice(7, 8)):
            out[rows] = np.max(np.abs(cells[rows]))
        return out

    @pytest.fixture
    def jets(self):
        full = jet(resolution=(16, 12), full_domain=True)
        half = jet(resolution=(8, 12))
        config = RunConfig(t_end=1.0, gas=full.gas)
        dt = select_dt(full.initial_field(), config, full.boundary)
        return self.advance(full, dt), self.advance(half, dt)

    def test_full_domain_symmetric(self, jets):
        """The left half of the full domain mirrors the right half."""
        full, _ = jets
        left, right = full[..., :8], full[..., 8:]
        assert np.all(np.abs(self.mirrored(left) - right) <= 1e-9 * self.scales(full))

    def test_reflecting_half_matches_full(self, jets):
        """The reflecting half domain reproduces the right half of the full domain."""
        full, half = jets
        assert np.all(np.abs(half - full[..., 8:]) <= 1e-9 * self.scales(full))


@pytest.mark.slow
class TestBenchmarks:
    """Reduced-resolution benchmark runs."""

    def vortex_errors(self, mu: float, sizes: list[int], q: float):
        rows = []
        for n in sizes:
            problem = vortex(mu=mu, resolution=(n, n))
            result = run(problem, RunConfig(t_end=problem.t_end, gas=problem.gas, q=q))
            assert all(r.min_p > 0.0 for r in result.records)
            rows.append(exact_vortex_error(result.final.field, result.final.t, mu))
        return rows

    def test_vortex_second_order(self):
        """l1 and l2 orders of B and v reach 1.7 with q = 2.01, finest pair within 0.35 of the reference orders."""
        rows = self.vortex_errors(1.0, [64, 128, 256], 2.01)
        for pick, finest in (
            (lambda e: e.B.l1, 2.34),
            (lambda e: e.B.l2, 2.37),
            (lambda e: e.v.l1, 1.98),
            (lambda e: e.v.l2, 1.98),
        ):
            orders = convergence_order([pick(e) for e in rows])
            assert min(orders) >= 1.7
            assert orders[-1] == pytest.approx(finest, abs=0.35)

    def test_vortex_extreme_pressure(self):
        """The near-vacuum vortex stays positive and converges."""
        rows = self.vortex_errors(VORTEX_EXTREME_MU, [64, 128], 3.0)
        assert convergence_order([rows[0].B.l1, rows[1].B.l1])[0] >= 1.7
        assert convergence_order([rows[0].v.l1, rows[1].v.l1])[0] >= 1.7

    def test_vortex_limiter_accuracy(self):
        """At q = 5 the l-infinity order of B is recovered."""
        rows = self.vortex_errors(1.0, [64, 128, 256], 5.0)
        assert min(convergence_order([e.B.linf for e in rows])) >= 1.8

    def test_orszag_tang_invariants(self):
        """64 x 64 to t = 2 keeps div B, energy and mass; CT iterations stay low and contract."""
        problem = orszag_tang(resolution=(64, 64), t_end=2.0)
        result = run(problem, RunConfig(t_end=2.0, gas=problem.gas))
        start = totals(result.snapshots[0].field)
        end = result.final.field
        b_max = float(np.max(np.abs(result.snapshots[0].field.interior[MAGNETIC])))
        dx = problem.geometry.min_spacing
        assert all(r.max_abs_divB * dx / b_max <= 1e-11 for r in result.records)
        assert scaled_divergence(end, problem.boundary) <= 1e-11
        for record in result.records:
            tail = record.ct_history[1:]
            assert all(later < earlier for earlier, later in zip(tail, tail[1:]))
        assert relative_drift(start.total_energy, totals(end).total_energy) <= 1e-9
        assert relative_drift(start.mass, totals(end).mass) <= 1e-12
        assert result.mean_ct_iterations <= 12
        assert result.max_ct_iterations <= 25

    def test_blast_positivity(self):
        """The strongly magnetized blast wave stays positive at 100 x 100."""
        problem = blast(resolution=(100, 100))
        result = run(problem, RunConfig(t_end=problem.t_end, gas=problem.gas))
        assert all(r.min_rho > 0.0 and r.min_p > 0.0 for r in result.records)

    def test_jet_positivity(self):
        """The Mach 800 jet with B0 = sqrt(20000) stays positive at 100 x 300."""
        problem = jet(mach=800.0, b0=np.sqrt(20000.0), resolution=(100, 300))
        result = run(problem, RunConfig(t_end=0.002, gas=problem.gas))
        assert result.final.t == 0.002
        assert all(r.min_rho > 0.0 and r.min_p > 0.0 for r in result.records)
