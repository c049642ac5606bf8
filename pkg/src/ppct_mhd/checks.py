"""
Fast invariant suite run by `ppct check`.

Every check works on tiny grids or a few thousand random states and returns a
CheckResult instead of raising, so the CLI can report all failures at once.
Random draws use fixed seeds.
"""

import itertools
import logging
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import EULER_ROWS, GasModel, cons_to_prim, gql_dot, internal_energy, prim_to_cons
from .ct_fd import MagneticKinematicState, ct_rhs, ct_solve
from .diagnostics import relative_drift, scaled_divergence, totals
from .errors import PPCTError
from .euler_fv import (
    SlopePair,
    WaveSpeeds,
    compute_wave_speeds,
    euler_forward_step,
    face_lax_friedrichs_flux,
    limited_interface_states,
    pp_limit,
    primitive_flux,
)
from .exporters import read_snapshot, write_snapshot
from .grid import BoundarySpec, FieldGrid, GridGeometry, apply_boundaries
from .parameters import RunConfig
from .problems import orszag_tang, smooth_3d
from .splitting import ppct_step, select_dt

logger = logging.getLogger(__name__)

SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_primitive(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Random admissible primitive states (rho, v, p) of shape (5, *shape)."""
    w = np.empty((5,) + tuple(shape))
    w[0] = rng.uniform(0.05, 2.0, shape)
    w[1:4] = rng.uniform(-2.0, 2.0, (3,) + tuple(shape))
    w[4] = rng.uniform(1e-4, 2.0, shape)
    return w


def check_gql_minimum(gas: GasModel = GasModel()) -> CheckResult:
    """Q . n_star is minimized at v_star = m / rho where it equals rho e."""
    rng = np.random.default_rng(SEED)
    q = prim_to_cons(random_primitive(rng, (1000,)), gas)
    at_min = gql_dot(q, q[1:4] / q[0])
    # cancellation in E - |m|^2 / (2 rho) bounds the agreement relative to E
    error = float(np.max(np.abs(at_min - internal_energy(q)) / q[4]))
    others = gql_dot(q, rng.uniform(-3.0, 3.0, (3, 1000)))
    below = int(np.sum(others < at_min * (1.0 - 1e-12)))
    return CheckResult("gql-minimum", error < 1e-13 and below == 0, f"max rel error {error:.2e}, {below} violations")


def check_limiter(gas: GasModel = GasModel(1.4), q: float = 3.0, samples: int = 10000) -> CheckResult:
    """Limited faces keep rho, p > 0 and the velocity factor satisfies its bound."""
    rng = np.random.default_rng(SEED + 1)
    w = random_primitive(rng, (samples,))
    delta = rng.uniform(-3.0, 3.0, (2, 5, samples)) * np.abs(w)[None]
    speeds = WaveSpeeds(alpha=(1.3, 0.7), spacing=(0.1, 0.2))
    slopes = SlopePair(delta)
    coeffs = pp_limit(w, slopes, speeds, q, gas)
    faces = limited_interface_states(w, slopes, coeffs)
    positive = bool(np.all(faces.upper[:, [0, 4]] > 0.0) and np.all(faces.lower[:, [0, 4]] > 0.0))
    try:
        flux = face_lax_friedrichs_flux(faces.upper[0], faces.lower[0], 0, speeds, gas)
        fluxes_ok = bool(np.all(np.isfinite(flux)))
    except PPCTError as exc:
        logger.debug("Limited faces rejected by the flux: %s", exc)
        fluxes_ok = False

    weights = np.asarray(speeds.weights)[:, None]
    d_rho, d_v = delta[:, 0], delta[:, 1:4]
    a1 = np.sum(np.sum((weights * coeffs.alpha * d_rho)[:, None] * d_v, axis=0) ** 2, axis=0)
    a2 = np.sum(weights * np.sum(d_v * d_v, axis=1), axis=0)
    lhs = (2.0 * a1 + (q - 2.0) * w[0] ** 2 * a2) * coeffs.beta**2
    rhs = (q - 2.0) ** 2 * w[0] * w[4] / (gas.gamma - 1.0)
    violations = int(np.sum(lhs > rhs * (1.0 + 1e-12)))
    return CheckResult(
        "limiter",
        positive and fluxes_ok and violations == 0,
        f"faces positive: {positive}, fluxes finite: {fluxes_ok}, velocity bound violations: {violations}",
    )


def random_field(
    rng: np.random.Generator,
    geom: GridGeometry,
    gas: GasModel,
    rho_range: tuple[float, float] = (0.5, 1.5),
    p_range: tuple[float, float] = (0.5, 1.5),
    v_max: float = 0.5,
) -> FieldGrid:
    """
    Random admissible field, independent from cell to cell.

    rho and p are drawn uniformly from their ranges and each velocity
    component from [-v_max, v_max].
    """
    shape = geom.shape
    w = np.empty((5,) + shape)
    w[0] = rng.uniform(*rho_range, shape)
    w[1:4] = rng.uniform(-v_max, v_max, (3,) + shape)
    w[4] = rng.uniform(*p_range, shape)
    cells = np.zeros((8,) + geom.shape)
    cells[list(EULER_ROWS)] = prim_to_cons(w, gas)
    cells[4:7] = rng.uniform(-1.0, 1.0, (3,) + geom.shape)
    return FieldGrid.from_interior(geom, cells)


def check_forward_euler_positivity(gas: GasModel = GasModel(1.4), q: float = 3.0, fields: int = 1000) -> CheckResult:
    """
    Forward-Euler steps at the stage CFL bound keep random fields admissible.

    Density spans two decades and pressure three, with transonic velocities,
    so the limiter binds in many cells.
    """
    rng = np.random.default_rng(SEED + 2)
    geom = GridGeometry((4, 4), (0.0, 0.0), (1.0, 1.0))
    spec = BoundarySpec.periodic(2)
    failures = 0
    for _ in range(fields):
        field = random_field(rng, geom, gas, rho_range=(0.1, 10.0), p_range=(0.01, 10.0), v_max=2.0)
        field = apply_boundaries(field, spec)
        dt = compute_wave_speeds(field, gas).max_dt(q)
        try:
            euler_forward_step(field, dt, spec, q, gas)
        except PPCTError as exc:
            logger.debug("Forward-Euler positivity failure: %s", exc)
            failures += 1
    return CheckResult("forward-euler-positivity", failures == 0, f"{failures} of {fields} random fields failed")


def check_zero_slope_reduction(gas: GasModel = GasModel(1.4), q: float = 3.0) -> CheckResult:
    """Without slopes the update equals first-order Lax-Friedrichs bit for bit."""
    rng = np.random.default_rng(SEED + 3)
    geom = GridGeometry((6, 5), (0.0, 0.0), (1.0, 1.0))
    spec = BoundarySpec.periodic(2)
    field = apply_boundaries(random_field(rng, geom, gas), spec)
    speeds = compute_wave_speeds(field, gas)
    dt = 0.5 * speeds.max_dt(q)
    stepped = euler_forward_step(field, dt, spec, q, gas, second_order=False, speeds=speeds)

    u = field.interior[list(EULER_ROWS)]
    w = cons_to_prim(u, gas)
    face = prim_to_cons(w, gas)
    rhs = np.zeros_like(u)
    for axis in range(2):
        storage = 2 - axis
        w_up = np.roll(w, -1, axis=storage)
        up = np.roll(face, -1, axis=storage)
        physical = primitive_flux(w, face, axis) + primitive_flux(w_up, up, axis)
        flux = 0.5 * (physical - speeds.alpha[axis] * (up - face))
        rhs -= (flux - np.roll(flux, 1, axis=storage)) / geom.spacing[axis]
    expected = u + dt * rhs
    result = stepped.interior[list(EULER_ROWS)]
    error = float(np.max(np.abs(result - expected)))
    return CheckResult("zero-slope-lax-friedrichs", bool(np.array_equal(result, expected)), f"max deviation {error:.2e}")


def check_ct_invariants(tol: float = 1e-10) -> CheckResult:
    """One CT solve on Orszag-Tang keeps div B, rho and total energy."""
    problem = orszag_tang(resolution=(8, 8))
    field = problem.initial_field()
    spec = problem.boundary
    before = totals(field)
    dt = select_dt(field, RunConfig(t_end=1.0, gas=problem.gas))
    after, report = ct_solve(field, dt, spec, tol=tol)
    apply_boundaries(after, spec)
    drift = relative_drift(before.total_energy, totals(after).total_energy)
    div_after = scaled_divergence(after, spec)
    same_rho = bool(np.array_equal(after.interior[0], field.interior[0]))
    passed = same_rho and div_after <= 1e-11 and drift <= 1e-9
    return CheckResult(
        "ct-invariants",
        passed,
        f"{report.iterations} iterations, scaled divB {div_after:.2e}, energy drift {drift:.2e}, rho unchanged: {same_rho}",
    )


def check_determinism_3d(steps: int = 2) -> CheckResult:
    """Two identical 3D runs agree bit for bit and stay discretely divergence-free."""
    problem = smooth_3d(resolution=(4, 4, 4))
    config = RunConfig(t_end=1.0, gas=problem.gas)

    def advance() -> FieldGrid:
        field = problem.initial_field()
        for _ in range(steps):
            field, _ = ppct_step(field, select_dt(field, config), config, problem.boundary)
        return field

    first, second = advance(), advance()
    identical = bool(np.array_equal(first.data, second.data))
    div = scaled_divergence(first, problem.boundary)
    return CheckResult("determinism-3d", identical and div <= 1e-11, f"identical: {identical}, scaled divB {div:.2e}")


def brute_force_ct_rhs(
    B: np.ndarray, v: np.ndarray, rho: np.ndarray, spacing: tuple[float, ...]
) -> tuple[np.ndarray, np.ndarray]:
    """
    Cell-by-cell evaluation of the CT increment (curl(B x v), B x curl(B) / rho).

    Arrays are laid out like padded field storage, (3, [nz,] ny, nx). Only
    cells with a neighbor on every side are filled; the rest stay zero.
    """
    dim = len(spacing)
    shape = rho.shape
    omega = np.zeros_like(B)
    for index in np.ndindex(*shape):
        cell = (slice(None),) + index
        omega[cell] = np.cross(B[cell], v[cell])

    def derivative(f: np.ndarray, index: tuple[int, ...], axis: int) -> float:
        if axis >= dim:
            return 0.0
        storage = len(shape) - 1 - axis
        up, down = list(index), list(index)
        up[storage] += 1
        down[storage] -= 1
        return (f[tuple(up)] - f[tuple(down)]) / (2.0 * spacing[axis])

    def curl(f: np.ndarray, index: tuple[int, ...]) -> np.ndarray:
        return np.array(
            [
                derivative(f[2], index, 1) - derivative(f[1], index, 2),
                derivative(f[0], index, 2) - derivative(f[2], index, 0),
                derivative(f[1], index, 0) - derivative(f[0], index, 1),
            ]
        )

    psi_b = np.zeros_like(B)
    psi_v = np.zeros_like(v)
    for index in itertools.product(*(range(1, n - 1) for n in shape)):
        cell = (slice(None),) + index
        psi_b[cell] = curl(omega, index)
        psi_v[cell] = np.cross(B[cell], curl(B, index)) / rho[index]
    return psi_b, psi_v


def check_ct_rhs_oracle(tol: float = 1e-14) -> CheckResult:
    """The vectorized CT increment matches a cell loop on a random 4^3 field."""
    rng = np.random.default_rng(SEED + 4)
    geom = GridGeometry((4, 4, 4), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    shape = geom.padded_shape
    B = rng.standard_normal((3,) + shape)
    v = rng.standard_normal((3,) + shape)
    rho = rng.uniform(0.5, 2.0, shape)
    psi = ct_rhs(MagneticKinematicState(B, v), rho, geom)
    expected_b, expected_v = brute_force_ct_rhs(B, v, rho, geom.spacing)
    inner = (slice(None),) + (slice(1, -1),) * 3
    error = 0.0
    for got, want in ((psi.B[inner], expected_b[inner]), (psi.v[inner], expected_v[inner])):
        scale = max(float(np.max(np.abs(want))), 1.0)
        error = max(error, float(np.max(np.abs(got - want))) / scale)
    return CheckResult("ct-rhs-oracle", error <= tol, f"max rel deviation {error:.2e}")


def check_internal_energy_invariance(tol: float = 1e-13) -> CheckResult:
    """The CT substep leaves rho e of every cell unchanged."""
    problem = orszag_tang(resolution=(8, 8))
    field = problem.initial_field()
    dt = select_dt(field, RunConfig(t_end=1.0, gas=problem.gas))
    after, _ = ct_solve(field, dt, problem.boundary)
    rows = list(EULER_ROWS)
    before_e = internal_energy(field.interior[rows])
    after_e = internal_energy(after.interior[rows])
    error = float(np.max(np.abs(after_e - before_e) / np.abs(before_e)))
    return CheckResult("internal-energy-invariance", error <= tol, f"max rel change {error:.2e}")


def check_snapshot_round_trip(tol: float = 1e-14) -> CheckResult:
    """Writing and re-reading a snapshot reproduces the field."""
    problem = orszag_tang(resolution=(8, 8))
    field = problem.initial_field()
    with tempfile.TemporaryDirectory() as tmp:
        path = write_snapshot(field, 0.5, Path(tmp) / "snapshot.txt", problem.gas)
        loaded, t = read_snapshot(path)
    scale = np.maximum(np.abs(field.interior), 1.0)
    error = float(np.max(np.abs(loaded.interior - field.interior) / scale))
    passed = t == 0.5 and loaded.geometry.n == field.geometry.n and error <= tol
    return CheckResult("snapshot-round-trip", passed, f"t = {t!r}, max rel deviation {error:.2e}")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "gql-minimum": check_gql_minimum,
    "limiter": check_limiter,
    "forward-euler-positivity": check_forward_euler_positivity,
    "zero-slope-lax-friedrichs": check_zero_slope_reduction,
    "ct-invariants": check_ct_invariants,
    "ct-rhs-oracle": check_ct_rhs_oracle,
    "internal-energy-invariance": check_internal_energy_invariance,
    "snapshot-round-trip": check_snapshot_round_trip,
    "determinism-3d": check_determinism_3d,
}


def run_checks() -> list[CheckResult]:
    """Run every check, turning unexpected solver errors into failures."""
    results = []
    for name, check in CHECKS.items():
        try:
            result = check()
        except PPCTError as exc:
            result = CheckResult(name, False, f"raised {type(exc).__name__}: {exc}")
        logger.info("%s", result)
        results.append(result)
    return results
