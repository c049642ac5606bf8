"""
Implicit finite-difference constrained transport for the magnetic subsystem.

Density and internal energy are frozen while (B, v) advance by the implicit
midpoint rule

    R^{n+1} = R^n - dt * Psi((R^n + R^{n+1}) / 2),   R = (B, v)

solved by Jacobi-style fixed-point iteration. Psi uses the electric field
Omega = B x v and non-staggered central differences, so the central-difference
divergence of B is preserved exactly on periodic grids. The mechanical energy
is then corrected so the internal energy of every cell is unchanged.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ENERGY, MAGNETIC, MOMENTUM, RHO, locate_cell, require_admissible
from .errors import ConvergenceError, InvariantViolationError, NonPhysicalStateError
from .grid import BoundarySpec, FieldGrid, GridGeometry, apply_boundaries, central_difference

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100


@dataclass
class MagneticKinematicState:
    """
    Iteration state of the CT substep.

    Attributes:
        B: Magnetic field, shape (3, ...)
        v: Velocity, shape (3, ...)
    """

    B: np.ndarray
    v: np.ndarray

    def midpoint(self, other: "MagneticKinematicState") -> "MagneticKinematicState":
        return MagneticKinematicState(0.5 * (self.B + other.B), 0.5 * (self.v + other.v))

    def copy(self) -> "MagneticKinematicState":
        return MagneticKinematicState(self.B.copy(), self.v.copy())


@dataclass
class IterationReport:
    """
    Outcome of one CT solve.

    Attributes:
        iterations: Number of fixed-point sweeps performed
        final_error: Last value of max(|dB|_inf, |dv|_inf)
        converged: Whether the error dropped below the tolerance
        history: Error after every sweep
        contraction: Contraction bound of the step-start field (< 1 certifies
            convergence; recorded only)
    """

    iterations: int
    final_error: float
    converged: bool
    history: list[float] = field(default_factory=list)
    contraction: Optional[float] = None

    @property
    def ratios(self) -> list[float]:
        """Successive error ratios E_{k+1} / E_k (skipping zero errors)."""
        return [b / a for a, b in zip(self.history, self.history[1:]) if a > 0.0]

    def summary(self) -> str:
        status = "converged" if self.converged else "NOT converged"
        text = f"CT solve {status} in {self.iterations} iterations, error {self.final_error:.3e}"
        if self.contraction is not None:
            text += f", contraction bound {self.contraction:.3f}"
        return text


def electric_field(B: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Electric field Omega = B x v.

    Args:
        B: Magnetic field, shape (3, ...)
        v: Velocity, shape (3, ...)

    Example:
        >>> electric_field(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
        array([0., 0., 1.])
    """
    return np.cross(np.asarray(B, dtype=float), np.asarray(v, dtype=float), axis=0)


def _derivative(f: np.ndarray, axis: int, geom: GridGeometry) -> np.ndarray:
    if axis >= geom.dim:
        return np.zeros_like(f)
    return central_difference(f, axis, geom.spacing[axis])


def discrete_curl(B: np.ndarray, geom: GridGeometry) -> np.ndarray:
    """
    Central-difference curl of a cell-centered vector field.

    Args:
        B: Vector field over the padded grid, shape (3, *geom.padded_shape)
        geom: Mesh description

    Returns:
        Curl with the same shape; z-derivatives are absent in 2D and the
        outermost ghost layer is zero
    """
    curl = np.empty_like(B, dtype=float)
    curl[0] = _derivative(B[2], 1, geom) - _derivative(B[1], 2, geom)
    curl[1] = _derivative(B[0], 2, geom) - _derivative(B[2], 0, geom)
    curl[2] = _derivative(B[1], 0, geom) - _derivative(B[0], 1, geom)
    return curl


def discrete_divergence(B: np.ndarray, geom: GridGeometry) -> np.ndarray:
    """
    Central-difference divergence sum_a (B_a[i+1] - B_a[i-1]) / (2 d_a).

    Returns:
        Array of shape B.shape[1:]; meaningful on interior cells
    """
    div = np.zeros(B.shape[1:])
    for axis in range(geom.dim):
        div += central_difference(B[axis], axis, geom.spacing[axis])
    return div


def ct_rhs(state: MagneticKinematicState, rho: np.ndarray, geom: GridGeometry) -> MagneticKinematicState:
    """
    Implicit-midpoint increment Psi, with R^{n+1} = R^n - dt * Psi(R_mid).

    The B rows are curl(Omega) and the v rows are (B x curl B) / rho, both
    from central differences.

    Args:
        state: (B, v) over the padded grid with filled ghosts
        rho: Density over the padded grid
        geom: Mesh description

    Raises:
        NonPhysicalStateError: If any density is not positive
    """
    rho = np.asarray(rho, dtype=float)
    bad = ~(rho > 0.0)
    if np.any(bad):
        raise NonPhysicalStateError("Non-positive density in CT substep", locate_cell(bad))
    omega = electric_field(state.B, state.v)
    psi_b = discrete_curl(omega, geom)
    current = discrete_curl(state.B, geom)
    psi_v = np.cross(state.B, current, axis=0) / rho
    return MagneticKinematicState(psi_b, psi_v)


def _kinematic_field(field: FieldGrid, spec: BoundarySpec) -> FieldGrid:
    """Copy of ``field`` with velocity in the momentum rows and filled ghosts."""
    kin = field.copy()
    kin.data[MOMENTUM] = field.data[MOMENTUM] / field.data[RHO]
    return apply_boundaries(kin, spec, kind="kinematic")


def contraction_bound(field: FieldGrid, dt: float, geom: Optional[GridGeometry] = None) -> float:
    """
    Sufficient condition for the fixed-point map to be a contraction.

    Formula:
        alpha_a = max_cells(|v|_1 + (|B|_1 + sum_{b != a} |delta_a B_b|) / sqrt(rho))
        bound = (dt / 2) * sum_a alpha_a / d_a

    where delta_a f = (f[i+1] - f[i-1]) / 2. A value below 1 certifies
    convergence; the solver runs regardless.

    Args:
        field: Field with filled ghosts
        dt: Time step
        geom: Mesh description (defaults to the field's)
    """
    geom = geom or field.geometry
    rho = field.rho
    v = field.velocity
    B = field.magnetic
    v1 = np.sum(np.abs(v), axis=0)
    b1 = np.sum(np.abs(B), axis=0)
    root = np.sqrt(rho)
    total = 0.0
    for axis in range(geom.dim):
        jumps = np.zeros_like(rho)
        for comp in range(3):
            if comp != axis:
                jumps += np.abs(central_difference(B[comp], axis, 1.0))
        alpha = v1 + (b1 + jumps) / root
        total += float(np.max(field.interior_of(alpha))) / geom.spacing[axis]
    return 0.5 * dt * total


def update_energy(field_before: FieldGrid, field_after: FieldGrid) -> FieldGrid:
    """
    Carry the kinetic-energy change into E so internal energy is invariant.

    Formula:
        E^{n+1} = E^n - rho |v^n|^2 / 2 + rho |v^{n+1}|^2 / 2

    Raises:
        InvariantViolationError: If the densities differ
    """
    before = field_before.interior
    after = field_after.interior
    if not np.array_equal(before[RHO], after[RHO]):
        raise InvariantViolationError("Density changed during the magnetic substep")
    rho = before[RHO]
    v_old = before[MOMENTUM] / rho
    v_new = after[MOMENTUM] / rho
    out = field_after.copy()
    out.interior[ENERGY] = (
        before[ENERGY]
        - 0.5 * rho * np.sum(v_old * v_old, axis=0)
        + 0.5 * rho * np.sum(v_new * v_new, axis=0)
    )
    return out


def ct_solve(
    field: FieldGrid,
    dt: float,
    spec: BoundarySpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[FieldGrid, IterationReport]:
    """
    Advance (B, v) by one implicit-midpoint CT step.

    Iterates R^(k+1) = R^n - dt * Psi((R^n + R^(k)) / 2) from R^(0) = R^n,
    refreshing ghosts after every sweep, until
    max(|B^(k+1) - B^(k)|_inf, |v^(k+1) - v^(k)|_inf) < tol.

    Returns:
        (new field, report). Density is bitwise unchanged and E is updated
        with update_energy.

    Raises:
        ValueError: If tol <= 0 or max_iter < 1
        NonPhysicalStateError: If the input field is inadmissible
        ConvergenceError: If max_iter sweeps do not reach tol; carries the report
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")

    geom = field.geometry
    start = apply_boundaries(field.copy(), spec)
    require_admissible(start.interior_of(start.euler), "cell entering the CT substep")
    contraction = contraction_bound(start, dt)

    rho = start.rho
    scratch = _kinematic_field(start, spec)
    r_n = MagneticKinematicState(scratch.data[MAGNETIC].copy(), scratch.data[MOMENTUM].copy())
    current = r_n.copy()
    inner = (slice(None),) + geom.interior

    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        psi = ct_rhs(r_n.midpoint(current), rho, geom)
        next_b = r_n.B[inner] - dt * psi.B[inner]
        next_v = r_n.v[inner] - dt * psi.v[inner]
        error = max(
            float(np.max(np.abs(next_b - current.B[inner]))),
            float(np.max(np.abs(next_v - current.v[inner]))),
        )
        history.append(error)

        scratch.data[MAGNETIC][inner] = next_b
        scratch.data[MOMENTUM][inner] = next_v
        apply_boundaries(scratch, spec, kind="kinematic")
        current = MagneticKinematicState(scratch.data[MAGNETIC].copy(), scratch.data[MOMENTUM].copy())
        if error < tol:
            converged = True
            break

    report = IterationReport(
        iterations=len(history),
        final_error=history[-1],
        converged=converged,
        history=history,
        contraction=contraction,
    )
    if not converged:
        raise ConvergenceError(
            f"CT iteration did not reach tol={tol:g} in {max_iter} sweeps "
            f"(last error {report.final_error:.3e}, contraction bound {contraction:.3f})",
            report,
        )
    logger.debug(report.summary())

    after = start.copy()
    after.interior[MAGNETIC] = current.B[inner]
    after.interior[MOMENTUM] = start.interior[RHO] * current.v[inner]
    return update_energy(start, after), report
