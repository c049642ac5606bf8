"""
Conservation, positivity, divergence and convergence measurements.

All reductions run over interior cells only. Momentum totals are reported
but never asserted: the magnetic substep conserves energy by construction but
makes no discrete momentum-conservation claim.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ENERGY, MAGNETIC, MOMENTUM, RHO, GasModel
from .ct_fd import discrete_divergence
from .euler_fv import compute_wave_speeds, limiter_coefficients
from .grid import BoundarySpec, FieldGrid, apply_boundaries


@dataclass(frozen=True)
class Totals:
    """Interior sums of the conserved quantities."""

    mass: float
    momentum: tuple[float, float, float]
    total_energy: float
    magnetic_energy: float


@dataclass(frozen=True)
class PositivityReport:
    """
    Interior minima of density and pressure.

    Attributes:
        min_rho: Smallest density
        min_p: Smallest pressure
        argmin_rho: Cell (i, j[, k]) holding min_rho
        argmin_p: Cell (i, j[, k]) holding min_p
    """

    min_rho: float
    min_p: float
    argmin_rho: tuple[int, ...]
    argmin_p: tuple[int, ...]

    @property
    def positive(self) -> bool:
        return self.min_rho > 0.0 and self.min_p > 0.0


@dataclass(frozen=True)
class DivergenceReport:
    """Max-norm and root-mean-square of the discrete divergence of B."""

    max_abs: float
    l2: float


def totals(field: FieldGrid) -> Totals:
    """
    Interior sums of mass, momentum, total energy and magnetic energy.

    total_energy is sum(E + |B|^2 / 2).
    """
    cells = field.interior
    magnetic = 0.5 * np.sum(cells[MAGNETIC] ** 2, axis=0)
    momentum = cells[MOMENTUM].reshape(3, -1).sum(axis=1)
    return Totals(
        mass=float(np.sum(cells[RHO])),
        momentum=(float(momentum[0]), float(momentum[1]), float(momentum[2])),
        total_energy=float(np.sum(cells[ENERGY] + magnetic)),
        magnetic_energy=float(np.sum(magnetic)),
    )


def _cell_index(flat_index: int, shape: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(int(i) for i in reversed(np.unravel_index(flat_index, shape)))


def pressure(field: FieldGrid, gas: GasModel) -> np.ndarray:
    """
    Interior thermal pressure (gamma - 1)(E - |m|^2 / (2 rho)), unclipped.
    """
    cells = field.interior
    with np.errstate(divide="ignore", invalid="ignore"):
        kinetic = 0.5 * np.sum(cells[MOMENTUM] ** 2, axis=0) / cells[RHO]
    return (gas.gamma - 1.0) * (cells[ENERGY] - kinetic)


def positivity_report(field: FieldGrid, gas: GasModel) -> PositivityReport:
    """
    Interior minima of rho and p with their locations.

    Cells with non-positive density report a pressure of -inf or nan, which
    the minimum picks up, so inadmissible cells are always flagged.
    """
    rho = field.interior[RHO]
    p = pressure(field, gas)
    p = np.where(np.isnan(p), -np.inf, p)
    i_rho = int(np.argmin(rho))
    i_p = int(np.argmin(p))
    return PositivityReport(
        min_rho=float(rho.flat[i_rho]),
        min_p=float(p.flat[i_p]),
        argmin_rho=_cell_index(i_rho, rho.shape),
        argmin_p=_cell_index(i_p, p.shape),
    )


def divergence_report(field: FieldGrid, spec: Optional[BoundarySpec] = None) -> DivergenceReport:
    """
    Norms of the central-difference divergence of B over the interior.

    Args:
        field: Field whose ghosts are filled, or any field when spec is given
        spec: Boundary conditions used to refill ghosts on a copy first
    """
    if spec is not None:
        field = apply_boundaries(field.copy(), spec)
    div = field.interior_of(discrete_divergence(field.magnetic, field.geometry))
    return DivergenceReport(
        max_abs=float(np.max(np.abs(div))),
        l2=float(np.sqrt(np.mean(div * div))),
    )


def scaled_divergence(field: FieldGrid, spec: Optional[BoundarySpec] = None) -> float:
    """
    max|div B| * min(d) / |B|_inf, the dimensionless divergence error.

    Returns 0 for a field with B = 0 everywhere.
    """
    report = divergence_report(field, spec)
    b_max = float(np.max(np.abs(field.interior[MAGNETIC])))
    if b_max == 0.0:
        return 0.0
    return report.max_abs * field.geometry.min_spacing / b_max


def convergence_order(errors: Sequence[float]) -> list[float]:
    """
    Observed orders log2(e_k / e_{k+1}) for successive grid doublings.

    Raises:
        ValueError: If any error is not positive

    Example:
        >>> convergence_order([4.0, 1.0])
        [2.0]
    """
    values = [float(e) for e in errors]
    if any(not e > 0.0 for e in values):
        raise ValueError(f"Errors must be positive to compute orders, got {values}")
    return [math.log2(a / b) for a, b in zip(values, values[1:])]


def relative_drift(initial: float, current: float) -> float:
    """|current - initial| / |initial| (absolute drift when initial is 0)."""
    scale = abs(initial)
    return abs(current - initial) / scale if scale > 0.0 else abs(current - initial)


def limiter_inactive_fraction(field: FieldGrid, spec: BoundarySpec, q: float, gas: GasModel) -> float:
    """
    Share of interior cells whose limiter coefficients are all exactly 1.
    """
    work = apply_boundaries(field.copy(), spec)
    speeds = compute_wave_speeds(work, gas)
    coeffs = limiter_coefficients(work, speeds, q, gas)
    return float(np.mean(coeffs.untouched))


def plasma_beta(field: FieldGrid, gas: GasModel) -> np.ndarray:
    """Interior ratio of thermal to magnetic pressure, 2 p / |B|^2."""
    b2 = np.sum(field.interior[MAGNETIC] ** 2, axis=0)
    with np.errstate(divide="ignore"):
        return 2.0 * pressure(field, gas) / b2


def mach_number(field: FieldGrid, gas: GasModel) -> np.ndarray:
    """Interior sonic Mach number |v| / c."""
    cells = field.interior
    speed = np.sqrt(np.sum(cells[MOMENTUM] ** 2, axis=0)) / cells[RHO]
    c = np.sqrt(gas.gamma * pressure(field, gas) / cells[RHO])
    return speed / c
