"""
Positivity-preserving finite-volume operator for the Euler subsystem.

The magnetic field is frozen here. Primitive variables are reconstructed with
van Albada slopes, the slopes are scaled by a three-step limiter (density,
pressure, then a shared velocity factor) and the limited face values feed a
Lax-Friedrichs flux. Forward Euler and SSP-RK2 updates are provided for 2D and
3D fields.

Under the stage condition dt * sum_a(alpha_a / d_a) <= 1/q every updated cell
average stays admissible; a violated condition is reported as
StepRejectedError before any work is done.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    EULER_ROWS,
    GasModel,
    PrimitiveState,
    locate_cell,
    cons_to_prim,
    is_admissible,
    prim_to_cons,
    require_admissible,
)
from .errors import ConfigurationError, InvariantViolationError, NonPhysicalStateError, StepRejectedError
from .grid import BoundarySpec, FieldGrid, along, apply_boundaries

logger = logging.getLogger(__name__)

LIMITER_EPS = 1e-14

# Relative slack on the stage CFL check so dt chosen exactly at the bound
# survives floating-point rounding of dt * rate.
CFL_ROUNDING = 1e-12


@dataclass(frozen=True)
class WaveSpeeds:
    """
    Stage-global numerical viscosity parameters.

    Attributes:
        alpha: max(|v_a| + c) per axis over the field
        spacing: Cell size per axis of the grid the speeds belong to
    """

    alpha: tuple[float, ...]
    spacing: tuple[float, ...]

    @property
    def rate(self) -> float:
        """sum_a alpha_a / d_a."""
        return float(sum(a / h for a, h in zip(self.alpha, self.spacing)))

    @property
    def weights(self) -> tuple[float, ...]:
        """
        Convex weights C_a = (alpha_a / d_a) / rate.

        In 2D this is C_x = alpha_1 dy / (alpha_1 dy + alpha_2 dx).
        """
        rate = self.rate
        return tuple((a / h) / rate for a, h in zip(self.alpha, self.spacing))

    def max_dt(self, q: float) -> float:
        """Largest forward-Euler step satisfying dt * rate <= 1/q."""
        return (1.0 / q) / self.rate


@dataclass
class SlopePair:
    """
    Primitive slope deltas per axis.

    Attributes:
        delta: Array of shape (dim, 5, ...) holding (d_rho, d_v, d_p) per axis,
            already scaled to half a cell: delta = (h/2) * van Albada slope
    """

    delta: np.ndarray

    @property
    def dim(self) -> int:
        return self.delta.shape[0]

    @classmethod
    def zeros(cls, dim: int, shape: tuple[int, ...]) -> "SlopePair":
        return cls(np.zeros((dim, 5) + tuple(shape)))


@dataclass
class LimiterCoefficients:
    """
    Per-cell limiter parameters, all in [0, 1].

    Attributes:
        alpha: Density slope factors, shape (dim, ...)
        kappa: Pressure slope factors, shape (dim, ...)
        beta: Shared velocity slope factor, shape (...)
    """

    alpha: np.ndarray
    kappa: np.ndarray
    beta: np.ndarray

    @classmethod
    def inactive(cls, dim: int, shape: tuple[int, ...]) -> "LimiterCoefficients":
        """Coefficients that leave every slope untouched."""
        shape = tuple(shape)
        return cls(np.ones((dim,) + shape), np.ones((dim,) + shape), np.ones(shape))

    @property
    def dim(self) -> int:
        return self.alpha.shape[0]

    @property
    def untouched(self) -> np.ndarray:
        """Boolean mask of cells where every coefficient equals 1."""
        return np.all(self.alpha == 1.0, axis=0) & np.all(self.kappa == 1.0, axis=0) & (self.beta == 1.0)

    def scale_factors(self) -> np.ndarray:
        """Factors (alpha, beta, beta, beta, kappa) per axis, shape (dim, 5, ...)."""
        factors = np.empty((self.dim, 5) + self.beta.shape)
        factors[:, 0] = self.alpha
        factors[:, 1:4] = self.beta[None, None]
        factors[:, 4] = self.kappa
        return factors

    def restrict(self, index: tuple) -> "LimiterCoefficients":
        """Coefficients over a spatial sub-block."""
        return LimiterCoefficients(
            self.alpha[(slice(None),) + index],
            self.kappa[(slice(None),) + index],
            self.beta[index],
        )


@dataclass
class InterfaceStates:
    """
    Limited primitive face values.

    Attributes:
        upper: Value at the i+1/2 face of each cell, shape (dim, 5, ...)
        lower: Value at the i-1/2 face of each cell, shape (dim, 5, ...)
    """

    upper: np.ndarray
    lower: np.ndarray


def _as_primitive(cell_avg: Union[PrimitiveState, np.ndarray]) -> np.ndarray:
    if isinstance(cell_avg, PrimitiveState):
        return cell_avg.to_array()
    return np.asarray(cell_avg, dtype=float)


def compute_wave_speeds(field: FieldGrid, gas: GasModel) -> WaveSpeeds:
    """
    Per-axis maximum of |v_a| + c over interior and ghost cells.

    Ghost layers must be filled first.

    Raises:
        NonPhysicalStateError: If any cell is inadmissible

    Example:
        A uniform state with rho = 1, v = 0, p = 1 and gamma = 1.4 gives
        alpha = sqrt(1.4) on every axis.
    """
    q = field.euler
    require_admissible(q, "cell while computing wave speeds")
    w = cons_to_prim(q, gas)
    c = np.sqrt(gas.gamma * w[4] / w[0])
    geom = field.geometry
    alpha = tuple(float(np.max(np.abs(w[1 + a]) + c)) for a in range(geom.dim))
    return WaveSpeeds(alpha=alpha, spacing=geom.spacing)


def van_albada_slope(backward: np.ndarray, forward: np.ndarray, eps: float) -> np.ndarray:
    """
    Van Albada blend of backward and forward divided differences.

    Formula:
        ((f^2 + eps) b + (b^2 + eps) f) / (b^2 + f^2 + 2 eps)

    The denominator is positive for eps > 0, so no special cases are needed.
    """
    b = np.asarray(backward, dtype=float)
    f = np.asarray(forward, dtype=float)
    return ((f * f + eps) * b + (b * b + eps) * f) / (b * b + f * f + 2.0 * eps)


def primitive_slopes(w: np.ndarray, spacing: tuple[float, ...]) -> SlopePair:
    """
    Van Albada slope deltas of a primitive array.

    Args:
        w: Primitive values, shape (5, ...) over a padded grid
        spacing: Cell size per axis

    Returns:
        SlopePair with delta = (h/2) * slope per axis, eps_a = 3 h_a. The
        outermost layer of each axis has no neighbor and gets zero slope.
    """
    nd = w.ndim
    slopes = SlopePair.zeros(len(spacing), w.shape[1:])
    for axis, h in enumerate(spacing):
        center = w[along(nd, axis, slice(1, -1))]
        backward = (center - w[along(nd, axis, slice(None, -2))]) / h
        forward = (w[along(nd, axis, slice(2, None))] - center) / h
        slopes.delta[axis][along(nd, axis, slice(1, -1))] = 0.5 * h * van_albada_slope(
            backward, forward, 3.0 * h
        )
    return slopes


def van_albada_slopes(field: FieldGrid, gas: GasModel) -> SlopePair:
    """
    Primitive slope deltas for every cell of a field with filled ghosts.

    Returns:
        SlopePair over the padded grid
    """
    w = cons_to_prim(field.euler, gas)
    return primitive_slopes(w, field.geometry.spacing)


def pp_limit(
    cell_avg: Union[PrimitiveState, np.ndarray],
    slopes: SlopePair,
    speeds: WaveSpeeds,
    q: float,
    gas: GasModel,
    eps: float = LIMITER_EPS,
) -> LimiterCoefficients:
    """
    Three-step positivity-preserving slope limiter.

    Step 1 scales each density slope so both face densities stay positive,
    step 2 does the same for pressure, and step 3 picks one velocity factor
    beta from a closed form so the flux decomposition stays admissible.

    Args:
        cell_avg: Primitive cell averages, shape (5, ...)
        slopes: Slope deltas, shape (dim, 5, ...)
        speeds: Stage wave speeds supplying the convex weights C_a
        q: Positivity parameter, q > 2
        gas: Equation of state
        eps: Guard keeping the limited density and pressure strictly positive

    Returns:
        LimiterCoefficients with every factor in [0, 1] and exactly 1 where
        the corresponding slope vanishes

    Raises:
        ValueError: If q <= 2
        NonPhysicalStateError: If a cell average has rho <= 0 or p <= 0

    Formula:
        alpha_a = min(rho / (|d_rho_a| (1 + eps)), 1)
        kappa_a = min(p / (|d_p_a| (1 + eps)), 1)
        beta = min(sqrt((q-2)^2 rho p / ((gamma-1) (2 A1 + (q-2) rho^2 A2))), 1)
        A1 = |sum_a C_a alpha_a d_rho_a d_v_a|^2,  A2 = sum_a C_a |d_v_a|^2
    """
    if q <= 2.0:
        raise ValueError(f"q must be > 2, got {q}")
    w = _as_primitive(cell_avg)
    rho, p = w[0], w[4]
    bad = ~((rho > 0.0) & (p > 0.0))
    if np.any(bad):
        raise NonPhysicalStateError("Inadmissible cell average in limiter", locate_cell(bad))

    d = slopes.delta
    dim = d.shape[0]
    d_rho, d_v, d_p = d[:, 0], d[:, 1:4], d[:, 4]

    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(d_rho != 0.0, np.minimum(rho / (np.abs(d_rho) * (1.0 + eps)), 1.0), 1.0)
        kappa = np.where(d_p != 0.0, np.minimum(p / (np.abs(d_p) * (1.0 + eps)), 1.0), 1.0)

    weights = np.asarray(speeds.weights, dtype=float).reshape((dim,) + (1,) * (w.ndim - 1))
    coupling = np.sum((weights * alpha * d_rho)[:, None] * d_v, axis=0)
    a1 = np.sum(coupling * coupling, axis=0)
    a2 = np.sum(weights * np.sum(d_v * d_v, axis=1), axis=0)

    numerator = (q - 2.0) ** 2 * rho * p
    denominator = (gas.gamma - 1.0) * (2.0 * a1 + (q - 2.0) * rho * rho * a2)
    moving = np.any(d_v != 0.0, axis=(0, 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(moving, np.minimum(np.sqrt(numerator / denominator), 1.0), 1.0)

    return LimiterCoefficients(
        alpha=np.asarray(alpha, dtype=float),
        kappa=np.asarray(kappa, dtype=float),
        beta=np.asarray(beta, dtype=float),
    )


def limited_interface_states(
    cell_avg: Union[PrimitiveState, np.ndarray],
    slopes: SlopePair,
    coeffs: LimiterCoefficients,
) -> InterfaceStates:
    """
    Face values W +/- (alpha d_rho, beta d_v, kappa d_p) per axis.

    Example:
        With rho = 1, d_rho_x = 0.5 and alpha_x = 1 the x-face densities are
        1.5 (upper face) and 0.5 (lower face).
    """
    w = _as_primitive(cell_avg)
    scaled = coeffs.scale_factors() * slopes.delta
    return InterfaceStates(upper=w[None] + scaled, lower=w[None] - scaled)


def primitive_flux(w: np.ndarray, q: np.ndarray, axis: int) -> np.ndarray:
    """
    Physical Euler flux from primitive values and their conserved form.

    Args:
        w: Primitive array (rho, v, p) of shape (5, ...)
        q: The same states in conserved form, shape (5, ...)
        axis: 0, 1 or 2

    Formula:
        G_a = (rho v_a, rho v_a v + p e_a, (E + p) v_a)
    """
    p = w[4]
    flux = np.empty_like(q)
    flux[0] = q[1 + axis]
    flux[1:4] = q[1 + axis] * w[1:4]
    flux[1 + axis] += p
    flux[4] = (q[4] + p) * w[1 + axis]
    return flux


def euler_flux(q: np.ndarray, axis: int, gas: GasModel) -> np.ndarray:
    """
    Physical Euler flux along one axis: (m_a, m_a v + p e_a, (E + p) v_a).

    Args:
        q: Euler-conserved array of shape (5, ...)
        axis: 0, 1 or 2
        gas: Equation of state
    """
    q = np.asarray(q, dtype=float)
    return primitive_flux(cons_to_prim(q, gas), q, axis)


def lax_friedrichs_flux(
    q_minus: np.ndarray,
    q_plus: np.ndarray,
    axis: int,
    speeds: WaveSpeeds,
    gas: GasModel,
) -> np.ndarray:
    """
    Lax-Friedrichs flux 0.5 (G(q-) + G(q+) - alpha_a (q+ - q-)).

    Raises:
        NonPhysicalStateError: If either input state is inadmissible
    """
    q_minus = np.asarray(q_minus, dtype=float)
    q_plus = np.asarray(q_plus, dtype=float)
    require_admissible(q_minus, "face state")
    require_admissible(q_plus, "face state")
    return 0.5 * (
        euler_flux(q_minus, axis, gas)
        + euler_flux(q_plus, axis, gas)
        - speeds.alpha[axis] * (q_plus - q_minus)
    )


def require_positive_faces(w: np.ndarray, what: str = "face state") -> None:
    """
    Raise NonPhysicalStateError unless every primitive face has rho > 0 and p > 0.

    A limited face may carry a pressure of order eps * p, below the rounding
    error of E - |m|^2 / (2 rho); faces are judged on (rho, p) directly.
    """
    bad = ~((w[0] > 0.0) & (w[4] > 0.0))
    if np.any(bad):
        raise NonPhysicalStateError(f"Inadmissible {what}", locate_cell(bad))


def face_lax_friedrichs_flux(
    w_minus: np.ndarray,
    w_plus: np.ndarray,
    axis: int,
    speeds: WaveSpeeds,
    gas: GasModel,
) -> np.ndarray:
    """
    Lax-Friedrichs flux from primitive face values.

    Physical fluxes are evaluated from (rho, v, p) with E built once per face;
    the conserved faces enter only the dissipation term.

    Raises:
        NonPhysicalStateError: If a face has rho <= 0 or p <= 0
    """
    w_minus = np.asarray(w_minus, dtype=float)
    w_plus = np.asarray(w_plus, dtype=float)
    require_positive_faces(w_minus)
    require_positive_faces(w_plus)
    q_minus = prim_to_cons(w_minus, gas)
    q_plus = prim_to_cons(w_plus, gas)
    return 0.5 * (
        primitive_flux(w_minus, q_minus, axis)
        + primitive_flux(w_plus, q_plus, axis)
        - speeds.alpha[axis] * (q_plus - q_minus)
    )


def check_stage_cfl(speeds: WaveSpeeds, dt: float, q: float) -> None:
    """
    Enforce dt * sum_a(alpha_a / d_a) <= 1/q for one forward-Euler stage.

    Raises:
        StepRejectedError: Carrying the admissible dt
    """
    bound = 1.0 / q
    if dt * speeds.rate > bound * (1.0 + CFL_ROUNDING):
        raise StepRejectedError(
            f"Stage CFL violated: dt * rate = {dt * speeds.rate:.6e} > 1/q = {bound:.6e}",
            admissible_dt=speeds.max_dt(q),
        )


def limiter_coefficients(
    field: FieldGrid,
    speeds: WaveSpeeds,
    q: float,
    gas: GasModel,
    eps: float = LIMITER_EPS,
) -> LimiterCoefficients:
    """
    Limiter coefficients over the interior of a field with filled ghosts.
    """
    w = cons_to_prim(field.euler, gas)
    slopes = primitive_slopes(w, field.geometry.spacing)
    coeffs = pp_limit(w, slopes, speeds, q, gas, eps)
    return coeffs.restrict(field.geometry.interior)


def euler_rhs(
    field: FieldGrid,
    speeds: WaveSpeeds,
    q: float,
    gas: GasModel,
    *,
    pp_limiter: bool = True,
    second_order: bool = True,
    limiter_eps: float = LIMITER_EPS,
) -> np.ndarray:
    """
    Flux-difference right-hand side -sum_a (F_{i+1/2} - F_{i-1/2}) / d_a.

    Args:
        field: Field with filled ghosts
        speeds: Stage wave speeds
        q: Positivity parameter
        gas: Equation of state
        pp_limiter: Apply the limiter (False gives plain MUSCL slopes)
        second_order: Use reconstructed slopes (False forces them to zero)
        limiter_eps: Guard of the density and pressure steps

    Returns:
        Array of shape (5, *geometry.shape) over the interior
    """
    geom = field.geometry
    g = geom.ghost
    w = cons_to_prim(field.euler, gas)
    if second_order:
        slopes = primitive_slopes(w, geom.spacing)
    else:
        slopes = SlopePair.zeros(geom.dim, w.shape[1:])
    if pp_limiter:
        coeffs = pp_limit(w, slopes, speeds, q, gas, limiter_eps)
    else:
        coeffs = LimiterCoefficients.inactive(geom.dim, w.shape[1:])
    faces = limited_interface_states(w, slopes, coeffs)

    nd = w.ndim
    rhs = np.zeros((5,) + geom.shape)
    for axis in range(geom.dim):
        n = geom.n[axis]
        left = list((slice(None),) + geom.interior)
        right = list(left)
        left[nd - 1 - axis] = slice(g - 1, g + n)
        right[nd - 1 - axis] = slice(g, g + n + 1)
        w_minus = faces.upper[axis][tuple(left)]
        w_plus = faces.lower[axis][tuple(right)]
        flux = face_lax_friedrichs_flux(w_minus, w_plus, axis, speeds, gas)
        rhs -= np.diff(flux, axis=nd - 1 - axis) / geom.spacing[axis]
    return rhs


def euler_forward_step(
    field: FieldGrid,
    dt: float,
    spec: BoundarySpec,
    q: float,
    gas: GasModel,
    *,
    pp_limiter: bool = True,
    second_order: bool = True,
    limiter_eps: float = LIMITER_EPS,
    speeds: Optional[WaveSpeeds] = None,
) -> FieldGrid:
    """
    One positivity-preserving forward-Euler step of the Euler subsystem.

    Wave speeds are computed from this stage's field unless supplied. The
    magnetic field is copied through unchanged.

    Returns:
        New field; its ghost layers are not refreshed

    Raises:
        ConfigurationError: If q <= 2
        StepRejectedError: If dt violates the stage CFL condition
        NonPhysicalStateError: If an input cell (or, with the limiter off, a
            face value) is inadmissible
        InvariantViolationError: If an updated average is inadmissible
    """
    if q <= 2.0:
        raise ConfigurationError(f"q must be > 2, got {q}")
    work = apply_boundaries(field.copy(), spec)
    if speeds is None:
        speeds = compute_wave_speeds(work, gas)
    check_stage_cfl(speeds, dt, q)

    rhs = euler_rhs(
        work,
        speeds,
        q,
        gas,
        pp_limiter=pp_limiter,
        second_order=second_order,
        limiter_eps=limiter_eps,
    )
    rows = list(EULER_ROWS)
    interior = work.interior
    updated = interior[rows] + dt * rhs
    ok = is_admissible(updated)
    if not np.all(ok):
        raise InvariantViolationError(
            f"Forward-Euler update produced an inadmissible average at cell {locate_cell(~np.asarray(ok))}"
        )
    interior[rows] = updated
    return work


def euler_ssprk2_step(
    field: FieldGrid,
    dt: float,
    spec: BoundarySpec,
    q: float,
    gas: GasModel,
    **options,
) -> FieldGrid:
    """
    Second-order SSP Runge-Kutta step built from two forward-Euler stages.

    Q1 = FE(Qn, dt),  Qn+1 = Qn / 2 + FE(Q1, dt) / 2. The convex combination
    keeps every average admissible when both stages do.

    Args:
        options: Forwarded to euler_forward_step (pp_limiter, second_order,
            limiter_eps)
    """
    stage1 = euler_forward_step(field, dt, spec, q, gas, **options)
    stage2 = euler_forward_step(stage1, dt, spec, q, gas, **options)
    rows = list(EULER_ROWS)
    out = field.copy()
    combined = 0.5 * field.interior[rows] + 0.5 * stage2.interior[rows]
    ok = is_admissible(combined)
    if not np.all(ok):
        raise InvariantViolationError("SSP-RK2 combination produced an inadmissible average")
    out.interior[rows] = combined
    logger.debug("SSP-RK2 step dt=%.6e", dt)
    return out
