"""
Physical state representations and equation-of-state algebra.

Arrays follow one convention throughout the package: the component axis comes
first and the spatial axes follow in storage order (z, y, x). A single cell is
simply an array whose component axis is the only axis.

Euler-conserved vectors have five components (rho, m_x, m_y, m_z, E) and
primitive vectors have five components (rho, v_x, v_y, v_z, p). Full cell
states have eight components (rho, m, B, E). E is the mechanical energy
(internal plus kinetic) and never includes the magnetic energy.

Nothing in this module clips or floors a value. Inadmissible states are
returned as-is or reported with NonPhysicalStateError.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError, NonPhysicalStateError


# Component indices of the eight-variable cell state
RHO = 0
MX, MY, MZ = 1, 2, 3
BX, BY, BZ = 4, 5, 6
ENERGY = 7
NVAR = 8

# Rows of the cell state that form the Euler-conserved vector
EULER_ROWS = (RHO, MX, MY, MZ, ENERGY)
MOMENTUM = slice(MX, MZ + 1)
MAGNETIC = slice(BX, BZ + 1)

ArrayLike = Union[np.ndarray, Sequence[float]]

# The constant GQL direction n1 = (1, 0, 0, 0, 0)
N_ONE = np.array([1.0, 0.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class GasModel:
    """
    Ideal-gas equation of state.

    Attributes:
        gamma: Adiabatic index (must exceed 1)
    """

    gamma: float = 5.0 / 3.0

    def __post_init__(self):
        """Validate the adiabatic index."""
        if not np.isfinite(self.gamma) or self.gamma <= 1.0:
            raise ConfigurationError(
                f"Invalid parameters:\n  - gamma must be > 1, got {self.gamma}"
            )

    def __str__(self) -> str:
        return f"GasModel(gamma={self.gamma:g})"


@dataclass(frozen=True)
class CellState:
    """
    Full per-cell MHD state.

    Attributes:
        rho: Mass density
        m: Momentum 3-vector
        B: Magnetic field 3-vector
        E: Mechanical energy (internal + kinetic, no magnetic part)
    """

    rho: float
    m: tuple[float, float, float]
    B: tuple[float, float, float]
    E: float

    @classmethod
    def from_primitive(
        cls,
        rho: float,
        v: Sequence[float],
        B: Sequence[float],
        p: float,
        gas: GasModel,
    ) -> "CellState":
        """Build a cell state from density, velocity, field and pressure."""
        q = prim_to_cons(np.array([rho, *v, p], dtype=float), gas)
        return cls(
            rho=float(q[0]),
            m=(float(q[1]), float(q[2]), float(q[3])),
            B=tuple(float(b) for b in B),
            E=float(q[4]),
        )

    @classmethod
    def from_array(cls, values: ArrayLike) -> "CellState":
        """Build a cell state from an eight-component array."""
        a = np.asarray(values, dtype=float)
        if a.shape != (NVAR,):
            raise ValueError(f"Cell state needs {NVAR} components, got shape {a.shape}")
        return cls(
            rho=float(a[RHO]),
            m=(float(a[MX]), float(a[MY]), float(a[MZ])),
            B=(float(a[BX]), float(a[BY]), float(a[BZ])),
            E=float(a[ENERGY]),
        )

    def to_array(self) -> np.ndarray:
        """Return the eight-component array (rho, m, B, E)."""
        return np.array([self.rho, *self.m, *self.B, self.E], dtype=float)

    @property
    def euler(self) -> np.ndarray:
        """The Euler-conserved projection (rho, m, E)."""
        return np.array([self.rho, *self.m, self.E], dtype=float)

    @property
    def velocity(self) -> np.ndarray:
        """Velocity m / rho."""
        return np.asarray(self.m, dtype=float) / self.rho

    @property
    def total_energy(self) -> float:
        """Total energy E + |B|^2 / 2 (derived, never stored)."""
        return self.E + 0.5 * float(np.dot(self.B, self.B))


@dataclass(frozen=True)
class PrimitiveState:
    """
    Primitive variables used by reconstruction and limiting.

    Attributes:
        rho: Density
        v: Velocity 3-vector
        p: Thermal pressure
    """

    rho: float
    v: tuple[float, float, float]
    p: float

    @classmethod
    def from_array(cls, values: ArrayLike) -> "PrimitiveState":
        """Build from a five-component array (rho, v, p)."""
        a = np.asarray(values, dtype=float)
        return cls(rho=float(a[0]), v=(float(a[1]), float(a[2]), float(a[3])), p=float(a[4]))

    def to_array(self) -> np.ndarray:
        """Return the five-component array (rho, v, p)."""
        return np.array([self.rho, *self.v, self.p], dtype=float)


@dataclass(frozen=True)
class GqlDirection:
    """
    Auxiliary velocity defining a linear GQL constraint.

    The admissible set equals the set of states with Q . n1 > 0 and
    Q . n_star > 0 for every auxiliary velocity v_star.

    Attributes:
        v_star: Free auxiliary velocity 3-vector
    """

    v_star: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def n_star(self) -> np.ndarray:
        """The direction (|v_star|^2 / 2, -v_star, 1)."""
        v = np.asarray(self.v_star, dtype=float)
        return np.array([0.5 * float(v @ v), -v[0], -v[1], -v[2], 1.0])

    @property
    def n_one(self) -> np.ndarray:
        """The density direction (1, 0, 0, 0, 0)."""
        return N_ONE.copy()


def locate_cell(mask: np.ndarray) -> Optional[tuple[int, ...]]:
    """Index (i, j[, k]) of the first True entry of a spatial mask."""
    if mask.ndim == 0:
        return None
    hit = np.argwhere(mask)
    if hit.size == 0:
        return None
    return tuple(int(i) for i in reversed(hit[0]))


def internal_energy(q: ArrayLike) -> np.ndarray:
    """
    Internal energy per unit volume E - |m|^2 / (2 rho).

    Args:
        q: Euler-conserved array of shape (5, ...)

    Returns:
        Array of shape q.shape[1:]
    """
    q = np.asarray(q, dtype=float)
    m = q[1:4]
    return q[4] - 0.5 * np.sum(m * m, axis=0) / q[0]


def cons_to_prim(q: ArrayLike, gas: GasModel) -> np.ndarray:
    """
    Convert Euler-conserved values to primitive values.

    Args:
        q: Array (rho, m_x, m_y, m_z, E) of shape (5, ...)
        gas: Equation of state

    Returns:
        Array (rho, v_x, v_y, v_z, p) of the same shape. Negative pressure is
        returned unchanged so callers can detect it.

    Raises:
        NonPhysicalStateError: If any density is not positive

    Example:
        >>> cons_to_prim([2.0, 2.0, 0.0, 0.0, 3.0], GasModel(1.4))
        array([2. , 1. , 0. , 0. , 0.8])
    """
    q = np.asarray(q, dtype=float)
    rho = q[0]
    bad = ~(rho > 0.0)
    if np.any(bad):
        raise NonPhysicalStateError(
            f"Non-positive density {float(np.min(rho)):.6e}", locate_cell(bad)
        )
    w = np.empty_like(q)
    w[0] = rho
    w[1:4] = q[1:4] / rho
    w[4] = (gas.gamma - 1.0) * (q[4] - 0.5 * np.sum(q[1:4] * w[1:4], axis=0))
    return w


def prim_to_cons(w: ArrayLike, gas: GasModel) -> np.ndarray:
    """
    Convert primitive values to Euler-conserved values.

    Accepts any real input; admissibility is the caller's concern.

    Formula:
        m = rho v,  E = p / (gamma - 1) + rho |v|^2 / 2
    """
    w = np.asarray(w, dtype=float)
    q = np.empty_like(w)
    q[0] = w[0]
    q[1:4] = w[0] * w[1:4]
    q[4] = w[4] / (gas.gamma - 1.0) + 0.5 * w[0] * np.sum(w[1:4] * w[1:4], axis=0)
    return q


def is_admissible(q: ArrayLike) -> Union[bool, np.ndarray]:
    """
    Membership in the admissible set: rho > 0 and E - |m|^2 / (2 rho) > 0.

    Returns a bool for a single state and a boolean array otherwise.
    """
    q = np.asarray(q, dtype=float)
    rho = q[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = q[4] - 0.5 * np.sum(q[1:4] * q[1:4], axis=0) / rho
    result = np.logical_and(rho > 0.0, eps > 0.0)
    if result.ndim == 0:
        return bool(result)
    return result


def gql_dot(q: ArrayLike, direction: Union[GqlDirection, ArrayLike]) -> Union[float, np.ndarray]:
    """
    Evaluate Q . n_star = (|v_star|^2 / 2) rho - v_star . m + E.

    Args:
        q: Euler-conserved array of shape (5, ...)
        direction: GqlDirection, or an array of auxiliary velocities shaped
            (3, ...) broadcastable against the spatial shape of q

    Returns:
        The dot product; its minimum over v_star is the internal energy,
        attained at v_star = m / rho.
    """
    q = np.asarray(q, dtype=float)
    if isinstance(direction, GqlDirection):
        v = np.asarray(direction.v_star, dtype=float).reshape((3,) + (1,) * (q.ndim - 1))
    else:
        v = np.asarray(direction, dtype=float)
    value = 0.5 * np.sum(v * v, axis=0) * q[0] - np.sum(v * q[1:4], axis=0) + q[4]
    if np.ndim(value) == 0:
        return float(value)
    return value


def sound_speed(w: ArrayLike, gas: GasModel) -> Union[float, np.ndarray]:
    """
    Sound speed sqrt(gamma p / rho).

    Args:
        w: Primitive array (rho, v, p) of shape (5, ...)
        gas: Equation of state

    Raises:
        NonPhysicalStateError: If any density or pressure is not positive
    """
    w = np.asarray(w, dtype=float)
    bad = ~np.logical_and(w[0] > 0.0, w[4] > 0.0)
    if np.any(bad):
        raise NonPhysicalStateError("Sound speed needs rho > 0 and p > 0", locate_cell(bad))
    c = np.sqrt(gas.gamma * w[4] / w[0])
    if np.ndim(c) == 0:
        return float(c)
    return c


def require_admissible(q: ArrayLike, what: str = "state") -> None:
    """
    Raise NonPhysicalStateError naming the first inadmissible cell, if any.

    Args:
        q: Euler-conserved array of shape (5, ...)
        what: Label used in the error message
    """
    ok = np.asarray(is_admissible(q))
    if not np.all(ok):
        raise NonPhysicalStateError(f"Inadmissible {what}", locate_cell(~ok))
