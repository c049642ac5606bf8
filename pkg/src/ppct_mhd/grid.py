"""
Uniform Cartesian mesh geometry, field storage with ghost layers and
boundary conditions for 2D and 3D.

Physical axes are numbered 0 (x), 1 (y), 2 (z). Arrays store spatial axes in
(z, y, x) order after a leading component axis, so physical axis ``a`` lives at
array position ``ndim - 1 - a``; the helpers below hide that mapping.
"""

from dataclasses import dataclass, replace
from typing import Callable, Literal, Mapping, Optional, Union

import numpy as np

from .core import BX, MX, NVAR, RHO, CellState, ENERGY
from .errors import ConfigurationError


GHOST = 2

Side = Literal["lower", "upper"]
SIDES: tuple[Side, Side] = ("lower", "upper")
FillKind = Literal["conserved", "kinematic"]


@dataclass(frozen=True)
class GridGeometry:
    """
    Uniform rectangular mesh.

    Attributes:
        n: Cells per axis in (x, y[, z]) order
        lower: Lower domain corner per axis
        upper: Upper domain corner per axis
        ghost: Ghost-layer width (at least 2)

    Computed Properties:
        dim: 2 or 3
        spacing: Cell size per axis, extent / n
        shape: Interior array shape in storage order
        padded_shape: Array shape including ghosts in storage order
    """

    n: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    ghost: int = GHOST

    def __post_init__(self):
        """Normalize to tuples and validate."""
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        self.validate()

    def validate(self) -> None:
        """
        Check the mesh description.

        Raises:
            ConfigurationError: If the geometry is unusable
        """
        errors = []
        if len(self.n) not in (2, 3):
            errors.append(f"Grid must be 2D or 3D, got {len(self.n)} axes")
        if not (len(self.n) == len(self.lower) == len(self.upper)):
            errors.append("n, lower and upper must have the same length")
        if any(v <= 0 for v in self.n):
            errors.append(f"Cell counts must be positive, got {self.n}")
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            errors.append(f"Upper corner must exceed lower corner, got {self.lower} .. {self.upper}")
        if self.ghost < 2:
            errors.append(f"Ghost width must be at least 2, got {self.ghost}")
        if errors:
            raise ConfigurationError("Invalid parameters:\n" + "\n".join(f"  - {e}" for e in errors))

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ext / cells for ext, cells in zip(self.extent, self.n))

    @property
    def dx(self) -> float:
        return self.spacing[0]

    @property
    def dy(self) -> float:
        return self.spacing[1]

    @property
    def dz(self) -> Optional[float]:
        return self.spacing[2] if self.dim == 3 else None

    @property
    def min_spacing(self) -> float:
        return min(self.spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(reversed(self.n))

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(cells + 2 * self.ghost for cells in reversed(self.n))

    @property
    def interior(self) -> tuple[slice, ...]:
        """Spatial slices selecting interior cells of a padded array."""
        g = self.ghost
        return tuple(slice(g, g + cells) for cells in reversed(self.n))

    def summary(self) -> str:
        """Human-readable description of the mesh."""
        axes = "xyz"[: self.dim]
        lines = [f"Grid: {' x '.join(str(v) for v in self.n)} cells, ghost width {self.ghost}"]
        for a, name in enumerate(axes):
            lines.append(
                f"  {name}: [{self.lower[a]:g}, {self.upper[a]:g}], d{name} = {self.spacing[a]:.6g}"
            )
        return "\n".join(lines)


def along(ndim: int, axis: int, index: Union[slice, int]) -> tuple:
    """
    Build an index tuple that applies ``index`` to physical ``axis``.

    Args:
        ndim: Number of dimensions of the array being indexed
        axis: Physical axis (0 = x, 1 = y, 2 = z)
        index: Slice or integer for that axis

    Returns:
        Tuple usable as ``array[...]`` with full slices elsewhere
    """
    idx: list = [slice(None)] * ndim
    idx[ndim - 1 - axis] = index
    return tuple(idx)


def central_difference(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """
    Central difference (f[i+1] - f[i-1]) / (2h) along a physical axis.

    The outermost layer on each side has no neighbor and is left at zero; on
    padded arrays that layer is always a ghost layer.
    """
    out = np.zeros_like(f)
    nd = f.ndim
    out[along(nd, axis, slice(1, -1))] = (
        f[along(nd, axis, slice(2, None))] - f[along(nd, axis, slice(None, -2))]
    ) / (2.0 * h)
    return out


def cell_centers(geom: GridGeometry) -> list[np.ndarray]:
    """
    Cell-center coordinates per axis.

    Returns:
        One 1D array per axis in (x, y[, z]) order

    Example:
        >>> cell_centers(GridGeometry((4, 1), (-1.0, 0.0), (1.0, 1.0)))[0]
        array([-0.75, -0.25,  0.25,  0.75])
    """
    return [
        geom.lower[a] + (np.arange(geom.n[a]) + 0.5) * geom.spacing[a]
        for a in range(geom.dim)
    ]


def padded_centers(geom: GridGeometry) -> list[np.ndarray]:
    """Cell-center coordinates per axis including ghost cells."""
    g = geom.ghost
    return [
        geom.lower[a] + (np.arange(geom.n[a] + 2 * g) - g + 0.5) * geom.spacing[a]
        for a in range(geom.dim)
    ]


def center_mesh(geom: GridGeometry, with_ghosts: bool = False) -> tuple[np.ndarray, ...]:
    """
    Broadcast cell-center coordinate arrays in storage layout.

    Returns:
        Arrays (X, Y[, Z]), each shaped like the interior (or padded) grid
    """
    centers = padded_centers(geom) if with_ghosts else cell_centers(geom)
    grids = np.meshgrid(*reversed(centers), indexing="ij")
    return tuple(reversed(grids))


@dataclass
class FieldGrid:
    """
    Cell states over interior and ghost cells.

    Attributes:
        geometry: Mesh description
        data: Array of shape (8, *geometry.padded_shape) holding (rho, m, B, E)
    """

    geometry: GridGeometry
    data: np.ndarray

    def __post_init__(self):
        expected = (NVAR,) + self.geometry.padded_shape
        if self.data.shape != expected:
            raise ValueError(f"Field data must have shape {expected}, got {self.data.shape}")

    @classmethod
    def zeros(cls, geometry: GridGeometry) -> "FieldGrid":
        return cls(geometry, np.zeros((NVAR,) + geometry.padded_shape))

    @classmethod
    def from_interior(cls, geometry: GridGeometry, values: np.ndarray) -> "FieldGrid":
        """
        Create a field whose interior holds ``values`` (ghosts left at zero).

        Args:
            geometry: Mesh description
            values: Array of shape (8, *geometry.shape)
        """
        grid = cls.zeros(geometry)
        grid.interior[...] = values
        return grid

    @classmethod
    def uniform(cls, geometry: GridGeometry, state: CellState) -> "FieldGrid":
        """Field holding one state in every cell, ghosts included."""
        data = np.empty((NVAR,) + geometry.padded_shape)
        data[...] = state.to_array().reshape((NVAR,) + (1,) * geometry.dim)
        return cls(geometry, data)

    def copy(self) -> "FieldGrid":
        return FieldGrid(self.geometry, self.data.copy())

    @property
    def interior(self) -> np.ndarray:
        """Writable view of the interior cells, shape (8, *geometry.shape)."""
        return self.data[(slice(None),) + self.geometry.interior]

    def interior_of(self, array: np.ndarray) -> np.ndarray:
        """Interior view of any array shaped (..., *geometry.padded_shape)."""
        return array[(Ellipsis,) + self.geometry.interior]

    @property
    def rho(self) -> np.ndarray:
        return self.data[RHO]

    @property
    def momentum(self) -> np.ndarray:
        return self.data[MX : MX + 3]

    @property
    def magnetic(self) -> np.ndarray:
        return self.data[BX : BX + 3]

    @property
    def energy(self) -> np.ndarray:
        return self.data[ENERGY]

    @property
    def velocity(self) -> np.ndarray:
        return self.data[MX : MX + 3] / self.data[RHO]

    @property
    def euler(self) -> np.ndarray:
        """Copy of the Euler-conserved rows (rho, m, E), shape (5, ...)."""
        return self.data[[RHO, MX, MX + 1, MX + 2, ENERGY]]


@dataclass(frozen=True)
class Periodic:
    """Ghosts wrap around to the opposite side of the domain."""


@dataclass(frozen=True)
class Outflow:
    """Zeroth-order extrapolation: ghosts copy the nearest interior cell."""


@dataclass(frozen=True)
class Reflecting:
    """Mirror across the face, negating the normal components of v and B."""


@dataclass(frozen=True)
class Inflow:
    """Ghosts hold a fixed state."""

    state: CellState


@dataclass(frozen=True)
class MaskedInflow:
    """
    Fixed state where ``mask`` holds on the ghost-cell coordinates, another
    condition elsewhere.

    Attributes:
        mask: Callable receiving coordinate arrays (x, y[, z]) of the ghost
            cells and returning a boolean array of the same shape
        state: Inflow state used where the mask holds
        outside: Condition used where it does not
    """

    mask: Callable[..., np.ndarray]
    state: CellState
    outside: Union[Outflow, Reflecting, Inflow] = Outflow()


BoundaryCondition = Union[Periodic, Outflow, Reflecting, Inflow, MaskedInflow]


@dataclass(frozen=True)
class BoundarySpec:
    """
    Boundary condition per domain face.

    Attributes:
        faces: Mapping from (axis, side) to a condition; every face of the
            grid must be present
    """

    faces: Mapping[tuple[int, Side], BoundaryCondition]

    def __post_init__(self):
        object.__setattr__(self, "faces", dict(self.faces))
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: On missing faces or unpaired periodic faces
        """
        errors = []
        axes = sorted({axis for axis, _ in self.faces})
        for axis in axes:
            for side in SIDES:
                if (axis, side) not in self.faces:
                    errors.append(f"Axis {axis} is missing its {side} face")
            lo = self.faces.get((axis, "lower"))
            hi = self.faces.get((axis, "upper"))
            if isinstance(lo, Periodic) != isinstance(hi, Periodic):
                errors.append(f"Periodic faces must come in opposing pairs (axis {axis})")
        for key, cond in self.faces.items():
            if isinstance(cond, MaskedInflow) and isinstance(cond.outside, (Periodic, MaskedInflow)):
                errors.append(f"Masked inflow on face {key} needs a non-periodic outside condition")
        if errors:
            raise ConfigurationError("Invalid boundary specification:\n" + "\n".join(f"  - {e}" for e in errors))

    @classmethod
    def uniform(cls, condition: BoundaryCondition, dim: int) -> "BoundarySpec":
        """Same condition on every face."""
        return cls({(axis, side): condition for axis in range(dim) for side in SIDES})

    @classmethod
    def periodic(cls, dim: int) -> "BoundarySpec":
        return cls.uniform(Periodic(), dim)

    @classmethod
    def outflow(cls, dim: int) -> "BoundarySpec":
        return cls.uniform(Outflow(), dim)

    @property
    def dim(self) -> int:
        return max(axis for axis, _ in self.faces) + 1

    def with_face(self, axis: int, side: Side, condition: BoundaryCondition) -> "BoundarySpec":
        """Copy of this spec with one face replaced."""
        faces = dict(self.faces)
        faces[(axis, side)] = condition
        return replace(self, faces=faces)

    @property
    def is_periodic(self) -> bool:
        return all(isinstance(c, Periodic) for c in self.faces.values())

    def describe(self) -> str:
        names = []
        for axis in range(self.dim):
            for side in SIDES:
                names.append(f"{'xyz'[axis]}-{side}: {type(self.faces[(axis, side)]).__name__}")
        return ", ".join(names)


def _state_vector(state: CellState, kind: FillKind) -> np.ndarray:
    """Values a fixed state contributes to an array of the given kind."""
    values = state.to_array()
    if kind == "kinematic":
        values[MX : MX + 3] = state.velocity
    return values


def _fill_face(
    data: np.ndarray,
    geom: GridGeometry,
    axis: int,
    side: Side,
    condition: BoundaryCondition,
    kind: FillKind,
) -> None:
    g = geom.ghost
    n = geom.n[axis]
    nd = data.ndim
    ghosts = slice(0, g) if side == "lower" else slice(n + g, n + 2 * g)
    slab = along(nd, axis, ghosts)

    if isinstance(condition, Periodic):
        source = slice(n, n + g) if side == "lower" else slice(g, 2 * g)
        data[slab] = data[along(nd, axis, source)]
    elif isinstance(condition, Outflow):
        nearest = slice(g, g + 1) if side == "lower" else slice(n + g - 1, n + g)
        data[slab] = data[along(nd, axis, nearest)]
    elif isinstance(condition, Reflecting):
        if side == "lower":
            mirror = np.arange(2 * g - 1, g - 1, -1)
        else:
            mirror = np.arange(n + g - 1, n - 1, -1)
        data[slab] = np.take(data, mirror, axis=nd - 1 - axis)
        for row in (MX + axis, BX + axis):
            data[(row,) + along(nd - 1, axis, ghosts)] *= -1.0
    elif isinstance(condition, Inflow):
        data[slab] = _state_vector(condition.state, kind).reshape((NVAR,) + (1,) * geom.dim)
    elif isinstance(condition, MaskedInflow):
        _fill_face(data, geom, axis, side, condition.outside, kind)
        coords = center_mesh(geom, with_ghosts=True)
        spatial = along(geom.dim, axis, ghosts)
        inside = np.asarray(condition.mask(*(c[spatial] for c in coords)), dtype=bool)
        region = data[slab]
        region[:, inside] = _state_vector(condition.state, kind)[:, None]
    else:
        raise ConfigurationError(f"Unknown boundary condition {condition!r}")


def apply_boundaries(field: FieldGrid, spec: BoundarySpec, kind: FillKind = "conserved") -> FieldGrid:
    """
    Fill the ghost layers of ``field`` in place.

    Faces are processed axis by axis (x, then y, then z), each sweep covering
    the full extent of the other axes, so edge and corner ghosts are filled
    consistently and the operation is idempotent.

    Args:
        field: Field whose interior is populated
        spec: Boundary conditions per face
        kind: "conserved" when rows 1-3 hold momentum, "kinematic" when they
            hold velocity (used by the CT substep)

    Returns:
        The same field, for chaining

    Raises:
        ConfigurationError: If spec and geometry disagree or a mirrored or
            wrapped axis is thinner than the ghost width
    """
    geom = field.geometry
    if spec.dim != geom.dim:
        raise ConfigurationError(
            f"Boundary spec is {spec.dim}D but the grid is {geom.dim}D"
        )
    for axis in range(geom.dim):
        for side in SIDES:
            condition = spec.faces[(axis, side)]
            needs_depth = isinstance(condition, (Periodic, Reflecting)) or (
                isinstance(condition, MaskedInflow) and isinstance(condition.outside, Reflecting)
            )
            if needs_depth and geom.n[axis] < geom.ghost:
                raise ConfigurationError(
                    f"{type(condition).__name__} boundary on axis {axis} needs at least "
                    f"{geom.ghost} cells, got {geom.n[axis]}"
                )
            _fill_face(field.data, geom, axis, side, condition, kind)
    return field
