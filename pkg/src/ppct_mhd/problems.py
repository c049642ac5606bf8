"""
Benchmark problem library.

Each constructor returns a ProblemSpec holding the mesh, boundary conditions,
gas model, an initial-state function and the final time of the benchmark.
Initial states are sampled at cell centers. Wherever B varies in space it is
built as the central-difference curl of a sampled vector potential, so every
initial field is discretely divergence-free to roundoff.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    ENERGY,
    EULER_ROWS,
    MAGNETIC,
    MOMENTUM,
    NVAR,
    RHO,
    CellState,
    GasModel,
    cons_to_prim,
    prim_to_cons,
    require_admissible,
)
from .ct_fd import discrete_curl
from .errors import ConfigurationError
from .grid import (
    BoundarySpec,
    FieldGrid,
    GridGeometry,
    MaskedInflow,
    Outflow,
    Reflecting,
    Inflow,
    apply_boundaries,
    center_mesh,
)


# Jet magnetizations: plasma beta of the ambient gas -> B0
JET_VARIANTS = {
    "beta-1e-2": math.sqrt(200.0),
    "beta-1e-3": math.sqrt(2000.0),
    "beta-1e-4": math.sqrt(20000.0),
}

# Final time and snapshot times per jet Mach number
JET_TIMES = {
    800.0: (0.001, 0.0015, 0.002),
    2000.0: (0.00025, 0.0005, 0.00075),
    10000.0: (0.00005, 0.0001, 0.00015),
}

VORTEX_EXTREME_MU = 5.389489439


@dataclass
class ProblemSpec:
    """
    A benchmark: mesh, boundaries, gas and initial data.

    Attributes:
        name: Stable CLI identifier
        geometry: Mesh
        boundary: Boundary condition per face
        gas: Equation of state
        initial: Function of the geometry returning interior cell states,
            shape (8, *geometry.shape)
        t_end: Final time of the benchmark
        exact: Optional function (geometry, t) -> cell states of the exact
            solution at cell centers
        snapshot_times: Default snapshot times
        parameters: Problem parameters, echoed into run manifests
    """

    name: str
    geometry: GridGeometry
    boundary: BoundarySpec
    gas: GasModel
    initial: Callable[[GridGeometry], np.ndarray]
    t_end: float
    exact: Optional[Callable[[GridGeometry, float], np.ndarray]] = None
    snapshot_times: tuple[float, ...] = ()
    parameters: dict = field(default_factory=dict)

    def initial_field(self) -> FieldGrid:
        """
        Sample the initial data and fill the ghost layers.

        Raises:
            NonPhysicalStateError: If any initial cell is inadmissible
        """
        grid = FieldGrid.from_interior(self.geometry, self.initial(self.geometry))
        require_admissible(grid.interior_of(grid.euler), f"initial state of '{self.name}'")
        return apply_boundaries(grid, self.boundary)

    def with_gas(self, gas: GasModel) -> "ProblemSpec":
        """
        The same problem under another equation of state.

        Density, velocity, field and pressure of the initial data, the exact
        solution and every fixed inflow state are kept; E is recomputed.
        """
        if gas == self.gas:
            return self
        old = self.gas
        rows = list(EULER_ROWS)

        def convert(cells: np.ndarray) -> np.ndarray:
            out = np.array(cells, dtype=float)
            out[rows] = prim_to_cons(cons_to_prim(out[rows], old), gas)
            return out

        def restate(condition):
            if isinstance(condition, (Inflow, MaskedInflow)):
                return replace(condition, state=CellState.from_array(convert(condition.state.to_array())))
            return condition

        source, exact = self.initial, self.exact
        return replace(
            self,
            gas=gas,
            initial=lambda g: convert(source(g)),
            exact=None if exact is None else (lambda g, t: convert(exact(g, t))),
            boundary=BoundarySpec({key: restate(c) for key, c in self.boundary.faces.items()}),
        )

    def summary(self) -> str:
        lines = [f"Problem: {self.name}", self.geometry.summary()]
        lines.append(f"Boundaries: {self.boundary.describe()}")
        lines.append(f"Gamma: {self.gas.gamma:.6g}, t_end: {self.t_end:g}")
        for key, value in self.parameters.items():
            lines.append(f"  {key} = {value:g}" if isinstance(value, float) else f"  {key} = {value}")
        return "\n".join(lines)


def _cells(
    geom: GridGeometry,
    gas: GasModel,
    rho,
    v: Sequence,
    B: Sequence,
    p,
) -> np.ndarray:
    """Interior cell states from (possibly scalar) primitive fields."""
    shape = geom.shape
    rho = np.broadcast_to(np.asarray(rho, dtype=float), shape)
    vel = np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in v])
    mag = np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in B])
    p = np.broadcast_to(np.asarray(p, dtype=float), shape)
    cells = np.empty((NVAR,) + shape)
    cells[RHO] = rho
    cells[MOMENTUM] = rho * vel
    cells[MAGNETIC] = mag
    cells[ENERGY] = p / (gas.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=0)
    return cells


def curl_of_potential(potential: np.ndarray, geom: GridGeometry) -> np.ndarray:
    """
    Central-difference curl of a periodic vector potential sampled at centers.

    Args:
        potential: Interior samples, shape (3, *geom.shape)
        geom: Mesh (treated as periodic)

    Returns:
        Interior field of shape (3, *geom.shape) whose central-difference
        divergence vanishes to roundoff
    """
    g = geom.ghost
    padded = np.pad(potential, [(0, 0)] + [(g, g)] * geom.dim, mode="wrap")
    curl = discrete_curl(padded, geom)
    return curl[(slice(None),) + geom.interior]


def _wrap(x: np.ndarray, lower: float, upper: float) -> np.ndarray:
    return lower + np.mod(x - lower, upper - lower)


def _vortex_profile(x: np.ndarray, y: np.ndarray, mu: float) -> dict:
    r2 = x * x + y * y
    bump = np.exp(0.5 * (1.0 - r2))
    return {
        "dv": (mu / (math.sqrt(2.0) * math.pi)) * bump * np.stack([-y, x]),
        "dB": (mu / (2.0 * math.pi)) * bump * np.stack([-y, x]),
        "dp": -(mu * mu) * (1.0 + r2) / (8.0 * math.pi**2) * np.exp(1.0 - r2),
        "potential": (mu / (2.0 * math.pi)) * bump,
    }


def vortex_exact(geom: GridGeometry, t: float, mu: float) -> dict:
    """
    Exact vortex solution at cell centers: the initial profile advected by (1, 1).

    Returns:
        Dict with "v" (2, ...) and "B" (2, ...) in-plane components and "p"
    """
    x, y = center_mesh(geom)
    x0 = _wrap(x - t, geom.lower[0], geom.upper[0])
    y0 = _wrap(y - t, geom.lower[1], geom.upper[1])
    prof = _vortex_profile(x0, y0, mu)
    return {"v": 1.0 + prof["dv"], "B": prof["dB"], "p": 1.0 + prof["dp"]}


def vortex(mu: float = 1.0, resolution: Sequence[int] = (64, 64)) -> ProblemSpec:
    """
    Smooth isentropic vortex advected diagonally through a periodic box.

    The state is (1, 1 + dv1, 1 + dv2, 0, dB1, dB2, 0, 1 + dp) with
    Gaussian perturbations of strength mu. For mu = 5.389489439 the central
    pressure drops to about 5.3e-12.

    Args:
        mu: Vortex strength
        resolution: Cells per axis on [-10, 10]^2

    Notes:
        dB is the central-difference curl of A_z = mu / (2 pi) exp((1 - r^2)/2),
        a second-order sample of the analytic profile that is exactly
        divergence-free under the solver's stencil.
    """
    geom = GridGeometry(tuple(resolution), (-10.0, -10.0), (10.0, 10.0))
    gas = GasModel(5.0 / 3.0)

    def initial(g: GridGeometry) -> np.ndarray:
        x, y = center_mesh(g)
        prof = _vortex_profile(x, y, mu)
        potential = np.zeros((3,) + g.shape)
        potential[2] = prof["potential"]
        B = curl_of_potential(potential, g)
        v = (1.0 + prof["dv"][0], 1.0 + prof["dv"][1], 0.0)
        return _cells(g, gas, 1.0, v, B, 1.0 + prof["dp"])

    def exact(g: GridGeometry, t: float) -> np.ndarray:
        sol = vortex_exact(g, t, mu)
        v = (sol["v"][0], sol["v"][1], 0.0)
        B = (sol["B"][0], sol["B"][1], 0.0)
        return _cells(g, gas, 1.0, v, B, sol["p"])

    return ProblemSpec(
        name="vortex",
        geometry=geom,
        boundary=BoundarySpec.periodic(2),
        gas=gas,
        initial=initial,
        t_end=0.05,
        exact=exact,
        parameters={"mu": float(mu)},
    )


@dataclass(frozen=True)
class ErrorNorms:
    """Discrete l1 (mean), l2 (root-mean-square) and l-infinity (max) norms."""

    l1: float
    l2: float
    linf: float

    @classmethod
    def of(cls, magnitude: np.ndarray) -> "ErrorNorms":
        m = np.abs(np.asarray(magnitude, dtype=float))
        return cls(float(np.mean(m)), float(np.sqrt(np.mean(m * m))), float(np.max(m)))


@dataclass(frozen=True)
class VortexErrors:
    """Error norms of the in-plane B and v against the exact vortex."""

    B: ErrorNorms
    v: ErrorNorms


def exact_vortex_error(field: FieldGrid, t: float, mu: float) -> VortexErrors:
    """
    Pointwise errors of B and v against the advected vortex.

    Differences are taken at cell centers over interior cells; the magnitude
    of the two in-plane components is used for each vector field.
    """
    sol = vortex_exact(field.geometry, t, mu)
    cells = field.interior
    v = cells[MOMENTUM][:2] / cells[RHO]
    B = cells[MAGNETIC][:2]
    return VortexErrors(
        B=ErrorNorms.of(np.sqrt(np.sum((B - sol["B"]) ** 2, axis=0))),
        v=ErrorNorms.of(np.sqrt(np.sum((v - sol["v"]) ** 2, axis=0))),
    )


def orszag_tang(resolution: Sequence[int] = (400, 400), t_end: float = 4.0) -> ProblemSpec:
    """
    Orszag-Tang vortex: (gamma^2, -sin y, sin x, 0, -sin y, sin 2x, 0, gamma)
    on the periodic box [0, 2 pi]^2.

    Snapshots are taken at t = 2 and 3 before t_end; the pressure comes
    closest to zero shortly before t = 4.
    """
    geom = GridGeometry(tuple(resolution), (0.0, 0.0), (2.0 * math.pi, 2.0 * math.pi))
    gas = GasModel(5.0 / 3.0)
    gamma = gas.gamma

    def initial(g: GridGeometry) -> np.ndarray:
        x, y = center_mesh(g)
        return _cells(
            g,
            gas,
            gamma**2,
            (-np.sin(y), np.sin(x), 0.0),
            (-np.sin(y), np.sin(2.0 * x), 0.0),
            gamma,
        )

    return ProblemSpec(
        name="orszag-tang",
        geometry=geom,
        boundary=BoundarySpec.periodic(2),
        gas=gas,
        initial=initial,
        t_end=t_end,
        snapshot_times=tuple(t for t in (2.0, 3.0, 4.0) if t < t_end),
    )


def rotor(resolution: Sequence[int] = (400, 400)) -> ProblemSpec:
    """
    Rapidly rotating dense disk in a uniformly magnetized gas.

    Inside r1 = 0.1 the disk has density 10 and angular velocity 1/r1, a taper
    phi = (r2 - r) / (r2 - r1) blends to the ambient state up to r2 = 0.115.
    """
    r1, r2 = 0.1, 0.115
    geom = GridGeometry(tuple(resolution), (0.0, 0.0), (1.0, 1.0))
    gas = GasModel(5.0 / 3.0)
    b0 = 2.5 / math.sqrt(4.0 * math.pi)

    def initial(g: GridGeometry) -> np.ndarray:
        x, y = center_mesh(g)
        dx, dy = x - 0.5, y - 0.5
        r = np.sqrt(dx * dx + dy * dy)
        disk = r <= r1
        taper = (r > r1) & (r <= r2)
        phi = (r2 - r) / (r2 - r1)
        safe_r = np.where(r > 0.0, r, 1.0)
        rho = np.where(disk, 10.0, np.where(taper, 1.0 + 9.0 * phi, 1.0))
        vx = np.where(disk, -dy / r1, np.where(taper, -phi * dy / safe_r, 0.0))
        vy = np.where(disk, dx / r1, np.where(taper, phi * dx / safe_r, 0.0))
        return _cells(g, gas, rho, (vx, vy, 0.0), (b0, 0.0, 0.0), 0.5)

    return ProblemSpec(
        name="rotor",
        geometry=geom,
        boundary=BoundarySpec.outflow(2),
        gas=gas,
        initial=initial,
        t_end=0.295,
        parameters={"r1": r1, "r2": r2},
    )


def blast(resolution: Sequence[int] = (400, 400), p0: float = 1000.0) -> ProblemSpec:
    """
    Strongly magnetized blast wave: p = p0 inside r <= 0.1, 0.1 outside,
    B = (100 / sqrt(4 pi), 0, 0), giving an ambient plasma beta of about 2.51e-4.
    """
    geom = GridGeometry(tuple(resolution), (-0.5, -0.5), (0.5, 0.5))
    gas = GasModel(1.4)
    b0 = 100.0 / math.sqrt(4.0 * math.pi)

    def initial(g: GridGeometry) -> np.ndarray:
        x, y = center_mesh(g)
        p = np.where(np.sqrt(x * x + y * y) <= 0.1, p0, 0.1)
        return _cells(g, gas, 1.0, (0.0, 0.0, 0.0), (b0, 0.0, 0.0), p)

    return ProblemSpec(
        name="blast",
        geometry=geom,
        boundary=BoundarySpec.outflow(2),
        gas=gas,
        initial=initial,
        t_end=0.01,
        parameters={"p0": float(p0), "B0": b0},
    )


SHOCK_CLOUD_LEFT = (3.86859, (0.0, 0.0, 0.0), (0.0, 2.1826182, -2.1826182), 167.345)
SHOCK_CLOUD_RIGHT = (1.0, (-11.2536, 0.0, 0.0), (0.0, 0.56418958, 0.56418958), 1.0)


def shock_cloud(resolution: Sequence[int] = (400, 400)) -> ProblemSpec:
    """
    Strong shock at x = 0.6 running into a density-10 cloud of radius 0.15
    centered at (0.8, 0.5). The right face feeds the post-cloud state in.
    """
    geom = GridGeometry(tuple(resolution), (0.0, 0.0), (1.0, 1.0))
    gas = GasModel(5.0 / 3.0)
    right_state = CellState.from_primitive(
        SHOCK_CLOUD_RIGHT[0], SHOCK_CLOUD_RIGHT[1], SHOCK_CLOUD_RIGHT[2], SHOCK_CLOUD_RIGHT[3], gas
    )

    def initial(g: GridGeometry) -> np.ndarray:
        x, y = center_mesh(g)
        left = x < 0.6
        cloud = (x - 0.8) ** 2 + (y - 0.5) ** 2 < 0.15**2

        def pick(a: float, b: float) -> np.ndarray:
            return np.where(left, a, b)

        rho = np.where(cloud & ~left, 10.0, pick(SHOCK_CLOUD_LEFT[0], SHOCK_CLOUD_RIGHT[0]))
        v = tuple(pick(a, b) for a, b in zip(SHOCK_CLOUD_LEFT[1], SHOCK_CLOUD_RIGHT[1]))
        B = tuple(pick(a, b) for a, b in zip(SHOCK_CLOUD_LEFT[2], SHOCK_CLOUD_RIGHT[2]))
        p = pick(SHOCK_CLOUD_LEFT[3], SHOCK_CLOUD_RIGHT[3])
        return _cells(g, gas, rho, v, B, p)

    boundary = BoundarySpec.outflow(2).with_face(0, "upper", Inflow(right_state))
    return ProblemSpec(
        name="shock-cloud",
        geometry=geom,
        boundary=boundary,
        gas=gas,
        initial=initial,
        t_end=0.06,
    )


def sedov_mhd(resolution: Sequence[int] = (400, 400)) -> ProblemSpec:
    """
    Point explosion in a magnetized gas at rest.

    (rho, v, B) = (1, 0, 0, 0, 1, 1, 0) and E = 2.5e-5 everywhere except the
    cell containing the origin, which receives E = 0.244816 / (dx dy). Cells
    are half-open [x_{i-1/2}, x_{i+1/2}), so on even grids the deposit lands
    in the cell whose lower corner is the origin.
    """
    geom = GridGeometry(tuple(resolution), (-1.0, -1.0), (1.0, 1.0))
    gas = GasModel(1.4)

    def initial(g: GridGeometry) -> np.ndarray:
        cells = _cells(g, gas, 1.0, (0.0, 0.0, 0.0), (1.0, 1.0, 0.0), 0.0)
        cells[ENERGY] = 2.5e-5
        i, j = sedov_origin_cell(g)
        cells[ENERGY][j, i] = 0.244816 / (g.dx * g.dy)
        return cells

    return ProblemSpec(
        name="sedov",
        geometry=geom,
        boundary=BoundarySpec.outflow(2),
        gas=gas,
        initial=initial,
        t_end=0.4,
    )


def sedov_origin_cell(geom: GridGeometry) -> tuple[int, int]:
    """Index (i, j) of the cell containing the origin."""
    return tuple(
        int(min(max(math.floor((0.0 - geom.lower[a]) / geom.spacing[a]), 0), geom.n[a] - 1))
        for a in range(2)
    )


def _jet_nozzle(x: np.ndarray, *_: np.ndarray) -> np.ndarray:
    return np.abs(x) < 0.05


def jet(
    mach: float = 800.0,
    b0: float = math.sqrt(200.0),
    resolution: Optional[Sequence[int]] = None,
    full_domain: bool = False,
) -> ProblemSpec:
    """
    High Mach number magnetized jet entering through the bottom face.

    The ambient gas is (0.1 gamma, 0, 0, 0, 0, B0, 0, 1) and the nozzle
    |x| < 0.05 injects (gamma, 0, mach, 0, 0, B0, 0, 1). By default only the
    right half [0, 0.5] x [0, 1.5] is computed with a reflecting left face;
    full_domain=True computes [-0.5, 0.5] x [0, 1.5] with outflow on both
    sides instead.

    Args:
        mach: Inlet speed
        b0: Magnetic field strength (see JET_VARIANTS)
        resolution: Cells per axis (defaults to 500 x 1500 for the half domain)
        full_domain: Compute the symmetric full domain
    """
    if mach <= 0.0:
        raise ConfigurationError(f"Jet Mach number must be positive, got {mach}")
    gas = GasModel(1.4)
    gamma = gas.gamma
    lower_x = -0.5 if full_domain else 0.0
    if resolution is None:
        resolution = (1000, 1500) if full_domain else (500, 1500)
    geom = GridGeometry(tuple(resolution), (lower_x, 0.0), (0.5, 1.5))

    inlet = CellState.from_primitive(gamma, (0.0, mach, 0.0), (0.0, b0, 0.0), 1.0, gas)
    boundary = BoundarySpec.outflow(2).with_face(1, "lower", MaskedInflow(_jet_nozzle, inlet, Outflow()))
    if not full_domain:
        boundary = boundary.with_face(0, "lower", Reflecting())

    def initial(g: GridGeometry) -> np.ndarray:
        return _cells(g, gas, 0.1 * gamma, (0.0, 0.0, 0.0), (0.0, b0, 0.0), 1.0)

    times = JET_TIMES.get(float(mach))
    if times is None:
        # scale the Mach-800 schedule by the inlet speed
        times = tuple(t * 800.0 / mach for t in JET_TIMES[800.0])
    return ProblemSpec(
        name="jet",
        geometry=geom,
        boundary=boundary,
        gas=gas,
        initial=initial,
        t_end=times[-1],
        snapshot_times=times[:-1],
        parameters={"mach": float(mach), "b0": float(b0), "full_domain": bool(full_domain)},
    )


def smooth_3d(resolution: Sequence[int] = (16, 16, 16), amplitude: float = 0.2) -> ProblemSpec:
    """
    Periodic 3D uniform state plus smooth perturbations on [0, 2 pi]^3.

    B is a uniform field plus the central-difference curl of a sinusoidal
    vector potential, so the field is exactly divergence-free on the grid.
    """
    two_pi = 2.0 * math.pi
    geom = GridGeometry(tuple(resolution), (0.0, 0.0, 0.0), (two_pi, two_pi, two_pi))
    gas = GasModel(5.0 / 3.0)
    a = float(amplitude)

    def initial(g: GridGeometry) -> np.ndarray:
        x, y, z = center_mesh(g)
        potential = a * np.stack([np.sin(z), np.sin(x), np.sin(y)])
        B = curl_of_potential(potential, g)
        B[0] += 1.0
        B[1] += 0.5
        B[2] += 0.25
        rho = 1.0 + a * np.sin(x + y + z)
        v = (0.5 + a * np.sin(y), 0.5 + a * np.sin(z), 0.5 + a * np.sin(x))
        p = 1.0 + 0.5 * a * np.cos(x + y + z)
        return _cells(g, gas, rho, v, B, p)

    return ProblemSpec(
        name="smooth-3d",
        geometry=geom,
        boundary=BoundarySpec.periodic(3),
        gas=gas,
        initial=initial,
        t_end=0.1,
        parameters={"amplitude": a},
    )


PROBLEMS: dict[str, Callable[..., ProblemSpec]] = {
    "vortex": vortex,
    "orszag-tang": orszag_tang,
    "rotor": rotor,
    "blast": blast,
    "shock-cloud": shock_cloud,
    "sedov": sedov_mhd,
    "jet": jet,
    "smooth-3d": smooth_3d,
}


# Keywords each problem accepts beyond its resolution
PROBLEM_PARAMETERS: dict[str, tuple[str, ...]] = {
    "vortex": ("mu",),
    "jet": ("mach", "b0", "full_domain"),
}


def build_problem(name: str, resolution: Optional[Sequence[int]] = None, **params) -> ProblemSpec:
    """
    Construct a problem by its CLI identifier.

    Args:
        name: One of PROBLEMS
        resolution: Cells per axis; the problem's default when None
        params: Problem-specific keywords (mu for vortex, mach/b0/full_domain
            for jet)

    Raises:
        ConfigurationError: For unknown names or parameters the problem does
            not take
    """
    if name not in PROBLEMS:
        raise ConfigurationError(f"Unknown problem '{name}'; choose from {', '.join(PROBLEMS)}")
    accepted = set(PROBLEM_PARAMETERS.get(name, ()))
    unknown = set(params) - accepted
    if unknown:
        raise ConfigurationError(f"Problem '{name}' does not take {', '.join(sorted(unknown))}")
    if resolution is not None:
        params["resolution"] = tuple(resolution)
    return PROBLEMS[name](**params)
