"""
Export functions for run output.

Snapshots and diagnostics are plain ASCII tables with a single '#' header
line; values are written with 17 significant digits so a snapshot read back
reproduces the field to double precision.
"""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import RunPlan, format_config
from .core import ENERGY, MAGNETIC, MOMENTUM, NVAR, RHO, GasModel
from .ct_fd import discrete_divergence
from .diagnostics import pressure
from .grid import BoundarySpec, FieldGrid, GridGeometry, apply_boundaries, center_mesh
from .splitting import RunResult, StepRecord

SNAPSHOT_COLUMNS = ("rho", "vx", "vy", "vz", "Bx", "By", "Bz", "p", "E", "divB")
NUMBER_FORMAT = "%.17e"


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def snapshot_table(field: FieldGrid, gas: GasModel) -> np.ndarray:
    """
    Rows of a snapshot: x y [z] rho vx vy vz Bx By Bz p E divB per interior cell.

    Rows are ordered x-fastest. divB uses the current ghost layers, so they
    must be filled.
    """
    geom = field.geometry
    cells = field.interior
    coords = [c.ravel() for c in center_mesh(geom)]
    div = field.interior_of(discrete_divergence(field.magnetic, geom))
    columns = [
        cells[RHO],
        *(cells[MOMENTUM] / cells[RHO]),
        *cells[MAGNETIC],
        pressure(field, gas),
        cells[ENERGY],
        div,
    ]
    return np.column_stack(coords + [np.ravel(c) for c in columns])


def write_snapshot(
    field: FieldGrid,
    t: float,
    path: str | Path,
    gas: GasModel,
    spec: Optional[BoundarySpec] = None,
) -> Path:
    """
    Write a field snapshot as an ASCII table.

    Args:
        field: Field to write (ghosts filled, or spec given)
        t: Time of the snapshot
        path: Output file
        gas: Equation of state for the pressure column
        spec: Boundary conditions used to refill ghosts on a copy first

    Returns:
        Path of the written file

    Raises:
        OSError: If the file cannot be written; the message names the path

    Example:
        >>> write_snapshot(field, 0.5, "output/snapshot_1.txt", GasModel())
        PosixPath('output/snapshot_1.txt')
    """
    if spec is not None:
        field = apply_boundaries(field.copy(), spec)
    table = snapshot_table(field, gas)
    names = ["x", "y", "z"][: field.geometry.dim] + list(SNAPSHOT_COLUMNS)
    header = f"t = {float(t)!r} | " + " ".join(names)
    path = Path(path)
    try:
        np.savetxt(_prepare(path), table, fmt=NUMBER_FORMAT, header=header, comments="# ")
    except OSError as exc:
        raise OSError(f"Cannot write snapshot {path}: {exc}") from exc
    return path


def _axis_from_centers(centers: np.ndarray, name: str) -> tuple[int, float, float]:
    values = np.unique(centers)
    if values.size < 2:
        raise ValueError(f"Cannot infer the {name} spacing from a single cell; pass the geometry")
    h = (values[-1] - values[0]) / (values.size - 1)
    return values.size, float(values[0] - 0.5 * h), float(values[-1] + 0.5 * h)


def read_snapshot(path: str | Path, geometry: Optional[GridGeometry] = None) -> tuple[FieldGrid, float]:
    """
    Read a snapshot written by write_snapshot.

    Args:
        path: Snapshot file
        geometry: Mesh of the snapshot; inferred from the coordinate columns
            when omitted

    Returns:
        (field, t). Ghost layers are zero and must be filled before use.

    Raises:
        ValueError: If the header or the table does not match the format
    """
    path = Path(path)
    with path.open() as fh:
        header = fh.readline()
    if not header.startswith("#") or "|" not in header:
        raise ValueError(f"{path} is not a snapshot file (bad header)")
    stamp, names = header.lstrip("# ").split("|", 1)
    try:
        t = float(stamp.split("=", 1)[1])
    except (IndexError, ValueError):
        raise ValueError(f"{path}: cannot read the snapshot time from '{stamp.strip()}'") from None
    dim = len(names.split()) - len(SNAPSHOT_COLUMNS)
    if dim not in (2, 3):
        raise ValueError(f"{path}: unexpected column layout '{names.strip()}'")

    table = np.loadtxt(path, ndmin=2)
    if geometry is None:
        axes = [_axis_from_centers(table[:, a], "xyz"[a]) for a in range(dim)]
        geometry = GridGeometry(
            tuple(a[0] for a in axes),
            tuple(a[1] for a in axes),
            tuple(a[2] for a in axes),
        )
    if geometry.dim != dim or table.shape[0] != geometry.num_cells:
        raise ValueError(f"{path}: table does not match geometry {geometry.n}")

    shape = geometry.shape
    column = {name: table[:, dim + k].reshape(shape) for k, name in enumerate(SNAPSHOT_COLUMNS)}
    cells = np.empty((NVAR,) + shape)
    cells[RHO] = column["rho"]
    cells[MOMENTUM] = column["rho"] * np.stack([column["vx"], column["vy"], column["vz"]])
    cells[MAGNETIC] = np.stack([column["Bx"], column["By"], column["Bz"]])
    cells[ENERGY] = column["E"]
    return FieldGrid.from_interior(geometry, cells), t


def write_diagnostics(records: Sequence[StepRecord], path: str | Path) -> Path:
    """
    Write the per-step diagnostics table.

    Columns are t dt ct_iters min_rho min_p max_divB mass total_energy; a run
    without steps gives a header-only file.
    """
    path = _prepare(path)
    formats = [NUMBER_FORMAT, NUMBER_FORMAT, "%d"] + [NUMBER_FORMAT] * 5
    with path.open("w") as fh:
        fh.write("# " + " ".join(StepRecord.COLUMNS) + "\n")
        if records:
            np.savetxt(fh, np.array([r.as_row() for r in records], dtype=float), fmt=formats)
    return path


def write_manifest(plan: RunPlan, path: str | Path) -> Path:
    """Write the resolved configuration; `ppct run --config` on it repeats the run."""
    path = _prepare(path)
    path.write_text(format_config(plan, comment="ppct run manifest"))
    return path


def export_run(result: RunResult, plan: RunPlan, out_dir: Optional[str | Path] = None) -> dict[str, Path]:
    """
    Write every artifact of a finished run.

    Creates snapshot_<k>.txt per snapshot, diagnostics.txt and manifest.cfg.

    Args:
        result: Output of splitting.run
        plan: Plan the run was made from
        out_dir: Target directory (defaults to plan.out_dir)

    Returns:
        Dictionary mapping artifact names ("snapshot_0", ..., "diagnostics",
        "manifest") to file paths
    """
    out_dir = Path(out_dir if out_dir is not None else plan.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    output_files = {}
    gas = result.config.gas
    for k, snap in enumerate(result.snapshots):
        name = f"snapshot_{k}"
        output_files[name] = write_snapshot(snap.field, snap.t, out_dir / f"{name}.txt", gas, result.problem.boundary)
    output_files["diagnostics"] = write_diagnostics(result.records, out_dir / "diagnostics.txt")
    output_files["manifest"] = write_manifest(plan, out_dir / "manifest.cfg")
    return output_files
