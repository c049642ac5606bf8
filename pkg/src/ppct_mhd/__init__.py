"""
PPCT MHD - positivity-preserving, discretely divergence-free ideal MHD solver.

The ideal MHD equations are split into an Euler part with frozen magnetic
field, advanced by a positivity-preserving MUSCL finite-volume scheme, and a
magnetic part with frozen density and internal energy, advanced by an
implicit constrained-transport finite-difference scheme. Strang splitting
combines them into a second-order step that keeps density and pressure
positive and the central-difference divergence of B at zero.

Basic usage:
    >>> from ppct_mhd import RunConfig, orszag_tang, simulate
    >>> problem = orszag_tang(resolution=(64, 64), t_end=0.5)
    >>> config = RunConfig(t_end=0.5, gas=problem.gas)
    >>> result = simulate(problem, config, out_dir="output/ot64")
    >>> result.final.t
    0.5
"""

from pathlib import Path
from typing import Optional

from .errors import (
    ConfigurationError,
    ConvergenceError,
    InvariantViolationError,
    NonPhysicalStateError,
    PPCTError,
    StepRejectedError,
)
from .core import (
    CellState,
    GasModel,
    GqlDirection,
    PrimitiveState,
    cons_to_prim,
    gql_dot,
    internal_energy,
    is_admissible,
    prim_to_cons,
    sound_speed,
)
from .grid import (
    BoundarySpec,
    FieldGrid,
    GridGeometry,
    Inflow,
    MaskedInflow,
    Outflow,
    Periodic,
    Reflecting,
    apply_boundaries,
)
from .euler_fv import (
    LimiterCoefficients,
    SlopePair,
    WaveSpeeds,
    compute_wave_speeds,
    euler_forward_step,
    euler_ssprk2_step,
    face_lax_friedrichs_flux,
    lax_friedrichs_flux,
    limiter_coefficients,
    pp_limit,
    van_albada_slopes,
)
from .ct_fd import (
    IterationReport,
    MagneticKinematicState,
    contraction_bound,
    ct_rhs,
    ct_solve,
    discrete_curl,
    discrete_divergence,
    electric_field,
    update_energy,
)
from .parameters import RunConfig
from .splitting import RunResult, Snapshot, StepRecord, ppct_step, run, select_dt
from .problems import (
    JET_VARIANTS,
    PROBLEMS,
    ProblemSpec,
    blast,
    build_problem,
    exact_vortex_error,
    jet,
    orszag_tang,
    rotor,
    sedov_mhd,
    shock_cloud,
    smooth_3d,
    vortex,
)
from .diagnostics import (
    convergence_order,
    divergence_report,
    limiter_inactive_fraction,
    mach_number,
    plasma_beta,
    positivity_report,
    scaled_divergence,
    totals,
)
from .config import RunPlan, format_config, load_config, parse_config
from .exporters import export_run, read_snapshot, write_diagnostics, write_manifest, write_snapshot
from .checks import CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    # Main API
    "simulate",
    "run",
    "ppct_step",
    "select_dt",
    "RunConfig",
    "RunResult",
    "Snapshot",
    "StepRecord",
    # Errors
    "PPCTError",
    "ConfigurationError",
    "NonPhysicalStateError",
    "StepRejectedError",
    "ConvergenceError",
    "InvariantViolationError",
    # States and equation of state
    "GasModel",
    "CellState",
    "PrimitiveState",
    "GqlDirection",
    "cons_to_prim",
    "prim_to_cons",
    "internal_energy",
    "is_admissible",
    "gql_dot",
    "sound_speed",
    # Grid
    "GridGeometry",
    "FieldGrid",
    "BoundarySpec",
    "Periodic",
    "Outflow",
    "Reflecting",
    "Inflow",
    "MaskedInflow",
    "apply_boundaries",
    # Euler subsystem
    "WaveSpeeds",
    "SlopePair",
    "LimiterCoefficients",
    "compute_wave_speeds",
    "van_albada_slopes",
    "pp_limit",
    "limiter_coefficients",
    "lax_friedrichs_flux",
    "face_lax_friedrichs_flux",
    "euler_forward_step",
    "euler_ssprk2_step",
    # Magnetic subsystem
    "MagneticKinematicState",
    "IterationReport",
    "electric_field",
    "discrete_curl",
    "discrete_divergence",
    "ct_rhs",
    "ct_solve",
    "contraction_bound",
    "update_energy",
    # Problems
    "ProblemSpec",
    "PROBLEMS",
    "JET_VARIANTS",
    "build_problem",
    "vortex",
    "exact_vortex_error",
    "orszag_tang",
    "rotor",
    "blast",
    "shock_cloud",
    "sedov_mhd",
    "jet",
    "smooth_3d",
    # Diagnostics
    "totals",
    "positivity_report",
    "divergence_report",
    "scaled_divergence",
    "convergence_order",
    "limiter_inactive_fraction",
    "plasma_beta",
    "mach_number",
    "CheckResult",
    "run_checks",
    # Configuration and output
    "RunPlan",
    "parse_config",
    "load_config",
    "format_config",
    "write_snapshot",
    "read_snapshot",
    "write_diagnostics",
    "write_manifest",
    "export_run",
]


def simulate(
    problem: ProblemSpec,
    config: RunConfig,
    out_dir: Optional[str | Path] = None,
) -> RunResult:
    """
    Run a problem and optionally write its output bundle.

    This is the main high-level API function.

    Args:
        problem: Benchmark to run
        config: Run parameters
        out_dir: If given, snapshots, diagnostics and a manifest are written
            there

    Returns:
        RunResult with the snapshots and per-step records
    """
    result = run(problem, config)
    if out_dir is not None:
        export_run(result, RunPlan(problem=problem, config=config, out_dir=Path(out_dir)))
    return result
