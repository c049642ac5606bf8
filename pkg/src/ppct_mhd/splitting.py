"""
PPCT time stepping.

One step is the Strang composition

    U^{n+1} = S_A(dt/2) o S_B(dt) o S_A(dt/2) U^n

of the positivity-preserving Euler operator S_A (SSP-RK2) and the implicit
constrained-transport operator S_B. dt is chosen once per step from the
step-start field; a stage CFL violation or a CT convergence failure anywhere
inside the step rejects the whole step, which is retried with dt halved.
"""

import logging
import warnings as warn_module
from dataclasses import dataclass, field
from typing import Callable, Optional

from .ct_fd import IterationReport, ct_solve
from .diagnostics import divergence_report, positivity_report, scaled_divergence, totals
from .errors import ConfigurationError, ConvergenceError, InvariantViolationError, StepRejectedError
from .euler_fv import compute_wave_speeds, euler_ssprk2_step
from .grid import BoundarySpec, FieldGrid, apply_boundaries
from .parameters import RunConfig
from .problems import ProblemSpec

logger = logging.getLogger(__name__)

# Relative divergence above which an initial field is reported as not DDF
INITIAL_DIVERGENCE_TOL = 1e-12


@dataclass
class StepRecord:
    """
    Diagnostics of one accepted step.

    Attributes:
        t: Time after the step
        dt: Step size actually taken
        ct_iterations: Fixed-point sweeps of the CT substep
        min_rho: Interior minimum density after the step
        min_p: Interior minimum pressure after the step
        max_abs_divB: Max-norm of the discrete divergence after the step
        total_mass: Interior sum of rho
        total_energy: Interior sum of E + |B|^2 / 2
        halvings: How often dt was halved before the step was accepted
        ct_history: CT error after every sweep
        contraction: CT contraction bound of the step
    """

    t: float
    dt: float
    ct_iterations: int
    min_rho: float
    min_p: float
    max_abs_divB: float
    total_mass: float
    total_energy: float
    halvings: int = 0
    ct_history: list[float] = field(default_factory=list)
    contraction: Optional[float] = None

    COLUMNS = ("t", "dt", "ct_iters", "min_rho", "min_p", "max_divB", "mass", "total_energy")

    def as_row(self) -> tuple:
        return (
            self.t,
            self.dt,
            self.ct_iterations,
            self.min_rho,
            self.min_p,
            self.max_abs_divB,
            self.total_mass,
            self.total_energy,
        )


@dataclass
class Snapshot:
    """Field at an output time."""

    t: float
    field: FieldGrid


@dataclass
class RunResult:
    """Snapshots and step records of a run."""

    problem: ProblemSpec
    config: RunConfig
    snapshots: list[Snapshot]
    records: list[StepRecord]

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def mean_ct_iterations(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.ct_iterations for r in self.records) / len(self.records)

    @property
    def max_ct_iterations(self) -> int:
        return max((r.ct_iterations for r in self.records), default=0)


def select_dt(
    field: FieldGrid,
    config: RunConfig,
    spec: Optional[BoundarySpec] = None,
    t: float = 0.0,
    t_next: Optional[float] = None,
) -> float:
    """
    Time step safety * cfl / sum_a(alpha_a / d_a), clipped to reach t_next.

    Args:
        field: Step-start field (ghosts filled, or spec given)
        config: Run parameters
        spec: Boundary conditions used to refill ghosts on a copy first
        t: Current time
        t_next: Next output time; dt never steps past it

    Raises:
        ConfigurationError: If every wave speed is zero

    Example:
        alpha = (1, 1), dx = dy = 0.01, q = 3 gives dt = (2/3) / 200 = 1/300.
    """
    work = apply_boundaries(field.copy(), spec) if spec is not None else field
    speeds = compute_wave_speeds(work, config.gas)
    rate = speeds.rate
    if not rate > 0.0:
        raise ConfigurationError("All wave speeds vanish; no time step can be selected")
    dt = config.safety * config.cfl / rate
    if t_next is not None:
        dt = min(dt, t_next - t)
    return dt


def _strang_step(
    field: FieldGrid,
    dt: float,
    config: RunConfig,
    spec: BoundarySpec,
) -> tuple[FieldGrid, IterationReport]:
    options = {"pp_limiter": config.pp_limiter, "limiter_eps": config.limiter_eps}
    half = 0.5 * dt
    first = euler_ssprk2_step(field, half, spec, config.q, config.gas, **options)
    middle, report = ct_solve(first, dt, spec, config.eps_tol, config.max_ct_iter)
    last = euler_ssprk2_step(middle, half, spec, config.q, config.gas, **options)
    return apply_boundaries(last, spec), report


def ppct_step(
    field: FieldGrid,
    dt: float,
    config: RunConfig,
    spec: BoundarySpec,
    t: float = 0.0,
) -> tuple[FieldGrid, StepRecord]:
    """
    One Strang-split PPCT step with reject-and-halve on failure.

    Args:
        field: Step-start field
        dt: Step size, normally from select_dt
        config: Run parameters
        spec: Boundary conditions
        t: Time at the start of the step (recorded only)

    Returns:
        (new field with filled ghosts, record of the accepted step)

    Raises:
        StepRejectedError: If the stage CFL still fails after
            config.max_halvings halvings
        ConvergenceError: If the CT solve still fails after the halvings
        InvariantViolationError: If the accepted step is not positive
    """
    attempt = dt
    halvings = 0
    while True:
        try:
            new_field, report = _strang_step(field, attempt, config, spec)
            break
        except (StepRejectedError, ConvergenceError) as exc:
            if halvings >= config.max_halvings:
                logger.error("Step at t=%.6e failed after %d halvings: %s", t, halvings, exc)
                raise
            logger.warning("Step at t=%.6e rejected with dt=%.6e (%s); retrying with dt/2", t, attempt, exc)
            attempt *= 0.5
            halvings += 1

    positivity = positivity_report(new_field, config.gas)
    if not positivity.positive:
        raise InvariantViolationError(
            f"Accepted step lost positivity: min rho {positivity.min_rho:.3e} at {positivity.argmin_rho}, "
            f"min p {positivity.min_p:.3e} at {positivity.argmin_p}"
        )
    sums = totals(new_field)
    record = StepRecord(
        t=t + attempt,
        dt=attempt,
        ct_iterations=report.iterations,
        min_rho=positivity.min_rho,
        min_p=positivity.min_p,
        max_abs_divB=divergence_report(new_field).max_abs,
        total_mass=sums.mass,
        total_energy=sums.total_energy,
        halvings=halvings,
        ct_history=list(report.history),
        contraction=report.contraction,
    )
    return new_field, record


def check_initial_field(field: FieldGrid, spec: BoundarySpec, name: str = "field") -> float:
    """
    Warn when an initial field is not discretely divergence-free.

    Returns:
        The scaled divergence max|div B| * min(d) / |B|_inf
    """
    scaled = scaled_divergence(field, spec)
    if scaled > INITIAL_DIVERGENCE_TOL:
        message = (
            f"Initial field of '{name}' has scaled discrete divergence {scaled:.3e}; "
            "the divergence is preserved, not removed"
        )
        logger.warning(message)
        warn_module.warn(message, UserWarning)
    return scaled


def run(
    problem: ProblemSpec,
    config: RunConfig,
    on_step: Optional[Callable[[StepRecord], None]] = None,
) -> RunResult:
    """
    Advance a problem from t = 0 to config.t_end.

    Snapshots are taken at t = 0 and at every time in config.output_times;
    steps are clipped to land on them exactly. The loop has no randomness, so
    identical inputs give bitwise-identical results.

    Args:
        problem: Benchmark to run
        config: Run parameters
        on_step: Called with every accepted StepRecord

    Returns:
        RunResult with snapshots and per-step records
    """
    spec = problem.boundary
    state = problem.initial_field()
    check_initial_field(state, spec, problem.name)
    logger.info(
        "Running %s on %s cells to t=%g (q=%g, cfl=%.4g)",
        problem.name,
        "x".join(str(n) for n in problem.geometry.n),
        config.t_end,
        config.q,
        config.cfl,
    )

    snapshots = [Snapshot(0.0, state.copy())]
    records: list[StepRecord] = []
    t = 0.0
    for target in (time for time in config.output_times if time > 0.0):
        while t < target:
            dt = select_dt(state, config, t=t, t_next=target)
            state, record = ppct_step(state, dt, config, spec, t=t)
            if record.dt == dt and (dt == target - t or t + dt >= target):
                t = target
            else:
                t = t + record.dt
            record.t = t
            records.append(record)
            if on_step is not None:
                on_step(record)
            logger.debug(
                "step %d t=%.6e dt=%.3e ct=%d min_rho=%.3e min_p=%.3e",
                len(records),
                t,
                record.dt,
                record.ct_iterations,
                record.min_rho,
                record.min_p,
            )
            if len(records) % config.log_every == 0:
                logger.info("step %d: t=%.6e dt=%.3e", len(records), t, record.dt)
        snapshots.append(Snapshot(t, state.copy()))

    logger.info("Finished %s after %d steps", problem.name, len(records))
    return RunResult(problem=problem, config=config, snapshots=snapshots, records=records)
