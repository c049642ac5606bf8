"""
Run parameters and their validation.
"""

import warnings as warn_module
from dataclasses import dataclass, field
from typing import Optional

from .core import GasModel
from .errors import ConfigurationError


@dataclass
class RunConfig:
    """
    Physics and scheme parameters of a PPCT run.

    Attributes:
        t_end: Final time
        gas: Equation of state
        q: Positivity parameter of the limiter and CFL condition (q > 2)
        cfl: CFL constant of the full step; None selects 2/q
        eps_tol: Stopping tolerance of the CT fixed-point iteration
        max_ct_iter: Iteration cap of the CT solver
        snapshot_times: Times at which snapshots are taken (t_end is always one)
        safety: Multiplier on the selected dt, in (0, 1]
        pp_limiter: Apply the positivity-preserving limiter
        max_halvings: How often a rejected step may halve dt before aborting
        limiter_eps: Guard of the density and pressure limiter steps
        log_every: Emit an INFO progress line every this many steps

    Computed Properties:
        stage_cfl_limit: Bound 1/q on dt * sum(alpha/d) per forward-Euler stage
        output_times: Sorted snapshot times including t_end
    """

    t_end: float
    gas: GasModel = field(default_factory=GasModel)
    q: float = 3.0
    cfl: Optional[float] = None
    eps_tol: float = 1e-10
    max_ct_iter: int = 100
    snapshot_times: tuple[float, ...] = ()
    safety: float = 1.0
    pp_limiter: bool = True
    max_halvings: int = 5
    limiter_eps: float = 1e-14
    log_every: int = 50

    def __post_init__(self):
        """Resolve defaults and validate."""
        self.snapshot_times = tuple(float(t) for t in self.snapshot_times)
        if self.cfl is None and self.q > 2.0:
            self.cfl = 2.0 / self.q
        self.validate()

    def validate(self) -> list[str]:
        """
        Validate parameters.

        Returns:
            List of soft warnings (also emitted with warnings.warn)

        Raises:
            ConfigurationError: If any parameter is invalid
        """
        errors = []
        notes = []

        if not self.q > 2.0:
            errors.append(f"q must be in (2, inf), got {self.q}")
        elif self.cfl is None or not (0.0 < self.cfl <= (2.0 / self.q) * (1.0 + 1e-12)):
            errors.append(f"cfl must be in (0, 2/q] = (0, {2.0 / self.q:.6g}], got {self.cfl}")
        if not (0.0 < self.safety <= 1.0):
            errors.append(f"safety must be in (0, 1], got {self.safety}")
        if not self.eps_tol > 0.0:
            errors.append(f"eps_tol must be positive, got {self.eps_tol}")
        if self.max_ct_iter < 1:
            errors.append(f"max_ct_iter must be at least 1, got {self.max_ct_iter}")
        if not self.t_end >= 0.0:
            errors.append(f"t_end must be non-negative, got {self.t_end}")
        if self.max_halvings < 0:
            errors.append(f"max_halvings must be non-negative, got {self.max_halvings}")
        if not self.limiter_eps >= 0.0:
            errors.append(f"limiter_eps must be non-negative, got {self.limiter_eps}")
        if self.log_every < 1:
            errors.append(f"log_every must be at least 1, got {self.log_every}")
        outside = [t for t in self.snapshot_times if t < 0.0 or t > self.t_end]
        if outside:
            errors.append(f"Snapshot times must lie in [0, t_end], got {outside}")

        if errors:
            raise ConfigurationError("Invalid parameters:\n" + "\n".join(f"  - {e}" for e in errors))

        if self.safety < 0.5:
            notes.append(f"safety = {self.safety} is unusually small; runs will take many steps")
        if self.eps_tol > 1e-6:
            notes.append(f"eps_tol = {self.eps_tol:g} is loose; divergence and energy errors scale with it")
        if not self.pp_limiter:
            notes.append("Positivity-preserving limiter disabled; admissibility is no longer guaranteed")
        for note in notes:
            warn_module.warn(note, UserWarning)
        return notes

    @property
    def stage_cfl_limit(self) -> float:
        return 1.0 / self.q

    @property
    def output_times(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.snapshot_times) | {float(self.t_end)}))

    def summary(self) -> str:
        """
        Generate a human-readable summary of the parameters.

        Returns:
            Multi-line string
        """
        lines = [
            "PPCT Run Parameters",
            "=" * 50,
            f"Final time: {self.t_end:g}",
            f"Gas: gamma = {self.gas.gamma:.6g}",
            f"Limiter parameter q: {self.q:g}" + ("" if self.pp_limiter else " (limiter OFF)"),
            f"CFL constant: {self.cfl:.6g} (stage bound 1/q = {self.stage_cfl_limit:.6g})",
            f"Safety factor: {self.safety:g}",
            f"CT tolerance: {self.eps_tol:g}, max iterations {self.max_ct_iter}",
        ]
        if self.snapshot_times:
            lines.append("Snapshots: " + ", ".join(f"{t:g}" for t in self.output_times))
        return "\n".join(lines)

    def __str__(self) -> str:
        return f"RunConfig(t_end={self.t_end:g}, q={self.q:g}, cfl={self.cfl:.4g}, gamma={self.gas.gamma:.4g})"
