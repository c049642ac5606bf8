"""
Exception hierarchy for the PPCT solver.

Inadmissible states are reported, never repaired, so every failure mode the
scheme can hit has its own exception type carrying what the caller needs to
react (the cell index, an admissible time step or the iteration history).
"""

from typing import Optional, Sequence


class PPCTError(Exception):
    """Base class for every solver error."""


class ConfigurationError(PPCTError, ValueError):
    """Invalid parameters, unknown config keys or inconsistent boundary specs."""


class NonPhysicalStateError(PPCTError):
    """
    A state with non-positive density or pressure was encountered.

    Attributes:
        cell: Index of the offending cell in (i, j[, k]) order, when known
    """

    def __init__(self, message: str, cell: Optional[Sequence[int]] = None):
        self.cell = tuple(int(c) for c in cell) if cell is not None else None
        if self.cell is not None:
            message = f"{message} at cell {self.cell}"
        super().__init__(message)


class StepRejectedError(PPCTError):
    """
    The stage CFL condition failed for the requested time step.

    Attributes:
        admissible_dt: Largest dt that satisfies the stage condition
    """

    def __init__(self, message: str, admissible_dt: float):
        self.admissible_dt = admissible_dt
        super().__init__(f"{message} (admissible dt = {admissible_dt:.6e})")


class ConvergenceError(PPCTError):
    """The CT fixed-point iteration hit its iteration cap."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class InvariantViolationError(PPCTError):
    """A property guaranteed by the scheme was violated; indicates a bug."""
