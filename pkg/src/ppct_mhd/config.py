"""
Run configuration files.

A configuration is a list of ``key = value`` lines; ``#`` starts a comment.
Example:

    problem = orszag-tang
    nx = 64
    ny = 64
    t_end = 0.5
    snapshots = 0.1, 0.25

Omitted keys fall back to the problem's own defaults (resolution, gamma,
final time, snapshot times) and to the RunConfig defaults (q = 3,
cfl = 2/q, eps_tol = 1e-10). format_config renders a resolved plan back into
the same grammar so a manifest reproduces its run exactly.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .core import GasModel
from .errors import ConfigurationError
from .parameters import RunConfig
from .problems import PROBLEM_PARAMETERS, ProblemSpec, build_problem

RESOLUTION_KEYS = ("nx", "ny", "nz")
FLOAT_KEYS = ("t_end", "gamma", "q", "cfl", "eps_tol", "safety", "mu", "b0", "mach")
INT_KEYS = RESOLUTION_KEYS + ("max_ct_iter",)
BOOL_KEYS = ("pp_limiter", "full_domain")
KNOWN_KEYS = ("problem", "snapshots", "out_dir") + FLOAT_KEYS + INT_KEYS + BOOL_KEYS

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass
class RunPlan:
    """
    Everything a run needs: the problem, its parameters and where output goes.

    Attributes:
        problem: Benchmark built at the requested resolution and gamma
        config: Scheme and physics parameters
        out_dir: Directory receiving snapshots, diagnostics and the manifest
    """

    problem: ProblemSpec
    config: RunConfig
    out_dir: Path = field(default_factory=lambda: Path("output"))

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.problem.geometry.n

    def summary(self) -> str:
        return "\n".join([self.problem.summary(), "", self.config.summary(), "", f"Output: {self.out_dir}"])


def _parse_lines(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"Line {number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigurationError(f"Line {number}: unknown key '{key}'")
        if key in values:
            raise ConfigurationError(f"Line {number}: duplicate key '{key}'")
        values[key] = value
    return values


def _convert(key: str, value: str) -> Any:
    if key in FLOAT_KEYS:
        try:
            return float(value)
        except ValueError:
            raise ConfigurationError(f"'{key}' must be a number, got '{value}'") from None
    if key in INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigurationError(f"'{key}' must be an integer, got '{value}'") from None
    if key in BOOL_KEYS:
        lowered = value.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ConfigurationError(f"'{key}' must be true or false, got '{value}'")
    if key == "snapshots":
        try:
            return tuple(float(t) for t in value.split(",") if t.strip())
        except ValueError:
            raise ConfigurationError(f"'snapshots' must be a comma list of times, got '{value}'") from None
    return value


def parse_config(text: str) -> RunPlan:
    """
    Parse a configuration text into a RunPlan.

    Args:
        text: Contents of a configuration file

    Returns:
        Resolved RunPlan

    Raises:
        ConfigurationError: On unknown or duplicate keys, unparsable numbers,
            a missing problem, or parameters RunConfig rejects (q <= 2,
            cfl > 2/q, ...)

    Example:
        >>> plan = parse_config("problem = orszag-tang\\nnx = 64\\nny = 64")
        >>> plan.config.q, plan.resolution
        (3.0, (64, 64))
    """
    values = {key: _convert(key, raw) for key, raw in _parse_lines(text).items()}
    name = values.pop("problem", None)
    if name is None:
        raise ConfigurationError("Missing required key 'problem'")

    params = {key: values.pop(key) for key in ("mu", "b0", "mach", "full_domain") if key in values}
    # Built once at its default size to learn the dimension and defaults
    default = build_problem(name, **params)
    resolution = list(default.geometry.n)
    for axis, key in enumerate(RESOLUTION_KEYS):
        if key not in values:
            continue
        if axis >= len(resolution):
            raise ConfigurationError(f"'{key}' given for the {len(resolution)}D problem '{name}'")
        resolution[axis] = values.pop(key)
    problem = build_problem(name, resolution=resolution, **params)
    if "gamma" in values:
        problem = problem.with_gas(GasModel(values.pop("gamma")))

    t_end = values.pop("t_end", problem.t_end)
    if "snapshots" in values:
        snapshots = values.pop("snapshots")
    else:
        snapshots = tuple(t for t in problem.snapshot_times if t <= t_end)
    out_dir = Path(values.pop("out_dir", "output"))

    config = RunConfig(
        t_end=t_end,
        gas=problem.gas,
        snapshot_times=snapshots,
        **values,
    )
    return RunPlan(problem=problem, config=config, out_dir=out_dir)


def load_config(path: str | Path) -> RunPlan:
    """
    Read and parse a configuration file.

    Raises:
        ConfigurationError: If the file cannot be read or parsed
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config file {path}: {exc.strerror or exc}") from exc
    return parse_config(text)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(plan: RunPlan, comment: Optional[str] = None) -> str:
    """
    Render a plan in the configuration grammar.

    Floats are written with repr, so parsing the result gives back the same
    problem and RunConfig bit for bit.
    """
    config = plan.config
    problem = plan.problem
    lines = [f"# {comment}"] if comment else []
    lines.append(f"problem = {problem.name}")
    for key, n in zip(RESOLUTION_KEYS, problem.geometry.n):
        lines.append(f"{key} = {n}")
    entries = [
        ("t_end", float(config.t_end)),
        ("gamma", float(config.gas.gamma)),
        ("q", float(config.q)),
        ("cfl", float(config.cfl)),
        ("eps_tol", float(config.eps_tol)),
        ("max_ct_iter", config.max_ct_iter),
        ("safety", float(config.safety)),
        ("pp_limiter", config.pp_limiter),
    ]
    lines.extend(f"{key} = {_format_value(value)}" for key, value in entries)
    if config.snapshot_times:
        lines.append("snapshots = " + ", ".join(repr(t) for t in config.snapshot_times))
    lines.append(f"out_dir = {plan.out_dir}")
    for key in PROBLEM_PARAMETERS.get(problem.name, ()):
        if key in problem.parameters:
            lines.append(f"{key} = {_format_value(problem.parameters[key])}")
    return "\n".join(lines) + "\n"
