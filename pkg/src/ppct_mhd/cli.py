"""
Command-line interface for the PPCT MHD solver.
"""

import logging
import sys
from pathlib import Path
from typing import NoReturn, Optional

import click

from . import (
    PPCTError,
    RunConfig,
    StepRecord,
    __version__,
    convergence_order,
    exact_vortex_error,
    export_run,
    load_config,
    run,
    run_checks,
    vortex,
    write_diagnostics,
)

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def _fail(message: str, diagnostics: Optional[Path] = None) -> NoReturn:
    click.echo(f"Error: {message}", err=True)
    if diagnostics is not None:
        click.echo(f"Diagnostics so far: {diagnostics}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(version=__version__, prog_name="ppct")
@click.option("--verbose", "-v", count=True, help="Log INFO (-v) or DEBUG (-vv) messages")
def cli(verbose):
    """
    PPCT - positivity-preserving constrained-transport ideal MHD solver.

    Runs the benchmark problems from configuration files and measures
    convergence orders on the smooth vortex.
    """
    logging.basicConfig(
        level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )


@cli.command(name="run")
@click.option("--config", "-c", "config_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Run configuration file (key = value lines)")
@click.option("--out-dir", "-o", type=click.Path(file_okay=False),
              help="Output directory (overrides out_dir in the config)")
def run_command(config_file, out_dir):
    """
    Run a problem and write snapshots, diagnostics and a manifest.

    Example:
        ppct run --config configs/orszag_tang_64.cfg
    """
    try:
        plan = load_config(config_file)
    except ValueError as e:
        _fail(str(e))
    if out_dir:
        plan.out_dir = Path(out_dir)

    click.echo(plan.summary())
    click.echo()

    records: list[StepRecord] = []
    try:
        result = run(plan.problem, plan.config, on_step=records.append)
    except (PPCTError, ValueError) as e:
        path = write_diagnostics(records, plan.out_dir / "diagnostics.txt")
        _fail(f"{type(e).__name__}: {e}", path)

    files = export_run(result, plan)
    click.echo(f"✓ {len(result.records)} steps to t = {result.final.t:g}")
    click.echo(f"✓ CT iterations: mean {result.mean_ct_iterations:.2f}, max {result.max_ct_iterations}")
    click.echo("✓ Exported files:")
    for name, path in files.items():
        click.echo(f"  • {name}: {path}")


def _parse_grids(grids: str) -> list[int]:
    try:
        values = [int(g) for g in grids.split(",") if g.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma list of integers, got '{grids}'", param_hint="--grids")
    if len(values) < 2 or any(n < 2 for n in values):
        raise click.BadParameter("give at least two grid sizes, each >= 2", param_hint="--grids")
    return values


def _order_cell(orders: list[float], k: int) -> str:
    return f"{orders[k - 1]:6.2f}" if k > 0 else "     -"


@cli.command()
@click.option("--problem", "-p", type=click.Choice(["vortex"]), default="vortex",
              help="Problem with an exact solution")
@click.option("--mu", type=float, default=1.0, help="Vortex strength (default: 1)")
@click.option("--grids", "-g", type=str, default="64,128,256",
              help="Comma list of cells per axis (default: 64,128,256)")
@click.option("--q", type=float, default=3.0, help="Positivity parameter q > 2 (default: 3)")
@click.option("--cfl", type=float, help="CFL constant (default: 2/q)")
@click.option("--t-end", type=float, help="Final time (default: the problem's, 0.05)")
def convergence(problem, mu, grids, q, cfl, t_end):
    """
    Grid convergence study against the exact vortex.

    Prints l1, l2 and l-infinity errors of B and v per grid, the observed
    orders between successive grids and the mean CT iteration count.

    Example:
        ppct convergence --problem vortex --mu 1 --grids 64,128,256 --q 2.01
    """
    sizes = _parse_grids(grids)
    rows = []
    try:
        for n in sizes:
            case = vortex(mu=mu, resolution=(n, n))
            config = RunConfig(t_end=case.t_end if t_end is None else t_end, gas=case.gas, q=q, cfl=cfl)
            result = run(case, config)
            errors = exact_vortex_error(result.final.field, result.final.t, mu)
            rows.append((n, errors, result.mean_ct_iterations))
    except (PPCTError, ValueError) as e:
        _fail(f"{type(e).__name__}: {e}")

    columns = [
        ("B l1", lambda e: e.B.l1), ("B l2", lambda e: e.B.l2), ("B linf", lambda e: e.B.linf),
        ("v l1", lambda e: e.v.l1), ("v l2", lambda e: e.v.l2), ("v linf", lambda e: e.v.linf),
    ]
    orders = {}
    for label, pick in columns:
        values = [pick(errors) for _, errors, _ in rows]
        orders[label] = convergence_order(values) if all(v > 0.0 for v in values) else [float("nan")] * (len(values) - 1)

    click.echo(f"Vortex convergence, mu = {mu:g}, q = {q:g}")
    header = f"{'N':>6}" + "".join(f"{label:>12} {'order':>6}" for label, _ in columns) + f"{'ite':>7}"
    click.echo(header)
    click.echo("-" * len(header))
    for k, (n, errors, ite) in enumerate(rows):
        line = f"{n:>6}"
        for label, pick in columns:
            line += f"{pick(errors):12.4e} {_order_cell(orders[label], k)}"
        click.echo(line + f"{ite:7.2f}")


@cli.command()
def check():
    """
    Run the fast invariant suite on tiny grids.

    Exits with status 1 if any check fails.
    """
    results = run_checks()
    for result in results:
        click.echo(str(result))
    failed = [r.name for r in results if not r.passed]
    if failed:
        _fail(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    click.echo(f"✓ All {len(results)} checks passed")


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
def info(config_file):
    """
    Show the resolved problem and parameters of a configuration file.
    """
    try:
        plan = load_config(config_file)
    except ValueError as e:
        _fail(str(e))
    click.echo(plan.summary())


def main():
    """Entry point for CLI."""
    cli()


if __name__ == "__main__":
    main()
