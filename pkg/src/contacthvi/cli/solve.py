"""Solve command: one fixed-point solve with exports and diagnostics."""

from __future__ import annotations

from pathlib import Path

import click
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from contacthvi.cli.common import (
    common_overrides,
    print_config_table,
    report_warnings,
    resolve_config,
    run_options,
)
from contacthvi.experiments import run_single
from contacthvi.reporting import print_history_table
from contacthvi.validate import validate_run_config

console = Console()


@click.command()
@run_options
@click.option("--ny", type=int, help="Cells in y (h = 1/ny)")
@click.pass_context
def solve(
    ctx,
    config_file: Path | None,
    preset: str | None,
    eps: float | None,
    out: Path | None,
    seed: int | None,
    deterministic: bool,
    ny: int | None,
):
    """
    Solve the contact problem on a single mesh.

    Writes solution.csv, solution.vtk, deformed.gp and report.txt to the
    output directory. Exits with status 2 if the fixed-point iteration does
    not reach eps.

    Examples:

        \b
        contacthvi solve --preset paper-sec5 --ny 4

        \b
        contacthvi solve --config run.conf --eps 1e-8 --out results/
    """
    verbose = ctx.obj.get("verbose", False) if ctx.obj else False
    try:
        overrides = common_overrides(eps, out, seed, deterministic)
        overrides["mesh.ny"] = ny
        cfg = resolve_config(ctx, config_file, preset, overrides)
        if verbose:
            print_config_table(cfg, console)
        _, warnings = validate_run_config(cfg)
        report_warnings(warnings, console)

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
        ) as progress:
            progress.add_task(f"Solving on h = 1/{cfg.mesh.ny}...", total=None)
            result = run_single(cfg)

        solution = result.solution
        if solution.converged:
            console.print(
                f"[green]✓[/green] Converged in {solution.outer_iters} outer iteration(s)"
            )
        else:
            console.print(
                f"[bold yellow]✗ No convergence within {cfg.solver.max_outer} "
                "outer iterations[/bold yellow]"
            )
        print_history_table(solution, console)
        _print_diagnostics(result, cfg.diagnostics.residual_tolerance)

        console.print("\n[bold]Output files:[/bold]")
        for name, path in result.artifacts.items():
            console.print(f"  • {name}: {path}")

    except click.Abort:
        raise
    except Exception as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        if verbose:
            console.print_exception()
        raise click.Abort() from e

    if not solution.converged:
        ctx.exit(2)


def _print_diagnostics(result, tolerance: float) -> None:
    table = Table(title="Diagnostics", show_header=False, box=None)
    table.add_column("Check", style="cyan")
    table.add_column("Value")
    if result.residual is not None:
        mark = "[green]✓[/green]" if result.residual >= -tolerance else "[red]✗[/red]"
        table.add_row("Residual check (worst)", f"{result.residual:.3e} {mark}")
    for line in result.advisory.lines():
        key, _, value = line.partition(" = ") if " = " in line else line.partition(": ")
        table.add_row(key, value)
    console.print(table)
