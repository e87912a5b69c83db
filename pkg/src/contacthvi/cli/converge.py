"""Converge command: errors against a fine reference solution over nested meshes."""

from __future__ import annotations

from pathlib import Path

import click
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn

from contacthvi.cli.common import (
    common_overrides,
    print_config_table,
    report_warnings,
    resolve_config,
    run_options,
)
from contacthvi.experiments import ExperimentError, run_convergence
from contacthvi.reporting import print_convergence_table
from contacthvi.validate import validate_run_config

console = Console()


@click.command()
@run_options
@click.option("--levels", type=int, help="Study levels h = 1, 1/2, ..., 2^-(levels-1)")
@click.option("--ref-level", type=int, help="Reference mesh h = 2^-ref_level")
@click.option(
    "--workers", type=int, help="Levels solved in parallel (ignored with --deterministic)"
)
@click.pass_context
def converge(
    ctx,
    config_file: Path | None,
    preset: str | None,
    eps: float | None,
    out: Path | None,
    seed: int | None,
    deterministic: bool,
    levels: int | None,
    ref_level: int | None,
    workers: int | None,
):
    """
    Run the mesh convergence study.

    Solves on the reference mesh first, then on every study level, and
    writes convergence.csv (h,error) and convergence.gp. Exits with status 2
    if any solve does not converge.

    Examples:

        \b
        contacthvi converge --preset paper-sec5 --deterministic

        \b
        contacthvi converge --preset paper-sec5 --levels 4 --ref-level 5 --workers 4
    """
    verbose = ctx.obj.get("verbose", False) if ctx.obj else False
    try:
        overrides = common_overrides(eps, out, seed, deterministic)
        overrides.update(
            {"mesh.levels": levels, "mesh.ref_level": ref_level, "runtime.workers": workers}
        )
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
            progress.add_task(
                f"Solving {cfg.mesh.levels} levels against h = 2^-{cfg.mesh.ref_level}...",
                total=None,
            )
            result = run_convergence(cfg)

        console.print("[green]✓[/green] Convergence study finished")
        print_convergence_table(result.record, console)
        if not result.all_converged:
            failed = [f"{h:g}" for h, ok in result.converged.items() if not ok]
            console.print(
                f"[bold yellow]✗ No convergence for h = {', '.join(failed)}[/bold yellow]"
            )

        console.print("\n[bold]Output files:[/bold]")
        for name, path in result.artifacts.items():
            console.print(f"  • {name}: {path}")

    except ExperimentError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        if e.record is not None and e.record.h:
            print_convergence_table(e.record, console)
        raise click.Abort() from e
    except click.Abort:
        raise
    except Exception as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        if verbose:
            console.print_exception()
        raise click.Abort() from e

    if not result.all_converged:
        ctx.exit(2)
