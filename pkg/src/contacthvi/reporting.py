"""Gnuplot scripts and console summaries for solves and convergence studies."""

from __future__ import annotations

import logging
import math
from pathlib import Path

from rich.console import Console
from rich.table import Table

from .models import ConvergenceRecord, Solution

logger = logging.getLogger(__name__)


def convergence_gnuplot(record: ConvergenceRecord, csv_name: str) -> str:
    """Log-log error plot with a first-order guide line through the finest point."""
    if record.h:
        h_ref, e_ref = record.h[-1], record.errors[-1]
        guide = f"guide(h) = {e_ref!r} * h / {h_ref!r}"
    else:
        guide = "guide(h) = h"
    if math.isfinite(record.slope):
        title = f'title sprintf("slope %.3f", {record.slope!r})'
    else:
        title = 'title "error"'
    return "\n".join(
        [
            "# Numerical error ||u_ref - u_h||_V against the mesh size h",
            'set terminal pngcairo size 800,600',
            'set output "convergence.png"',
            'set datafile separator ","',
            "set logscale xy",
            'set xlabel "h"',
            'set ylabel "error in V-norm"',
            "set key bottom right",
            "set grid",
            guide,
            f'plot "{csv_name}" skip 1 using 1:2 with linespoints pt 7 {title}, \\',
            '     guide(x) with lines dt 2 title "order 1"',
            "",
        ]
    )


def deformed_gnuplot(polyline_name: str, scale: float = 1.0) -> str:
    """Deformed mesh over the undeformed one; ``gnuplot -e "scale=10"`` magnifies."""
    return "\n".join(
        [
            "# Deformed configuration x + scale * u",
            f'if (!exists("scale")) scale = {float(scale)!r}',
            'set terminal pngcairo size 1000,600',
            'set output "deformed.png"',
            "set size ratio -1",
            'set xlabel "x"',
            'set ylabel "y"',
            "set arrow from graph 0, first 0 to graph 1, first 0 nohead dt 3 lc rgb 'black'",
            f'plot "{polyline_name}" using 1:2 with lines lc rgb "gray" title "reference", \\',
            f'     "{polyline_name}" using ($1 + scale * $3):($2 + scale * $4) '
            'with lines lc rgb "blue" title sprintf("deformed (scale %g)", scale)',
            "",
        ]
    )


def write_convergence_gnuplot(record: ConvergenceRecord, csv_path: Path, path: Path) -> None:
    path.write_text(convergence_gnuplot(record, csv_path.name), encoding="utf-8")
    logger.info(f"Wrote gnuplot script {path}")


def write_deformed_gnuplot(polyline_path: Path, path: Path, scale: float = 1.0) -> None:
    path.write_text(deformed_gnuplot(polyline_path.name, scale), encoding="utf-8")
    logger.info(f"Wrote gnuplot script {path}")


def print_history_table(solution: Solution, console: Console) -> None:
    table = Table(title="Fixed-point iterations", box=None)
    table.add_column("k", justify="right", style="cyan")
    table.add_column("||u_k - u_k-1||_V", justify="right")
    table.add_column("ratio", justify="right")
    table.add_column("L(u_k-1, u_k)", justify="right")
    table.add_column("sweeps", justify="right")

    ratios = solution.contraction_ratios()
    for k, diff in enumerate(solution.history, start=1):
        ratio = f"{ratios[k - 2]:.3f}" if 2 <= k <= len(ratios) + 1 else ""
        table.add_row(
            str(k),
            f"{diff:.3e}",
            ratio,
            f"{solution.objective_values[k - 1]:.10e}",
            str(solution.inner_sweeps[k - 1]),
        )
    console.print(table)


def print_convergence_table(record: ConvergenceRecord, console: Console) -> None:
    table = Table(title="Convergence study", box=None)
    table.add_column("h", justify="right", style="cyan")
    table.add_column("||u_ref - u_h||_V", justify="right", style="green")
    for h, err in record.rows():
        table.add_row(f"{h:g}", f"{err:.6e}")
    console.print(table)
    console.print(f"Least-squares slope: [bold]{record.slope:.4f}[/bold]")
    if record.slope_excluding_coarsest is not None:
        console.print(f"Slope without h = {record.h[0]:g}: {record.slope_excluding_coarsest:.4f}")
    if not record.complete:
        console.print(f"[yellow]⚠ Study incomplete: {record.note}[/yellow]")
