"""Options and helpers shared by the solve and converge commands."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.table import Table

from contacthvi.config import RunConfig
from contacthvi.config_loader import PRESETS, flatten_config, load_run_config


def run_options(func: Callable) -> Callable:
    """--config, --preset, --eps, --out, --seed and --deterministic."""
    options = [
        click.option(
            "--config",
            "config_file",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="Configuration file (key = value text, YAML or JSON)",
        ),
        click.option(
            "--preset",
            type=click.Choice(sorted(PRESETS)),
            help="Bundled dataset the config file is layered on",
        ),
        click.option("--eps", type=float, help="Outer stopping tolerance in the V-norm"),
        click.option(
            "-o",
            "--out",
            type=click.Path(file_okay=False, path_type=Path),
            help="Output directory",
        ),
        click.option("--seed", type=int, help="Seed of the residual-check directions"),
        click.option(
            "--deterministic",
            is_flag=True,
            help="Run sequentially for byte-identical outputs",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def resolve_config(
    ctx: click.Context,
    config_file: Path | None,
    preset: str | None,
    overrides: dict[str, Any],
) -> RunConfig:
    """Merge group-level and command-level sources; command flags win."""
    obj = ctx.obj or {}
    return load_run_config(
        config_file or obj.get("config"),
        preset or obj.get("preset"),
        overrides,
    )


def print_config_table(cfg: RunConfig, console: Console, title: str = "Configuration") -> None:
    table = Table(title=title, show_header=False, box=None)
    table.add_column("Key", style="cyan")
    table.add_column("Value")
    for key, value in flatten_config(cfg):
        table.add_row(key, "-" if value is None else str(value))
    console.print(table)
    console.print()


def report_warnings(warnings: list[str], console: Console) -> None:
    if warnings:
        console.print(f"[yellow]⚠ {len(warnings)} warning(s):[/yellow]")
        for warning in warnings:
            console.print(f"  • {warning}")


def common_overrides(
    eps: float | None, out: Path | None, seed: int | None, deterministic: bool
) -> dict[str, Any]:
    return {
        "solver.eps": eps,
        "output.out_dir": str(out) if out is not None else None,
        "diagnostics.seed": seed,
        "runtime.deterministic": True if deterministic else None,
    }
