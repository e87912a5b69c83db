"""Config command for configuration management."""

from __future__ import annotations

from pathlib import Path

import click
from rich.console import Console
from rich.syntax import Syntax

from contacthvi.cli.common import print_config_table, report_warnings
from contacthvi.config import RunConfig
from contacthvi.config_loader import PRESETS, export_default_config, load_run_config
from contacthvi.validate import validate_run_config

console = Console()

_SYNTAX = {"yaml": "yaml", "json": "json", "conf": "ini"}


@click.group()
def config():
    """Manage configuration files and settings."""
    pass


@config.command()
@click.option(
    "-o",
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Output file path for configuration",
)
@click.option(
    "-f",
    "--format",
    type=click.Choice(["conf", "yaml", "json"], case_sensitive=False),
    default="conf",
    help="Configuration file format",
)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Start from a bundled dataset")
def export(output: Path, format: str, preset: str | None):
    """
    Export a configuration template.

    Examples:

        \b
        contacthvi config export --output run.conf

        \b
        contacthvi config export --output run.yaml --format yaml --preset paper-sec5
    """
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        export_default_config(format=format.lower(), path=output, preset=preset)
        console.print(f"[green]✓[/green] Configuration exported to: {output}")

        console.print("\n[bold]Preview:[/bold]")
        content = output.read_text()
        console.print(Syntax(content, _SYNTAX[format.lower()], theme="monokai", line_numbers=True))

    except Exception as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort() from e


@config.command()
@click.option(
    "-f",
    "--file",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Configuration file to validate",
)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Preset the file is layered on")
def validate(config_file: Path, preset: str | None):
    """
    Validate a configuration file.

    Examples:

        \b
        contacthvi config validate --file run.conf
    """
    try:
        console.print(f"Validating configuration file: {config_file}")
        cfg = load_run_config(config_file, preset, use_env=False)
        _, warnings = validate_run_config(cfg)
        console.print("[green]✓ Configuration is valid![/green]\n")
        report_warnings(warnings, console)
        print_config_table(cfg, console)

    except Exception as e:
        console.print("[bold red]✗ Validation failed:[/bold red]")
        console.print(f"  {e}")
        raise click.Abort() from e


@config.command()
@click.option(
    "-f",
    "--file",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Configuration file to show (defaults to the built-in defaults)",
)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Bundled dataset")
def show(config_file: Path | None, preset: str | None):
    """
    Display the resolved configuration.

    Examples:

        \b
        contacthvi config show --preset paper-sec5
    """
    try:
        if config_file or preset:
            cfg = load_run_config(config_file, preset)
        else:
            console.print("Using default configuration")
            cfg = RunConfig()
        print_config_table(cfg, console)

    except Exception as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort() from e
