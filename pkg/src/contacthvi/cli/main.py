"""Main CLI entry point for contacthvi."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler

from contacthvi import __version__
from contacthvi.cli.config_cmd import config
from contacthvi.cli.converge import converge
from contacthvi.cli.solve import solve
from contacthvi.config_loader import PRESETS, EnvSettings

console = Console()

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


def setup_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else EnvSettings().log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
        force=True,
    )


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(version=__version__, prog_name="contacthvi")
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging")
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Configuration file (key = value text, YAML or JSON)",
)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Bundled dataset")
@click.pass_context
def cli(ctx, verbose: bool, config: Path | None, preset: str | None):
    """
    contacthvi - static elastic contact with nonmonotone friction.

    Solves the contact problem by a fixed-point iteration whose inner step
    minimizes a convex nonsmooth energy over the contact-boundary DOFs with
    Powell's method.

    Examples:

        \b
        # Single solve of the bundled dataset at h = 1/8
        contacthvi solve --preset paper-sec5 --ny 8

        \b
        # Convergence study h = 1 ... 1/16 against h = 1/64
        contacthvi converge --preset paper-sec5 --levels 5 --ref-level 6 --deterministic

        \b
        # Export a configuration template
        contacthvi config export --output run.conf
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["config"] = config
    ctx.obj["preset"] = preset
    setup_logging(verbose)

    if verbose and config:
        console.print(f"[dim]Using config file: {config}[/dim]")


cli.add_command(solve)
cli.add_command(converge)
cli.add_command(config)


def main():
    """Entry point for the CLI."""
    try:
        cli(obj={})
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/yellow]")
        sys.exit(130)
    except Exception as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
