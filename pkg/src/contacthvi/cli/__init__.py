"""Command-line interface for contacthvi."""

from contacthvi.cli.main import cli, main

__all__ = ["cli", "main"]
