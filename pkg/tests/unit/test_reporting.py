"""Tests for gnuplot scripts and console tables."""

from __future__ import annotations

import math

import numpy as np
from rich.console import Console

from contacthvi.models import ConvergenceRecord, Solution, TraceField
from contacthvi.reporting import (
    convergence_gnuplot,
    deformed_gnuplot,
    print_convergence_table,
    print_history_table,
    write_convergence_gnuplot,
    write_deformed_gnuplot,
)


def record(slope=1.02, complete=True):
    return ConvergenceRecord(
        h=[1.0, 0.5],
        errors=[0.3, 0.15],
        slope=slope,
        slope_excluding_coarsest=None,
        reference_h=1 / 64,
        complete=complete,
        note=None if complete else "aborted",
    )


class TestGnuplotScripts:
    def test_convergence_script(self):
        script = convergence_gnuplot(record(), "convergence.csv")
        assert "set logscale xy" in script
        assert 'plot "convergence.csv" skip 1 using 1:2' in script
        assert "slope %.3f" in script
        assert "guide(h) = 0.15 * h / 0.5" in script

    def test_convergence_script_without_slope(self):
        script = convergence_gnuplot(record(slope=math.nan), "c.csv")
        assert "nan" not in script
        assert 'title "error"' in script

    def test_deformed_script_scale(self):
        script = deformed_gnuplot("deformed_mesh.dat", scale=10)
        assert 'if (!exists("scale")) scale = 10.0' in script
        assert "($1 + scale * $3):($2 + scale * $4)" in script

    def test_written_files_reference_data_by_name(self, tmp_path):
        csv = tmp_path / "convergence.csv"
        gp = tmp_path / "convergence.gp"
        write_convergence_gnuplot(record(), csv, gp)
        assert '"convergence.csv"' in gp.read_text()
        dat = tmp_path / "deformed_mesh.dat"
        write_deformed_gnuplot(dat, tmp_path / "deformed.gp")
        assert '"deformed_mesh.dat"' in (tmp_path / "deformed.gp").read_text()


class TestConsoleTables:
    def test_history_table(self):
        console = Console(record=True, width=120)
        sol = Solution(
            u=np.zeros(2),
            trace=TraceField.zeros(np.array([0.0, 1.0])),
            outer_iters=3,
            history=[1e-1, 1e-3, 1e-5],
            converged=True,
            objective_values=[-1.0, -1.1, -1.1],
            inner_sweeps=[4, 3, 2],
            inner_converged=[True, True, True],
        )
        print_history_table(sol, console)
        text = console.export_text()
        assert "Fixed-point iterations" in text
        assert "1.000e-05" in text
        assert "0.010" in text

    def test_convergence_table_incomplete(self):
        console = Console(record=True, width=120)
        print_convergence_table(record(complete=False), console)
        text = console.export_text()
        assert "1.500000e-01" in text
        assert "Study incomplete: aborted" in text
