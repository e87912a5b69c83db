"""
Unit tests for io_utils module.
Tests the solution/convergence CSV layout, VTK output and the text report.
"""

import numpy as np
import pandas as pd
import pytest

from contacthvi.io_utils import (
    read_convergence_csv,
    read_solution_csv,
    solution_to_dataframe,
    write_convergence_csv,
    write_mesh_polylines,
    write_report_txt,
    write_solution_csv,
    write_vtk,
)
from contacthvi.mesh import build_uniform_mesh
from contacthvi.models import ConvergenceRecord


@pytest.fixture
def mesh():
    return build_uniform_mesh(4, 2)


@pytest.fixture
def nodal(mesh):
    """Displacement equal to a fixed linear map of the coordinates."""
    return mesh.nodes @ np.array([[0.1, 0.0], [0.2, -0.3]])


def make_record(complete=True):
    return ConvergenceRecord(
        h=[1.0, 0.5, 0.25],
        errors=[0.4, 0.2, 0.1],
        slope=1.0,
        slope_excluding_coarsest=None,
        reference_h=1 / 64,
        complete=complete,
        note=None if complete else "level h = 0.125 failed",
    )


class TestSolutionCsv:
    def test_dataframe_columns(self, mesh, nodal):
        df = solution_to_dataframe(mesh, nodal)
        assert list(df.columns) == ["x", "y", "ux", "uy"]
        assert len(df) == mesh.n_nodes

    def test_shape_checked(self, mesh):
        with pytest.raises(ValueError, match="shape"):
            solution_to_dataframe(mesh, np.zeros((3, 2)))

    def test_header_and_values(self, tmp_path, mesh, nodal):
        path = tmp_path / "solution.csv"
        write_solution_csv(mesh, nodal, path)
        assert path.read_text().splitlines()[0] == "x,y,ux,uy"
        df = read_solution_csv(path)
        np.testing.assert_allclose(df[["ux", "uy"]].to_numpy(), nodal, rtol=1e-15)

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n0,0\n")
        with pytest.raises(ValueError, match="Missing columns"):
            read_solution_csv(path)


class TestConvergenceCsv:
    def test_complete(self, tmp_path):
        path = tmp_path / "convergence.csv"
        write_convergence_csv(make_record(), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "h,error"
        assert len(lines) == 4
        assert not any(line.startswith("#") for line in lines)

    def test_incomplete_marker(self, tmp_path):
        path = tmp_path / "convergence.csv"
        write_convergence_csv(make_record(complete=False), path)
        lines = path.read_text().splitlines()
        assert lines[-1] == "# incomplete: level h = 0.125 failed"
        df = read_convergence_csv(path)
        assert isinstance(df, pd.DataFrame)
        assert df["h"].tolist() == [1.0, 0.5, 0.25]


class TestVtk:
    def test_section_counts(self, tmp_path, mesh, nodal):
        path = tmp_path / "solution.vtk"
        write_vtk(mesh, nodal, path, title="test run")
        lines = path.read_text().splitlines()
        n, m = mesh.n_nodes, mesh.n_triangles
        assert lines[0] == "# vtk DataFile Version 3.0"
        assert lines[1] == "test run"
        assert lines[2] == "ASCII"
        assert lines[3] == "DATASET UNSTRUCTURED_GRID"
        assert lines[4] == f"POINTS {n} double"
        cells = lines.index(f"CELLS {m} {4 * m}")
        assert cells == 5 + n
        types = lines.index(f"CELL_TYPES {m}")
        assert types == cells + m + 1
        assert all(line == "5" for line in lines[types + 1 : types + 1 + m])
        assert lines[types + m + 1] == f"POINT_DATA {n}"
        assert lines[types + m + 2] == "VECTORS displacement double"
        assert len(lines) == types + m + 3 + n

    def test_shape_checked(self, tmp_path, mesh):
        with pytest.raises(ValueError):
            write_vtk(mesh, np.zeros((mesh.n_nodes, 3)), tmp_path / "x.vtk")


class TestPolylinesAndReport:
    def test_polyline_blocks(self, tmp_path, mesh, nodal):
        path = tmp_path / "deformed_mesh.dat"
        write_mesh_polylines(mesh, nodal, path)
        blocks = path.read_text().strip().split("\n\n")
        assert len(blocks) == mesh.n_triangles
        first = blocks[0].splitlines()
        assert len(first) == 4
        assert first[0] == first[-1]

    def test_report_sections(self, tmp_path):
        path = tmp_path / "report.txt"
        write_report_txt(
            {"Run": {"h": 0.25, "converged": True}, "Advisory": ["m_A = 8"]},
            errors=[],
            warnings=["loose eps"],
            path=path,
        )
        text = path.read_text()
        assert "=== Run ===\nh: 0.25\nconverged: True\n" in text
        assert "=== Advisory ===\nm_A = 8\n" in text
        assert "=== Warnings ===\n- loose eps\n" in text
        assert "Errors" not in text
