from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np
import pandas as pd

from .models import ConvergenceRecord, Mesh

logger = logging.getLogger(__name__)

SOLUTION_COLUMNS = ["x", "y", "ux", "uy"]
CONVERGENCE_COLUMNS = ["h", "error"]
FLOAT_FORMAT = "%.16e"


def solution_to_dataframe(mesh: Mesh, nodal: np.ndarray) -> pd.DataFrame:
    """One row per mesh node: coordinates and displacement."""
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape != (mesh.n_nodes, 2):
        raise ValueError(f"Expected nodal field of shape ({mesh.n_nodes}, 2), got {nodal.shape}")
    data = np.column_stack([mesh.nodes, nodal])
    return pd.DataFrame(data, columns=SOLUTION_COLUMNS)


def write_solution_csv(mesh: Mesh, nodal: np.ndarray, path: Path) -> None:
    df = solution_to_dataframe(mesh, nodal)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote solution CSV {path}")


def read_solution_csv(path: Path) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = set(SOLUTION_COLUMNS) - set(df.columns)
    if missing:
        raise ValueError(f"Missing columns in CSV: {missing}")
    return df


def convergence_to_dataframe(record: ConvergenceRecord) -> pd.DataFrame:
    return pd.DataFrame(record.rows(), columns=CONVERGENCE_COLUMNS)


def write_convergence_csv(record: ConvergenceRecord, path: Path) -> None:
    """(h, error) rows; an aborted study ends with a ``# incomplete`` comment line."""
    df = convergence_to_dataframe(record)
    with path.open("w", encoding="utf-8", newline="") as f:
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        if not record.complete:
            f.write(f"# incomplete: {record.note or 'study aborted'}\n")
    logger.info(f"Wrote convergence CSV {path}")


def read_convergence_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_vtk(mesh: Mesh, nodal: np.ndarray, path: Path, title: str = "contacthvi") -> None:
    """Legacy ASCII VTK unstructured grid with the displacement as point vectors."""
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape != (mesh.n_nodes, 2):
        raise ValueError(f"Expected nodal field of shape ({mesh.n_nodes}, 2), got {nodal.shape}")
    n, m = mesh.n_nodes, mesh.n_triangles
    out = [
        "# vtk DataFile Version 3.0",
        title.splitlines()[0][:255] if title else "contacthvi",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    out.extend(f"{x:.16e} {y:.16e} 0.0" for x, y in mesh.nodes)
    out.append(f"CELLS {m} {4 * m}")
    out.extend(f"3 {a} {b} {c}" for a, b, c in mesh.triangles)
    out.append(f"CELL_TYPES {m}")
    out.extend("5" for _ in range(m))  # VTK_TRIANGLE
    out.append(f"POINT_DATA {n}")
    out.append("VECTORS displacement double")
    out.extend(f"{ux:.16e} {uy:.16e} 0.0" for ux, uy in nodal)
    path.write_text("\n".join(out) + "\n", encoding="ascii")
    logger.info(f"Wrote VTK file {path}")


def write_mesh_polylines(mesh: Mesh, nodal: np.ndarray, path: Path) -> None:
    """Closed triangle outlines as ``x y ux uy`` blocks separated by blank lines (gnuplot input)."""
    nodal = np.asarray(nodal, dtype=float)
    blocks = []
    for tri in mesh.triangles:
        loop = [*tri, tri[0]]
        blocks.append(
            "\n".join(
                f"{mesh.nodes[k, 0]:.10g} {mesh.nodes[k, 1]:.10g} "
                f"{nodal[k, 0]:.10g} {nodal[k, 1]:.10g}"
                for k in loop
            )
        )
    path.write_text("\n\n".join(blocks) + "\n", encoding="utf-8")


def write_report_txt(
    sections: Mapping[str, Iterable[str] | Mapping[str, object]],
    errors: list[str],
    warnings: list[str],
    path: Path,
) -> None:
    with path.open("w", encoding="utf-8") as f:
        for title, body in sections.items():
            f.write(f"=== {title} ===\n")
            if isinstance(body, Mapping):
                for k, v in body.items():
                    f.write(f"{k}: {v}\n")
            else:
                for line in body:
                    f.write(f"{line}\n")
            f.write("\n")
        if errors:
            f.write("=== Errors ===\n")
            for e in errors:
                f.write(f"- {e}\n")
            f.write("\n")
        if warnings:
            f.write("=== Warnings ===\n")
            for w in warnings:
                f.write(f"- {w}\n")
    logger.info(f"Wrote report {path}")
