"""Experiment drivers: a single solve with exports, and the mesh convergence study."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .fem import (
    AssembledSystem,
    DofMap,
    ReducedProblem,
    assemble,
    build_dofmap,
    prolongate,
    schur_reduce,
    vnorm,
)
from .io_utils import (
    write_convergence_csv,
    write_mesh_polylines,
    write_report_txt,
    write_solution_csv,
    write_vtk,
)
from .laws import ContactLawSet, get_law_set
from .mesh import build_uniform_mesh, mesh_for_level
from .models import ConvergenceRecord, Mesh, Solution
from .reporting import write_convergence_gnuplot, write_deformed_gnuplot
from .solver import fixed_point_solve
from .validate import AdvisoryReport, constants_advisory, hvi_residual_check, validate_run_config

logger = logging.getLogger(__name__)


class ExperimentError(RuntimeError):
    """A convergence study aborted; ``record`` holds the levels finished so far."""

    def __init__(self, message: str, record: ConvergenceRecord | None = None):
        super().__init__(message)
        self.record = record


@dataclass
class PreparedLevel:
    mesh: Mesh
    dofmap: DofMap
    system: AssembledSystem
    reduced: ReducedProblem
    laws: ContactLawSet


@dataclass
class SingleRunResult:
    level: PreparedLevel
    solution: Solution
    residual: float | None
    advisory: AdvisoryReport
    artifacts: dict[str, Path] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.solution.converged


@dataclass
class ConvergenceResult:
    record: ConvergenceRecord
    converged: dict[float, bool]
    artifacts: dict[str, Path] = field(default_factory=dict)

    @property
    def all_converged(self) -> bool:
        return all(self.converged.values())


def laws_from_config(cfg: RunConfig) -> ContactLawSet:
    return get_law_set(cfg.law.name, cfg.law.constants, frozen_bound=cfg.law.frozen_bound)


def prepare(cfg: RunConfig, ny: int) -> PreparedLevel:
    """Mesh, DOF map, assembled system and condensed problem for h = 1/ny."""
    mesh = build_uniform_mesh(2 * ny, ny)
    dofmap = build_dofmap(mesh)
    system = assemble(
        mesh,
        dofmap,
        cfg.material.lam,
        cfg.material.eta,
        cfg.loads.f0,
        cfg.loads.f_n,
    )
    reduced = schur_reduce(system, dofmap)
    return PreparedLevel(mesh, dofmap, system, reduced, laws_from_config(cfg))


def solve_level(cfg: RunConfig, ny: int) -> tuple[PreparedLevel, Solution]:
    level = prepare(cfg, ny)
    started = time.perf_counter()
    solution = fixed_point_solve(level.reduced, level.laws, level.system, level.dofmap, cfg.solver)
    logger.info(
        f"Solved h = 1/{ny} ({level.reduced.n_contact} contact DOFs) in "
        f"{time.perf_counter() - started:.1f}s, {solution.outer_iters} outer iterations"
    )
    return level, solution


def fit_slope(h: list[float] | np.ndarray, errors: list[float] | np.ndarray) -> float:
    """Least-squares slope of log(error) against log(h).

    Raises:
        ValueError: fewer than two points or a non-positive value.
    """
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if h.size < 2 or h.size != errors.size:
        raise ValueError("Slope fit needs at least two (h, error) pairs")
    if np.any(h <= 0.0) or np.any(errors <= 0.0):
        raise ValueError("Slope fit needs positive h and errors")
    slope, _ = np.polyfit(np.log(h), np.log(errors), 1)
    return float(slope)


def _report_sections(
    cfg: RunConfig,
    level: PreparedLevel,
    solution: Solution,
    residual: float | None,
    advisory: AdvisoryReport,
) -> dict:
    ratios = solution.contraction_ratios()
    history = ["k  ||u_k - u_k-1||_V  ratio  L(u_k-1, u_k)  sweeps  inner_converged"]
    for k, diff in enumerate(solution.history, start=1):
        ratio = f"{ratios[k - 2]:.4f}" if 2 <= k <= len(ratios) + 1 else "-"
        history.append(
            f"{k}  {diff:.6e}  {ratio}  {solution.objective_values[k - 1]:.12e}  "
            f"{solution.inner_sweeps[k - 1]}  {solution.inner_converged[k - 1]}"
        )
    residual_lines = (
        ["skipped (n_dirs = 0)"]
        if residual is None
        else [
            f"worst sampled value = {residual:.6e}",
            f"tolerance = -{cfg.diagnostics.residual_tolerance:g}",
            f"passed = {residual >= -cfg.diagnostics.residual_tolerance}",
        ]
    )
    return {
        "Run": {
            "h": f"1/{level.mesh.ny}",
            "nodes": level.mesh.n_nodes,
            "triangles": level.mesh.n_triangles,
            "contact DOFs": level.reduced.n_contact,
            "law": level.laws.name,
            "lambda": cfg.material.lam,
            "eta": cfg.material.eta,
            "f0": cfg.loads.f0,
            "fN": cfg.loads.f_n,
            "eps": cfg.solver.eps,
            "start": cfg.solver.start,
        },
        "Result": {
            "converged": solution.converged,
            "outer iterations": solution.outer_iters,
            "final ||u_k - u_k-1||_V": f"{solution.history[-1]:.6e}" if solution.history else "-",
            "max contraction ratio": f"{max(ratios):.4f}" if ratios else "-",
            "max u_nu on contact boundary": f"{float(np.max(solution.trace.normal)):.6e}",
        },
        "History": history,
        "Residual check": residual_lines,
        "Constants advisory": advisory.lines(),
    }


def run_single(cfg: RunConfig, ny: int | None = None) -> SingleRunResult:
    """Solve at h = 1/ny and write the CSV, VTK, report and plot script."""
    ny = ny or cfg.mesh.ny
    _, warnings = validate_run_config(cfg)
    level, solution = solve_level(cfg, ny)

    residual = None
    if cfg.diagnostics.n_dirs > 0:
        residual = hvi_residual_check(
            solution,
            level.reduced,
            level.laws,
            level.system,
            level.dofmap,
            n_dirs=cfg.diagnostics.n_dirs,
            seed=cfg.diagnostics.seed,
            deltas=cfg.diagnostics.deltas,
        )
    advisory = constants_advisory(
        level.laws, level.system, level.dofmap, level.mesh, solution, seed=cfg.diagnostics.seed
    )

    out_dir = Path(cfg.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nodal = level.dofmap.expand(solution.u)
    artifacts: dict[str, Path] = {}
    if cfg.output.csv:
        artifacts["solution"] = out_dir / "solution.csv"
        write_solution_csv(level.mesh, nodal, artifacts["solution"])
    if cfg.output.vtk:
        artifacts["vtk"] = out_dir / "solution.vtk"
        write_vtk(level.mesh, nodal, artifacts["vtk"], title=f"contacthvi h=1/{ny}")
    if cfg.output.gnuplot:
        artifacts["mesh"] = out_dir / "deformed_mesh.dat"
        write_mesh_polylines(level.mesh, nodal, artifacts["mesh"])
        artifacts["deformed"] = out_dir / "deformed.gp"
        write_deformed_gnuplot(
            artifacts["mesh"], artifacts["deformed"], cfg.output.displacement_scale
        )

    errors = []
    if not solution.converged:
        errors.append(
            f"Fixed-point iteration did not reach eps within {cfg.solver.max_outer} iterations"
        )
    if residual is not None and residual < -cfg.diagnostics.residual_tolerance:
        warnings.append(f"Residual check violated: worst value {residual:.3e}")
    artifacts["report"] = out_dir / "report.txt"
    write_report_txt(
        _report_sections(cfg, level, solution, residual, advisory),
        errors,
        warnings,
        artifacts["report"],
    )
    return SingleRunResult(level, solution, residual, advisory, artifacts, warnings)


def _solve_for_study(cfg: RunConfig, ny: int) -> tuple[np.ndarray, bool]:
    _, solution = solve_level(cfg, ny)
    return solution.u, solution.converged


def _write_study(cfg: RunConfig, record: ConvergenceRecord) -> dict[str, Path]:
    out_dir = Path(cfg.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = {"convergence": out_dir / "convergence.csv"}
    write_convergence_csv(record, artifacts["convergence"])
    if cfg.output.gnuplot and len(record.h) >= 2:
        artifacts["plot"] = out_dir / "convergence.gp"
        write_convergence_gnuplot(record, artifacts["convergence"], artifacts["plot"])
    return artifacts


def _record(
    h: list[float], errors: list[float], reference_h: float, note: str | None = None
) -> ConvergenceRecord:
    try:
        slope = fit_slope(h, errors)
    except ValueError:
        slope = float("nan")
    without = None
    if len(h) >= 4:
        try:
            without = fit_slope(h[1:], errors[1:])
        except ValueError:
            without = None
    return ConvergenceRecord(
        h=h,
        errors=errors,
        slope=slope,
        slope_excluding_coarsest=without,
        reference_h=reference_h,
        complete=note is None,
        note=note,
    )


def run_convergence(
    cfg: RunConfig, levels: int | None = None, ref_level: int | None = None
) -> ConvergenceResult:
    """Errors ||u_ref - P u_h||_V for h = 1, 1/2, ..., 2^-(levels-1) against h = 2^-ref_level.

    The reference is solved first. Each coarse solution is prolongated
    exactly onto the reference mesh, where the V-norm is evaluated. A failing
    level stops the study: the finished rows are written with an
    ``# incomplete`` marker and ExperimentError is raised.
    """
    levels = levels if levels is not None else cfg.mesh.levels
    ref_level = ref_level if ref_level is not None else cfg.mesh.ref_level
    if levels < 2:
        raise ValueError(f"A convergence study needs at least two levels, got {levels}")
    if ref_level <= levels - 1:
        raise ValueError(
            f"Reference level {ref_level} must be finer than the finest study level {levels - 1}"
        )

    ref, ref_solution = solve_level(cfg, 2**ref_level)
    converged: dict[float, bool] = {ref.mesh.h: ref_solution.converged}
    study = list(range(levels))
    meshes = {lvl: mesh_for_level(lvl) for lvl in study}
    parallel = cfg.runtime.workers > 1 and not cfg.runtime.deterministic

    h: list[float] = []
    errors: list[float] = []

    def add(lvl: int, u: np.ndarray, ok: bool) -> None:
        fine = prolongate(u, meshes[lvl], ref.mesh)
        err = vnorm(ref.system, ref_solution.u - fine)
        h.append(meshes[lvl].h)
        errors.append(err)
        converged[meshes[lvl].h] = ok
        logger.info(f"h = {meshes[lvl].h:g}: error {err:.6e}")

    try:
        if parallel:
            with ProcessPoolExecutor(max_workers=cfg.runtime.workers) as pool:
                futures = [pool.submit(_solve_for_study, cfg, meshes[lvl].ny) for lvl in study]
                for lvl, fut in zip(study, futures):
                    add(lvl, *fut.result())
        else:
            for lvl in study:
                add(lvl, *_solve_for_study(cfg, meshes[lvl].ny))
    except Exception as e:
        note = f"level h = {2.0 ** -len(h):g} failed: {e}"
        record = _record(h, errors, ref.mesh.h, note=note)
        _write_study(cfg, record)
        logger.error(f"Convergence study aborted: {note}")
        raise ExperimentError(f"Convergence study aborted: {note}", record) from e

    record = _record(h, errors, ref.mesh.h)
    artifacts = _write_study(cfg, record)
    return ConvergenceResult(record, converged, artifacts)
