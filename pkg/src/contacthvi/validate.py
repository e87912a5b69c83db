from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import eigsh

from .config import RunConfig
from .contact import BoundaryFunctional
from .fem import AssembledSystem, DofMap, ReducedProblem, assemble_trace_gram
from .laws import ContactLawSet
from .models import Mesh, Solution

logger = logging.getLogger(__name__)

_REQUIRED_FOR_HS = ("m_alpha", "m_L")


class ValidationError(Exception):
    """Raised when validation fails (used internally if you set raise_exceptions=True)."""

    pass


def _report(
    title: str,
    errors: list[str],
    warnings: list[str],
    raise_exceptions: bool,
) -> None:
    for w in warnings:
        logger.warning(f"{title}: {w}")
    for e in errors:
        logger.error(f"{title}: {e}")
    if errors and raise_exceptions:
        raise ValidationError(f"{title} failed with {len(errors)} error(s).")


def validate_run_config(
    cfg: RunConfig, *, raise_exceptions: bool = False
) -> tuple[list[str], list[str]]:
    """Cross-field checks the pydantic models cannot express on their own."""
    errors: list[str] = []
    warnings: list[str] = []

    if cfg.mesh.ny & (cfg.mesh.ny - 1):
        warnings.append(
            f"ny={cfg.mesh.ny} is not a power of two; it cannot join a nested convergence study."
        )
    if cfg.mesh.ref_level >= 8:
        warnings.append(
            f"Reference level {cfg.mesh.ref_level} gives {2 * 2 ** (cfg.mesh.ref_level + 1)} "
            "contact DOFs; Powell's method will take hours."
        )
    if cfg.solver.eps > 1e-3:
        warnings.append(f"eps={cfg.solver.eps:g} is loose; the convergence study needs eps << h.")
    if cfg.solver.powell.x_tol > cfg.solver.eps:
        warnings.append(
            f"Powell x_tol={cfg.solver.powell.x_tol:g} exceeds eps={cfg.solver.eps:g}; "
            "it will be tightened to eps/100."
        )
    if cfg.law.name == "frozen-friction" and cfg.law.frozen_bound == 0.0:
        warnings.append("frozen_bound = 0 switches friction off.")
    if cfg.law.name != "linear":
        missing = [k for k in _REQUIRED_FOR_HS if getattr(cfg.law.constants, k) is None]
        if missing:
            warnings.append(
                f"Law constants {missing} not supplied; the smallness condition cannot be checked."
            )
    if cfg.material.lam == 0.0:
        warnings.append("lambda = 0: Poisson ratio zero.")
    if cfg.loads.f0 == (0.0, 0.0) and cfg.loads.f_n == (0.0, 0.0):
        warnings.append("All loads are zero; the solution is the zero field.")
    if cfg.runtime.deterministic and cfg.runtime.workers > 1:
        warnings.append("--deterministic runs sequentially; workers setting ignored.")

    _report("CONFIG VALIDATION", errors, warnings, raise_exceptions)
    return errors, warnings


def hvi_residual_check(
    solution: Solution,
    red: ReducedProblem,
    laws: ContactLawSet,
    system: AssembledSystem,
    dofmap: DofMap,
    n_dirs: int = 200,
    seed: int = 0,
    deltas: tuple[float, ...] = (1e-5, 1e-6, 1e-7),
) -> float:
    """Worst sampled value of <Au - f, v> + J°(gamma u, gamma u; gamma v).

    Directions: ``n_dirs`` random unit vectors on the free DOFs plus the
    positive and negative coordinate directions of every contact DOF. At a
    discrete solution every value is >= 0 up to the difference-quotient
    bias of the J° estimate, so a clearly negative return flags a non-solution.
    """
    u = np.asarray(solution.u, dtype=float)
    residual = system.K @ u - system.fvec
    functional = BoundaryFunctional(laws, dofmap.trace_x)
    gamma_u = dofmap.trace(u).values

    rng = np.random.default_rng(seed)
    directions: list[np.ndarray] = []
    for _ in range(n_dirs):
        v = rng.standard_normal(system.n_free)
        directions.append(v / np.linalg.norm(v))
    for pos in red.contact:
        for sign in (1.0, -1.0):
            e = np.zeros(system.n_free)
            e[pos] = sign
            directions.append(e)

    worst = np.inf
    for v in directions:
        slope = functional.directional_upper(gamma_u, gamma_u, dofmap.trace(v).values, deltas)
        worst = min(worst, float(residual @ v) + slope)
    logger.info(f"HVI residual check over {len(directions)} directions: worst {worst:.3e}")
    return float(worst)


@dataclass
class AdvisoryReport:
    m_A: float
    c_gamma: float
    H_s_holds: bool | None
    complete: bool
    missing: list[str] = field(default_factory=list)
    friction_bound_max: float | None = None
    friction_bound_ok: bool | None = None
    j_tau_lipschitz_ok: bool | None = None

    @property
    def status(self) -> str:
        return "complete" if self.complete else "incomplete"

    def lines(self) -> list[str]:
        out = [
            f"m_A = {self.m_A:.6g}",
            f"c_gamma (estimate) = {self.c_gamma:.6g}",
            f"status = {self.status}",
        ]
        if self.missing:
            out.append(f"missing constants = {', '.join(self.missing)}")
        out.append(
            "smallness condition m_A > (m_alpha + m_L) c_gamma^2: "
            + ("unknown" if self.H_s_holds is None else str(self.H_s_holds))
        )
        if self.friction_bound_max is not None:
            out.append(f"max h_tau on the contact boundary = {self.friction_bound_max:.6g}")
        if self.friction_bound_ok is not None:
            out.append(f"h_tau within [0, h_tau_bar]: {self.friction_bound_ok}")
        if self.j_tau_lipschitz_ok is not None:
            out.append(f"j_tau Lipschitz with c_tau (sampled): {self.j_tau_lipschitz_ok}")
        return out


def estimate_trace_constant(
    mesh: Mesh,
    system: AssembledSystem,
    dofmap: DofMap,
    dense_limit: int = 400,
) -> float:
    """Norm of the trace operator from V to L2 on the contact boundary.

    Square root of the largest eigenvalue of M x = mu B x, with M the trace
    Gram matrix. Dense solve up to ``dense_limit`` free DOFs, ARPACK above.
    """
    M = assemble_trace_gram(mesh, dofmap)
    if system.n_free <= dense_limit:
        mu = scipy.linalg.eigh(M.toarray(), system.B.toarray(), eigvals_only=True)[-1]
    else:
        mu = eigsh(M.tocsc(), k=1, M=system.B.tocsc(), which="LA", return_eigenvectors=False)[0]
    return float(np.sqrt(max(float(mu), 0.0)))


def constants_advisory(
    laws: ContactLawSet,
    system: AssembledSystem,
    dofmap: DofMap,
    mesh: Mesh,
    solution: Solution | None = None,
    seed: int = 0,
) -> AdvisoryReport:
    """Report the smallness condition m_A > (m_alpha + m_L) c_gamma^2 for the supplied constants.

    m_A = 2 eta for A(tau) = 2 eta tau + lambda tr(tau) I. Missing constants
    make the report incomplete; nothing here raises.
    """
    constants = laws.constants
    m_A = 2.0 * system.eta
    c_gamma = estimate_trace_constant(mesh, system, dofmap)

    missing = [k for k in _REQUIRED_FOR_HS if getattr(constants, k) is None]
    holds: bool | None = None
    if not missing:
        holds = bool(m_A > (constants.m_alpha + constants.m_L) * c_gamma**2)

    report = AdvisoryReport(
        m_A=m_A, c_gamma=c_gamma, H_s_holds=holds, complete=not missing, missing=missing
    )

    if solution is not None:
        bound = np.atleast_1d(laws.h_tau(solution.trace.normal))
        report.friction_bound_max = float(np.max(bound))
        if constants.h_tau_bar is not None:
            report.friction_bound_ok = bool(
                np.min(bound) >= 0.0 and report.friction_bound_max <= constants.h_tau_bar
            )

    if constants.c_tau is not None:
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((1000, 2))
        b = rng.standard_normal((1000, 2))
        gap = np.abs(laws.j_tau(a) - laws.j_tau(b))
        report.j_tau_lipschitz_ok = bool(
            np.all(gap <= constants.c_tau * np.linalg.norm(a - b, axis=1) + 1e-12)
        )

    if holds is False:
        logger.warning("Smallness condition fails for the supplied constants")
    return report
