"""Fixed-point iteration u_k = argmin_v L(u_{k-1}, v) on the condensed problem.

L(w, v) = 0.5 <Av, v> - <f, v> + J(gamma w, gamma v). Only the contact DOFs
enter J, so the interior DOFs are eliminated exactly (see fem.schur_reduce)
and Powell's method searches over the contact DOFs alone.
"""

from __future__ import annotations

import logging

import numpy as np

from .config import SolverConfig
from .contact import BoundaryFunctional
from .fem import AssembledSystem, DofMap, ReducedProblem, solve_linear, vnorm
from .laws import ContactLawSet
from .models import Solution
from .powell import powell_minimize

logger = logging.getLogger(__name__)


class ReducedObjective:
    """v_c -> L(w, v) minimized over the interior DOFs, for fixed contact values w_c."""

    def __init__(self, red: ReducedProblem, laws: ContactLawSet, w_c: np.ndarray):
        w_c = np.asarray(w_c, dtype=float)
        if w_c.shape != (red.n_contact,):
            raise ValueError(f"Expected {red.n_contact} contact DOFs, got shape {w_c.shape}")
        self.red = red
        self.functional = BoundaryFunctional(laws, red.trace_x)
        self._J = self.functional.frozen(self._trace(w_c))

    def _trace(self, v_c: np.ndarray) -> np.ndarray:
        # first trace node is the clamped corner
        values = np.zeros((self.functional.n_nodes, 2))
        values[1:] = v_c.reshape(-1, 2)
        return values

    def contact_energy(self, v_c: np.ndarray) -> float:
        return self._J(self._trace(v_c))

    def __call__(self, v_c: np.ndarray) -> float:
        v_c = np.asarray(v_c, dtype=float)
        if v_c.shape != (self.red.n_contact,):
            raise ValueError(f"Expected {self.red.n_contact} contact DOFs, got shape {v_c.shape}")
        return self.red.quadratic(v_c) + self.contact_energy(v_c)

    def along(self, x: np.ndarray, d: np.ndarray):
        """t -> value at x + t d with the quadratic part expanded in closed form."""
        S = self.red.S
        Sd = S @ d
        q0 = self.red.quadratic(x)
        q1 = float((S @ x - self.red.g) @ d)
        q2 = 0.5 * float(d @ Sd)
        base = self._trace(x)
        step = self._trace(d)

        def phi(t: float) -> float:
            return q0 + t * (q1 + t * q2) + self._J(base + t * step)

        return phi


def reduced_objective(
    red: ReducedProblem, laws: ContactLawSet, w_c: np.ndarray, v_c: np.ndarray
) -> float:
    """0.5 v_c'S v_c - g'v_c + offset + J(gamma w, gamma v)."""
    return ReducedObjective(red, laws, w_c)(v_c)


def initial_guess(system: AssembledSystem) -> np.ndarray:
    """Solution of K u = f: the body with a traction-free contact boundary."""
    return solve_linear(system)


def fixed_point_solve(
    red: ReducedProblem,
    laws: ContactLawSet,
    system: AssembledSystem,
    dofmap: DofMap,
    cfg: SolverConfig | None = None,
) -> Solution:
    """Repeat u_k = argmin L(u_{k-1}, .) until ||u_k - u_{k-1}||_V <= eps.

    Non-convergence within ``max_outer`` returns the last iterate with
    ``converged=False``. Line-search failures of the inner minimizer propagate.
    """
    cfg = cfg or SolverConfig()
    inner = cfg.inner_config()

    u_prev = initial_guess(system) if cfg.start == "free" else np.zeros(system.n_free)
    w_c = red.restrict(u_prev)
    history: list[float] = []
    objective_values: list[float] = []
    start_values: list[float] = []
    inner_sweeps: list[int] = []
    inner_converged: list[bool] = []
    converged = False
    k = 0

    for k in range(1, cfg.max_outer + 1):
        objective = ReducedObjective(red, laws, w_c)
        start_values.append(objective(w_c))
        x0 = w_c if cfg.warm_start else np.zeros(red.n_contact)
        result = powell_minimize(objective, x0, inner, line=objective.along)
        u_k = red.reconstruct(result.x)
        diff = vnorm(system, u_k - u_prev)

        history.append(diff)
        objective_values.append(result.fun)
        inner_sweeps.append(result.sweeps)
        inner_converged.append(result.converged)
        logger.info(
            f"Outer iteration {k}: ||u_k - u_k-1||_V = {diff:.3e}, L = {result.fun:.10e}, "
            f"{result.sweeps} Powell sweeps"
        )
        if not result.converged:
            logger.warning(f"Inner minimization did not converge at outer iteration {k}")

        u_prev = u_k
        w_c = result.x
        if diff <= cfg.eps:
            converged = True
            break

    if not converged:
        logger.warning(f"Fixed-point iteration stopped after {k} iterations without reaching eps")

    return Solution(
        u=u_prev,
        trace=dofmap.trace(u_prev),
        outer_iters=k,
        history=history,
        converged=converged,
        objective_values=objective_values,
        start_values=start_values,
        inner_sweeps=inner_sweeps,
        inner_converged=inner_converged,
    )
