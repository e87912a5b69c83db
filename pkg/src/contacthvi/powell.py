"""Derivative-free minimization: Powell's conjugate direction method.

Line searches bracket by geometric expansion and then shrink the bracket by
golden-section steps. No parabolic interpolation is used, since the
objectives here have kinks.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from math import sqrt

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

INV_PHI = (sqrt(5.0) - 1.0) / 2.0  # 0.618...
EPS = float(np.finfo(float).eps)

Objective = Callable[[np.ndarray], float]
LineFactory = Callable[[np.ndarray, np.ndarray], Callable[[float], float]]


class LineSearchError(RuntimeError):
    """Raised when no bracket is found: the objective looks unbounded below."""


class LineSearchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    initial_step: float = Field(default=1e-2, gt=0, description="First trial step")
    bracket_growth: float = Field(default=2.0, gt=1.0, description="Expansion factor")
    golden_tol: float = Field(default=1e-10, gt=0, description="Final bracket width")
    max_expansions: int = Field(default=80, ge=1, description="Expansion cap")


class PowellConfig(BaseModel):
    """Tolerances of the outer direction-set iteration.

    A sweep stops the search when it moves no coordinate by more than
    ``x_tol`` or when its decrease is at most ``f_tol`` relative to |f|, that
    is 2 (f_start - f_end) <= f_tol (|f_start| + |f_end|). ``max_sweeps`` of
    None means 200 * n for an n-dimensional problem.
    """

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    x_tol: float = Field(default=1e-8, gt=0, description="Max-norm sweep displacement to stop")
    f_tol: float = Field(default=1e-14, gt=0, description="Sweep decrease to stop, relative to |f|")
    max_sweeps: int | None = Field(default=None, ge=1, description="Direction-set sweeps")
    line_search: LineSearchConfig = Field(default_factory=LineSearchConfig)

    def sweep_cap(self, n: int) -> int:
        return self.max_sweeps if self.max_sweeps is not None else 200 * max(n, 1)


@dataclass
class PowellResult:
    x: np.ndarray
    fun: float
    sweeps: int
    converged: bool
    history: list[float] = field(default_factory=list)  # objective after each sweep
    evaluations: int = 0


def _bracket(f, t0: float, f0: float, cfg: LineSearchConfig):
    """Return (a, b, c) with a < c and f(b) <= min(f(a), f(c)), plus the evaluated points."""
    step = cfg.initial_step
    seen = [(t0, f0)]
    t1 = t0 + step
    f1 = f(t1)
    seen.append((t1, f1))
    if f1 > f0:
        tm = t0 - step
        fm = f(tm)
        seen.append((tm, fm))
        if fm >= f0:
            return (tm, t0, t1), seen
        step = -step
        t1, f1 = tm, fm

    a, fa = t0, f0
    b, fb = t1, f1
    c = b + cfg.bracket_growth * (b - a)
    fc = f(c)
    seen.append((c, fc))
    expansions = 1
    while fc < fb:
        if expansions >= cfg.max_expansions:
            raise LineSearchError(
                f"No bracket after {expansions} expansions (last step {c - t0:.3e}); "
                "objective appears unbounded below along this direction"
            )
        a, fa = b, fb
        b, fb = c, fc
        c = b + cfg.bracket_growth * (b - a)
        fc = f(c)
        seen.append((c, fc))
        expansions += 1
    lo, hi = (a, c) if a < c else (c, a)
    return (lo, b, hi), seen


def line_minimize(
    f: Callable[[float], float],
    t0: float = 0.0,
    cfg: LineSearchConfig | None = None,
    f0: float | None = None,
) -> tuple[float, float]:
    """Minimize a 1D function starting from ``t0``.

    Brackets a minimum by geometric expansion, then runs golden-section
    search until the bracket is narrower than ``cfg.golden_tol``. Returns the
    best point evaluated along the way.

    Raises:
        LineSearchError: if bracketing fails after ``cfg.max_expansions``.
    """
    cfg = cfg or LineSearchConfig()
    f0 = f(t0) if f0 is None else f0
    (lo, _, hi), seen = _bracket(f, t0, f0, cfg)
    best_t, best_f = min(seen, key=lambda p: p[1])

    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1 = f(x1)
    f2 = f(x2)
    # width floor: brackets far from the origin cannot shrink below a few ulps
    while hi - lo > max(cfg.golden_tol, 4.0 * EPS * max(abs(lo), abs(hi))):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
        if f1 < best_f:
            best_t, best_f = x1, f1
        if f2 < best_f:
            best_t, best_f = x2, f2
    return best_t, best_f


def powell_minimize(
    f: Objective,
    x0: np.ndarray,
    cfg: PowellConfig | None = None,
    line: LineFactory | None = None,
) -> PowellResult:
    """Powell's conjugate direction method.

    Each sweep line-minimizes along every direction of the set, then the
    direction that produced the largest decrease is dropped and the sweep
    displacement is appended (and searched along). The set is reset to the
    coordinate basis every n sweeps.

    Args:
        f: objective on R^n.
        x0: start point.
        cfg: tolerances.
        line: optional factory ``line(x, d)`` returning t -> f(x + t d) in a
            cheaper form than calling ``f`` on the full vector.

    Returns:
        PowellResult; ``converged`` is False when ``max_sweeps`` ran out, in
        which case ``x`` is the best point found.
    """
    cfg = cfg or PowellConfig()
    x = np.array(x0, dtype=float, copy=True)
    n = x.size
    evaluations = 0

    def restrict(point: np.ndarray, direction: np.ndarray) -> Callable[[float], float]:
        if line is not None:
            phi = line(point, direction)
        else:

            def phi(t: float) -> float:
                return f(point + t * direction)

        def counted(t: float) -> float:
            nonlocal evaluations
            evaluations += 1
            return float(phi(t))

        return counted

    fx = float(f(x))
    evaluations += 1
    if n == 0:
        return PowellResult(x=x, fun=fx, sweeps=0, converged=True, evaluations=evaluations)

    directions = np.eye(n)
    history: list[float] = []
    max_sweeps = cfg.sweep_cap(n)
    ls = cfg.line_search

    for sweep in range(1, max_sweeps + 1):
        if sweep > 1 and (sweep - 1) % n == 0:
            directions = np.eye(n)
        x_start = x.copy()
        f_start = fx
        biggest_drop = 0.0
        biggest_idx = 0
        for i in range(n):
            d = directions[i]
            t, ft = line_minimize(restrict(x, d), 0.0, ls, f0=fx)
            if ft < fx:
                if fx - ft > biggest_drop:
                    biggest_drop = fx - ft
                    biggest_idx = i
                x = x + t * d
                fx = ft

        displacement = x - x_start
        norm = float(np.linalg.norm(displacement))
        if norm > 0.0:
            d_new = displacement / norm
            t, ft = line_minimize(restrict(x, d_new), 0.0, ls, f0=fx)
            if ft < fx:
                x = x + t * d_new
                fx = ft
            directions = np.vstack(
                [np.delete(directions, biggest_idx, axis=0), d_new[None, :]]
            )

        history.append(fx)
        move = float(np.max(np.abs(x - x_start)))
        decrease = f_start - fx
        logger.debug(f"Powell sweep {sweep}: f={fx:.12e} move={move:.3e} decrease={decrease:.3e}")
        if move <= cfg.x_tol or 2.0 * decrease <= cfg.f_tol * (abs(f_start) + abs(fx)) + 1e-300:
            return PowellResult(
                x=x,
                fun=fx,
                sweeps=sweep,
                converged=True,
                history=history,
                evaluations=evaluations,
            )

    logger.warning(f"Powell did not converge within {max_sweeps} sweeps (f={fx:.6e})")
    return PowellResult(
        x=x, fun=fx, sweeps=max_sweeps, converged=False, history=history, evaluations=evaluations
    )
