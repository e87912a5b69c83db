"""The contact functional J(w, v) = integral over the contact boundary of
j_nu(v_nu) + h_tau(w_nu) j_tau(v_tau), evaluated by composite Gauss quadrature.

Traces are interpolated linearly along each contact edge before the laws are
applied pointwise, h_tau included. Each edge is cut where an interpolated
field crosses a kink of its law, so every 3-point Gauss rule sees a smooth
integrand.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from .laws import ContactLawSet, get_law_set
from .models import BoundaryTag, Mesh, TraceField

# 3-point Gauss-Legendre on [0, 1]
_G = np.sqrt(3.0 / 5.0)
GAUSS_POINTS = np.array([0.5 * (1.0 - _G), 0.5, 0.5 * (1.0 + _G)])
GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


def _crossings(nodal: np.ndarray, kinks: np.ndarray) -> np.ndarray:
    """Edge parameters s in (0, 1) where a piecewise-linear field hits each kink.

    Shape (n_edges, len(kinks)); edges without a crossing get s = 1.
    """
    a = nodal[:-1, None]
    slope = (nodal[1:] - nodal[:-1])[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (kinks[None, :] - a) / slope
    inside = (slope != 0.0) & (s > 0.0) & (s < 1.0)
    return np.where(inside, s, 1.0)


class BoundaryFunctional:
    """J over a fixed set of contact-boundary nodes.

    ``frozen(w)`` fixes the first argument and returns v -> J(w, v); the kink
    cuts of h_tau(w_nu) are computed once there.
    """

    def __init__(self, laws: ContactLawSet, trace_x: np.ndarray):
        self.laws = laws
        self.trace_x = np.asarray(trace_x, dtype=float)
        if self.trace_x.ndim != 1 or self.trace_x.size < 2:
            raise ValueError("Contact boundary needs at least two nodes")
        self.lengths = np.diff(self.trace_x)
        if np.any(self.lengths <= 0.0):
            raise ValueError("Contact nodes must be strictly increasing in x")
        self._normal_kinks = np.asarray(laws.normal_kinks, dtype=float)
        self._friction_kinks = np.asarray(laws.friction_kinks, dtype=float)
        self._tangential_kinks = np.asarray(laws.tangential_kinks, dtype=float)

    @property
    def n_nodes(self) -> int:
        return int(self.trace_x.size)

    @property
    def n_edges(self) -> int:
        return int(self.lengths.size)

    def _check(self, field: np.ndarray) -> np.ndarray:
        field = np.asarray(field, dtype=float)
        if field.shape != (self.n_nodes, 2):
            raise ValueError(
                f"Trace has shape {field.shape}, expected ({self.n_nodes}, 2) contact nodes"
            )
        return field

    def _integrate(self, w_nu: np.ndarray, w_cuts: np.ndarray, v: np.ndarray) -> float:
        v_nu = -v[:, 1]
        v_x = v[:, 0]
        n = self.n_edges
        cuts = np.concatenate(
            [
                np.zeros((n, 1)),
                np.ones((n, 1)),
                w_cuts,
                _crossings(v_nu, self._normal_kinks),
                _crossings(v_x, self._tangential_kinks),
            ],
            axis=1,
        )
        cuts.sort(axis=1)
        width = np.diff(cuts, axis=1)  # (n_edges, pieces)
        s = cuts[:, :-1, None] + width[..., None] * GAUSS_POINTS  # (n_edges, pieces, 3)
        weights = self.lengths[:, None, None] * width[..., None] * GAUSS_WEIGHTS

        def at(f: np.ndarray) -> np.ndarray:
            return f[:-1, None, None] * (1.0 - s) + f[1:, None, None] * s

        vx = at(v_x)
        v_tau = np.stack([vx, np.zeros_like(vx)], axis=-1)
        density = self.laws.j_nu(at(v_nu)) + self.laws.h_tau(at(w_nu)) * self.laws.j_tau(v_tau)
        return float(np.sum(weights * density))

    def frozen(self, w: np.ndarray) -> Callable[[np.ndarray], float]:
        """v -> J(w, v) with w fixed."""
        w = self._check(w)
        if self.laws.is_trivial:

            def zero(v: np.ndarray) -> float:
                self._check(v)
                return 0.0

            return zero

        w_nu = -w[:, 1]
        w_cuts = _crossings(w_nu, self._friction_kinks)

        def J_w(v: np.ndarray) -> float:
            return self._integrate(w_nu, w_cuts, self._check(v))

        return J_w

    def value(self, w: np.ndarray, v: np.ndarray) -> float:
        return self.frozen(w)(v)

    def directional_upper(
        self, w: np.ndarray, v: np.ndarray, d: np.ndarray, deltas: Sequence[float]
    ) -> float:
        """max over delta of [J(w, v + delta d) - J(w, v)] / delta, base point fixed."""
        steps = _checked_steps(deltas)
        J_w = self.frozen(w)
        v = self._check(v)
        d = self._check(d)
        base = J_w(v)
        return max((J_w(v + delta * d) - base) / delta for delta in steps)


def _aligned(mesh: Mesh, w: TraceField, v: TraceField) -> None:
    n_trace = mesh.nodes_on(BoundaryTag.CONTACT).size
    if len(w) != n_trace or len(v) != n_trace:
        raise ValueError(
            f"Trace lengths ({len(w)}, {len(v)}) do not match {n_trace} contact nodes"
        )
    if not (np.array_equal(w.x, v.x)):
        raise ValueError("Trace fields are defined on different contact nodes")


def eval_J(
    mesh: Mesh, w: TraceField, v: TraceField, laws: ContactLawSet | None = None
) -> float:
    """J(w, v) over all contact edges of ``mesh``."""
    laws = laws or get_law_set("normal-compliance")
    _aligned(mesh, w, v)
    return BoundaryFunctional(laws, v.x).value(w.values, v.values)


def directional_upper(
    mesh: Mesh,
    w: TraceField,
    v: TraceField,
    d: TraceField,
    deltas: Sequence[float],
    laws: ContactLawSet | None = None,
) -> float:
    """Upper estimate of the generalized directional derivative of J(w, .) at v along d.

    Returns max over the steps of [J(w, v + delta d) - J(w, v)] / delta. The
    base point stays fixed, so this underestimates the lim sup at points
    where nearby base points would see a larger slope.

    Raises:
        ValueError: empty, non-positive or non-decreasing step set.
    """
    laws = laws or get_law_set("normal-compliance")
    _aligned(mesh, w, v)
    _aligned(mesh, w, d)
    return BoundaryFunctional(laws, v.x).directional_upper(w.values, v.values, d.values, deltas)


def _checked_steps(deltas: Sequence[float]) -> np.ndarray:
    steps = np.asarray(list(deltas), dtype=float)
    if steps.size == 0:
        raise ValueError("directional_upper needs at least one step")
    if np.any(steps <= 0.0) or np.any(np.diff(steps) >= 0.0):
        raise ValueError("Steps must be positive and strictly decreasing")
    return steps
