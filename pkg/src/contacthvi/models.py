from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class BoundaryTag(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    CONTACT = "contact"


@dataclass(frozen=True)
class Mesh:
    """Uniform triangulation of [0, 2] x [0, 1] with tagged boundary edges.

    Node k = j * (nx + 1) + i sits at (i / ny, j / ny). Arrays are not copied;
    treat them as read-only.
    """

    nx: int
    ny: int
    nodes: np.ndarray  # (n_nodes, 2)
    triangles: np.ndarray  # (n_triangles, 3), counterclockwise
    boundary_edges: np.ndarray  # (n_edges, 2)
    edge_tags: tuple[BoundaryTag, ...]

    @property
    def h(self) -> float:
        return 1.0 / self.ny

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def node_index(self, i: int, j: int) -> int:
        return j * (self.nx + 1) + i

    def edges_with(self, tag: BoundaryTag) -> np.ndarray:
        mask = np.array([t is tag for t in self.edge_tags], dtype=bool)
        return self.boundary_edges[mask]

    def nodes_on(self, tag: BoundaryTag) -> np.ndarray:
        """Sorted indices of nodes touching at least one edge with ``tag``."""
        return np.unique(self.edges_with(tag))

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


@dataclass(frozen=True)
class TraceField:
    """Displacement pairs at the contact-boundary nodes, ordered by increasing x.

    On the contact boundary y = 0 the outward normal is (0, -1), so the
    normal component is -u_y and the tangential part is (u_x, 0).
    """

    x: np.ndarray  # (n,)
    values: np.ndarray  # (n, 2)

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def normal(self) -> np.ndarray:
        return -self.values[:, 1]

    @property
    def tangential(self) -> np.ndarray:
        out = np.zeros_like(self.values)
        out[:, 0] = self.values[:, 0]
        return out

    @classmethod
    def from_components(
        cls, x: np.ndarray, normal: np.ndarray, tangential: np.ndarray
    ) -> TraceField:
        """Rebuild u = u_nu * nu + u_tau with nu = (0, -1)."""
        values = np.array(tangential, dtype=float, copy=True)
        values[:, 1] = values[:, 1] - np.asarray(normal, dtype=float)
        return cls(np.asarray(x, dtype=float), values)

    @classmethod
    def zeros(cls, x: np.ndarray) -> TraceField:
        return cls(np.asarray(x, dtype=float), np.zeros((len(x), 2)))


@dataclass
class Solution:
    u: np.ndarray  # free-DOF displacement vector
    trace: TraceField
    outer_iters: int
    history: list[float] = field(default_factory=list)  # ||u_k - u_{k-1}||_V
    converged: bool = False
    objective_values: list[float] = field(default_factory=list)  # L(u_{k-1}, u_k)
    start_values: list[float] = field(default_factory=list)  # L(u_{k-1}, u_{k-1})
    inner_sweeps: list[int] = field(default_factory=list)
    inner_converged: list[bool] = field(default_factory=list)

    def contraction_ratios(self) -> list[float]:
        h = self.history
        return [h[k + 1] / h[k] for k in range(len(h) - 1) if h[k] > 0.0]


@dataclass
class ConvergenceRecord:
    h: list[float]
    errors: list[float]
    slope: float
    slope_excluding_coarsest: float | None
    reference_h: float
    complete: bool = True
    note: str | None = None

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.h, self.errors))
