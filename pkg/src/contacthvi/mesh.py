"""Structured triangulations of the rectangle [0, 2] x [0, 1].

Boundary layout: x = 0 is clamped (Dirichlet), y = 0 is the contact
boundary, the top edge y = 1 and the right edge x = 2 carry tractions
(Neumann). The corner (0, 0) belongs to a contact edge but its node is
clamped; that is resolved by the DOF map, not here.
"""

from __future__ import annotations

import logging

import numpy as np

from .models import BoundaryTag, Mesh

logger = logging.getLogger(__name__)

X_LENGTH = 2.0
Y_LENGTH = 1.0


class MeshError(ValueError):
    """Raised for unsupported mesh parameters or non-nested refinements."""


def build_uniform_mesh(nx: int, ny: int) -> Mesh:
    """Square-cell mesh with ``nx`` x ``ny`` cells, each split along its
    bottom-left to top-right diagonal.

    Raises:
        MeshError: zero/negative counts, or nx != 2 * ny.
    """
    if nx < 1 or ny < 1:
        raise MeshError(f"Cell counts must be >= 1, got nx={nx}, ny={ny}")
    if nx != 2 * ny:
        raise MeshError(f"Only square cells are supported: need nx = 2 * ny, got nx={nx}, ny={ny}")

    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1))
    # integer / ny keeps refined coordinates bit-identical to coarse ones
    nodes = np.column_stack([ii.ravel() / ny, jj.ravel() / ny])

    def idx(i, j):
        return j * (nx + 1) + i

    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny))
    ci = ci.ravel()
    cj = cj.ravel()
    n00 = idx(ci, cj)
    n10 = idx(ci + 1, cj)
    n01 = idx(ci, cj + 1)
    n11 = idx(ci + 1, cj + 1)
    lower = np.column_stack([n00, n10, n11])
    upper = np.column_stack([n00, n11, n01])
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    edges: list[tuple[int, int]] = []
    tags: list[BoundaryTag] = []
    for i in range(nx):
        edges.append((idx(i, 0), idx(i + 1, 0)))
        tags.append(BoundaryTag.CONTACT)
    for j in range(ny):
        edges.append((idx(nx, j), idx(nx, j + 1)))
        tags.append(BoundaryTag.NEUMANN)
    for i in range(nx, 0, -1):
        edges.append((idx(i, ny), idx(i - 1, ny)))
        tags.append(BoundaryTag.NEUMANN)
    for j in range(ny, 0, -1):
        edges.append((idx(0, j), idx(0, j - 1)))
        tags.append(BoundaryTag.DIRICHLET)

    mesh = Mesh(
        nx=nx,
        ny=ny,
        nodes=nodes,
        triangles=triangles,
        boundary_edges=np.array(edges, dtype=np.int64),
        edge_tags=tuple(tags),
    )
    logger.debug(
        f"Built mesh nx={nx} ny={ny}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles"
    )
    return mesh


def mesh_for_level(level: int) -> Mesh:
    """Mesh with h = 2**-level (level 0 is the single-row h = 1 mesh)."""
    if level < 0:
        raise MeshError(f"Refinement level must be >= 0, got {level}")
    ny = 2**level
    return build_uniform_mesh(2 * ny, ny)


def refine(mesh: Mesh) -> Mesh:
    """Uniform refinement: halves h, every coarse node survives at identical coordinates."""
    return build_uniform_mesh(2 * mesh.nx, 2 * mesh.ny)


def refinement_ratio(coarse: Mesh, fine: Mesh) -> int:
    """Integer factor r with fine.ny = r * coarse.ny, r a power of two.

    Raises:
        MeshError: if ``fine`` was not obtained from ``coarse`` by repeated refine().
    """
    if fine.ny % coarse.ny != 0 or fine.nx != 2 * fine.ny or coarse.nx != 2 * coarse.ny:
        raise MeshError(f"Meshes are not nested: coarse ny={coarse.ny}, fine ny={fine.ny}")
    r = fine.ny // coarse.ny
    if r & (r - 1):
        raise MeshError(f"Refinement ratio {r} is not a power of two")
    return r
