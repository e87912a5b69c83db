"""P1 finite elements for plane linear elasticity.

Builds the stiffness operator, the load vector, the strain Gram matrix that
defines the V-norm, and the static condensation of the quadratic energy onto
the contact-boundary degrees of freedom.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .mesh import refinement_ratio
from .models import BoundaryTag, Mesh, Solution, TraceField

logger = logging.getLogger(__name__)

AREA_TOL = 1e-14


class AssemblyError(RuntimeError):
    """Raised for degenerate elements or a non-coercive assembled operator."""


# ---------------------------------------------------------------------------
# DOF bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DofMap:
    """Node k owns DOFs (2k, 2k + 1).

    ``free`` lists the unconstrained global DOFs in increasing order; the
    free-DOF vector used everywhere else is indexed by position in ``free``.
    ``contact`` and ``interior`` are positions into that vector. Contact DOFs
    are ordered node by node along increasing x, x-component first.
    """

    n_nodes: int
    dirichlet: np.ndarray  # global DOFs fixed to zero
    free: np.ndarray  # global DOFs, sorted
    contact: np.ndarray  # positions in the free vector
    interior: np.ndarray  # positions in the free vector
    contact_nodes: np.ndarray  # free nodes on the contact boundary, by increasing x
    trace_nodes: np.ndarray  # all contact-boundary nodes (clamped corner included)
    trace_x: np.ndarray  # x coordinates of trace_nodes

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def n_free(self) -> int:
        return int(self.free.shape[0])

    def expand(self, u_free: np.ndarray) -> np.ndarray:
        """Nodal (n_nodes, 2) field with clamped DOFs set to zero."""
        u_free = np.asarray(u_free, dtype=float)
        if u_free.shape != (self.n_free,):
            raise ValueError(f"Expected {self.n_free} free DOFs, got shape {u_free.shape}")
        full = np.zeros(self.n_dofs)
        full[self.free] = u_free
        return full.reshape(-1, 2)

    def restrict(self, nodal: np.ndarray) -> np.ndarray:
        return np.asarray(nodal, dtype=float).reshape(-1)[self.free]

    def trace(self, u_free: np.ndarray) -> TraceField:
        """Trace operator: the displacement on the contact boundary."""
        nodal = self.expand(u_free)
        return TraceField(self.trace_x.copy(), nodal[self.trace_nodes])


def build_dofmap(mesh: Mesh) -> DofMap:
    """Partition DOFs into clamped (x = 0), contact (y = 0, x > 0) and interior."""
    x = mesh.nodes[:, 0]
    y = mesh.nodes[:, 1]
    clamped_nodes = np.flatnonzero(x == 0.0)
    dirichlet = np.sort(np.concatenate([2 * clamped_nodes, 2 * clamped_nodes + 1]))

    is_free = np.ones(2 * mesh.n_nodes, dtype=bool)
    is_free[dirichlet] = False
    free = np.flatnonzero(is_free)
    position = np.full(2 * mesh.n_nodes, -1, dtype=np.int64)
    position[free] = np.arange(free.shape[0])

    trace_nodes = mesh.nodes_on(BoundaryTag.CONTACT)
    trace_nodes = trace_nodes[np.argsort(x[trace_nodes], kind="stable")]
    if np.any(y[trace_nodes] != 0.0):
        raise AssemblyError("Contact edges must lie on y = 0")
    contact_nodes = trace_nodes[x[trace_nodes] > 0.0]

    contact_global = np.column_stack([2 * contact_nodes, 2 * contact_nodes + 1]).ravel()
    contact = position[contact_global]
    in_contact = np.zeros(free.shape[0], dtype=bool)
    in_contact[contact] = True
    interior = np.flatnonzero(~in_contact)

    return DofMap(
        n_nodes=mesh.n_nodes,
        dirichlet=dirichlet,
        free=free,
        contact=contact,
        interior=interior,
        contact_nodes=contact_nodes,
        trace_nodes=trace_nodes,
        trace_x=x[trace_nodes].astype(float),
    )


# ---------------------------------------------------------------------------
# Element and global assembly
# ---------------------------------------------------------------------------


def constitutive_matrix(lam: float, eta: float) -> np.ndarray:
    """A(tau) = 2 eta tau + lam tr(tau) I in Voigt form (e11, e22, 2 e12)."""
    return np.array(
        [
            [2.0 * eta + lam, lam, 0.0],
            [lam, 2.0 * eta + lam, 0.0],
            [0.0, 0.0, eta],
        ]
    )


def _strain_operators(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched P1 strain-displacement matrices.

    Args:
        coords: (n_el, 3, 2) vertex coordinates.

    Returns:
        (areas, B) with B of shape (n_el, 3, 6), DOF order (u0x, u0y, u1x, u1y, u2x, u2y).
    """
    x = coords[:, :, 0]
    y = coords[:, :, 1]
    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    areas = 0.5 * det
    if np.any(np.abs(areas) <= AREA_TOL):
        raise AssemblyError("Degenerate (zero-area) triangle")
    # gradients of barycentric coordinates
    dy = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    dx = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    dphidx = dy / det[:, None]
    dphidy = dx / det[:, None]
    B = np.zeros((coords.shape[0], 3, 6))
    B[:, 0, 0::2] = dphidx
    B[:, 1, 1::2] = dphidy
    B[:, 2, 0::2] = dphidy
    B[:, 2, 1::2] = dphidx
    return np.abs(areas), B


def element_stiffness(tri_coords: np.ndarray, lam: float, eta: float) -> np.ndarray:
    """6x6 stiffness of one P1 triangle: area * A(eps(phi_j)) : eps(phi_i).

    Raises:
        AssemblyError: for a zero-area triangle.
        ValueError: for non-positive Lame coefficients.
    """
    if lam < 0 or eta <= 0:
        raise ValueError(f"Lame coefficients must satisfy lam >= 0, eta > 0 (got {lam}, {eta})")
    coords = np.asarray(tri_coords, dtype=float).reshape(1, 3, 2)
    areas, B = _strain_operators(coords)
    D = constitutive_matrix(lam, eta)
    return areas[0] * B[0].T @ D @ B[0]


def _element_dofs(triangles: np.ndarray) -> np.ndarray:
    return np.stack([2 * triangles, 2 * triangles + 1], axis=2).reshape(-1, 6)


def assemble_operator(mesh: Mesh, lam: float, eta: float) -> sp.csr_matrix:
    """Global stiffness on all DOFs (no boundary conditions)."""
    coords = mesh.nodes[mesh.triangles]
    areas, B = _strain_operators(coords)
    D = constitutive_matrix(lam, eta)
    Ke = areas[:, None, None] * np.einsum("eki,kl,elj->eij", B, D, B)
    dofs = _element_dofs(mesh.triangles)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_nodes
    A = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # duplicate summation order is not symmetric; average with the transpose
    return (0.5 * (A + A.T)).tocsr()


def assemble_load(mesh: Mesh, f0: tuple[float, float], fN: tuple[float, float]) -> np.ndarray:
    """Load vector on all DOFs for constant body force and traction densities."""
    load = np.zeros((mesh.n_nodes, 2))
    areas = np.abs(mesh.signed_areas())
    f0 = np.asarray(f0, dtype=float)
    fN = np.asarray(fN, dtype=float)
    share = np.repeat(areas / 3.0, 3)
    np.add.at(load, mesh.triangles.ravel(), share[:, None] * f0[None, :])
    neumann = mesh.edges_with(BoundaryTag.NEUMANN)
    if neumann.size:
        p = mesh.nodes[neumann]
        lengths = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        half = np.repeat(lengths / 2.0, 2)
        np.add.at(load, neumann.ravel(), half[:, None] * fN[None, :])
    return load.reshape(-1)


@dataclass(frozen=True)
class AssembledSystem:
    """Stiffness, load and V-norm Gram matrix restricted to the free DOFs."""

    K: sp.csr_matrix
    fvec: np.ndarray
    B: sp.csr_matrix
    load_full: np.ndarray  # load on all DOFs, before clamping
    lam: float
    eta: float

    @property
    def n_free(self) -> int:
        return int(self.fvec.shape[0])

    def energy(self, v: np.ndarray) -> float:
        """0.5 v'Kv - f'v, the smooth part of the contact energy."""
        return float(0.5 * v @ (self.K @ v) - self.fvec @ v)


def assemble(
    mesh: Mesh,
    dofmap: DofMap,
    lam: float,
    eta: float,
    f0: tuple[float, float],
    fN: tuple[float, float],
) -> AssembledSystem:
    """Assemble K, f and B with the clamped DOFs eliminated (their values are zero)."""
    if dofmap.n_nodes != mesh.n_nodes:
        raise ValueError("DOF map does not belong to this mesh")
    if lam < 0 or eta <= 0:
        raise ValueError(f"Lame coefficients must satisfy lam >= 0, eta > 0 (got {lam}, {eta})")
    free = dofmap.free
    K_full = assemble_operator(mesh, lam, eta)
    B_full = assemble_operator(mesh, 0.0, 0.5)
    load = assemble_load(mesh, f0, fN)
    K = K_full[free][:, free].tocsr()
    B = B_full[free][:, free].tocsr()
    logger.debug(f"Assembled {dofmap.n_free} free DOFs, nnz(K)={K.nnz}")
    return AssembledSystem(K=K, fvec=load[free], B=B, load_full=load, lam=lam, eta=eta)


def vnorm(system: AssembledSystem, v: np.ndarray) -> float:
    """||v||_V = (eps(v), eps(v))^(1/2) for a free-DOF vector."""
    v = np.asarray(v, dtype=float)
    if v.shape != (system.n_free,):
        raise ValueError(f"Expected a vector of length {system.n_free}, got shape {v.shape}")
    return float(np.sqrt(max(v @ (system.B @ v), 0.0)))


def factorize(matrix: sp.spmatrix, what: str = "stiffness"):
    """Sparse LU of an SPD matrix; failure means the assembly is not coercive."""
    try:
        return splu(sp.csc_matrix(matrix))
    except RuntimeError as e:
        raise AssemblyError(f"Factorization of the {what} matrix failed: {e}") from e


def solve_linear(system: AssembledSystem, rhs: np.ndarray | None = None) -> np.ndarray:
    rhs = system.fvec if rhs is None else rhs
    return np.asarray(factorize(system.K).solve(np.asarray(rhs, dtype=float)))


# ---------------------------------------------------------------------------
# Static condensation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedProblem:
    """Quadratic energy condensed onto the contact DOFs.

    For every contact vector v_c,
        0.5 v_c'S v_c - g'v_c + offset = min over v_I of 0.5 v'Kv - f'v,
    attained at v_I = interior_load - interior_map @ v_c.
    """

    S: np.ndarray
    g: np.ndarray
    offset: float
    interior_map: np.ndarray  # K_II^-1 K_IC
    interior_load: np.ndarray  # K_II^-1 f_I
    contact: np.ndarray
    interior: np.ndarray
    n_free: int
    trace_x: np.ndarray

    @property
    def n_contact(self) -> int:
        return int(self.g.shape[0])

    def quadratic(self, v_c: np.ndarray) -> float:
        return float(0.5 * v_c @ (self.S @ v_c) - self.g @ v_c + self.offset)

    def reconstruct(self, v_c: np.ndarray) -> np.ndarray:
        """Free-DOF vector from contact values, interior DOFs by back-substitution."""
        v_c = np.asarray(v_c, dtype=float)
        if v_c.shape != (self.n_contact,):
            raise ValueError(f"Expected {self.n_contact} contact DOFs, got shape {v_c.shape}")
        u = np.empty(self.n_free)
        u[self.contact] = v_c
        u[self.interior] = self.interior_load - self.interior_map @ v_c
        return u

    def restrict(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u, dtype=float)[self.contact].copy()


def schur_reduce(system: AssembledSystem, dofmap: DofMap) -> ReducedProblem:
    """Eliminate the interior DOFs from the quadratic energy.

    Raises:
        AssemblyError: if K_II cannot be factored or S is not positive definite.
    """
    C = dofmap.contact
    I = dofmap.interior
    K = system.K.tocsr()
    f = system.fvec
    K_CC = K[C][:, C].toarray()
    if I.size:
        K_II = K[I][:, I]
        K_IC = K[I][:, C].toarray()
        lu = factorize(K_II, "interior stiffness")
        X = np.asarray(lu.solve(K_IC)).reshape(I.size, C.size)
        y = np.asarray(lu.solve(f[I]))
        S = K_CC - K_IC.T @ X
        g = f[C] - X.T @ f[I]
        offset = -0.5 * float(f[I] @ y)
    else:
        X = np.zeros((0, C.size))
        y = np.zeros(0)
        S = K_CC
        g = f[C].copy()
        offset = 0.0
    S = 0.5 * (S + S.T)
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError as e:
        raise AssemblyError("Schur complement is not positive definite") from e
    logger.debug(f"Condensed {I.size} interior DOFs onto {C.size} contact DOFs")
    return ReducedProblem(
        S=S,
        g=g,
        offset=offset,
        interior_map=X,
        interior_load=y,
        contact=C.copy(),
        interior=I.copy(),
        n_free=system.n_free,
        trace_x=dofmap.trace_x.copy(),
    )


# ---------------------------------------------------------------------------
# Transfer between nested meshes
# ---------------------------------------------------------------------------


def interpolate_nodal(coarse_nodal: np.ndarray, coarse_mesh: Mesh, fine_mesh: Mesh) -> np.ndarray:
    """P1 interpolation of a nodal (n, 2) field onto a nested finer mesh."""
    r = refinement_ratio(coarse_mesh, fine_mesh)
    nxc, nyc = coarse_mesh.nx, coarse_mesh.ny
    fi, fj = np.meshgrid(np.arange(fine_mesh.nx + 1), np.arange(fine_mesh.ny + 1))
    fi = fi.ravel()
    fj = fj.ravel()
    ci = np.minimum(fi // r, nxc - 1)
    cj = np.minimum(fj // r, nyc - 1)
    s = ((fi - ci * r) / r)[:, None]
    t = ((fj - cj * r) / r)[:, None]

    u = np.asarray(coarse_nodal, dtype=float)
    u00 = u[coarse_mesh.node_index(ci, cj)]
    u10 = u[coarse_mesh.node_index(ci + 1, cj)]
    u01 = u[coarse_mesh.node_index(ci, cj + 1)]
    u11 = u[coarse_mesh.node_index(ci + 1, cj + 1)]
    lower = (1.0 - s) * u00 + (s - t) * u10 + t * u11
    upper = (1.0 - t) * u00 + s * u11 + (t - s) * u01
    return np.where(s >= t, lower, upper)


def prolongate(
    coarse: Solution | np.ndarray, coarse_mesh: Mesh, fine_mesh: Mesh
) -> np.ndarray:
    """Exact P1 transfer of a coarse free-DOF field to the free DOFs of a nested fine mesh.

    Raises:
        MeshError: if the meshes are not nested.
    """
    u = coarse.u if isinstance(coarse, Solution) else np.asarray(coarse, dtype=float)
    coarse_map = build_dofmap(coarse_mesh)
    fine_map = build_dofmap(fine_mesh)
    fine_nodal = interpolate_nodal(coarse_map.expand(u), coarse_mesh, fine_mesh)
    return fine_map.restrict(fine_nodal)


def assemble_trace_gram(mesh: Mesh, dofmap: DofMap) -> sp.csr_matrix:
    """Gram matrix of the trace operator: (gamma u, gamma v) in L2 of the contact boundary."""
    edges = mesh.edges_with(BoundaryTag.CONTACT)
    p = mesh.nodes[edges]
    lengths = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    local = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    rows, cols, vals = [], [], []
    for comp in (0, 1):
        dofs = 2 * edges + comp
        rows.append(np.repeat(dofs, 2, axis=1).ravel())
        cols.append(np.tile(dofs, (1, 2)).ravel())
        vals.append((lengths[:, None, None] * local[None]).ravel())
    n = 2 * mesh.n_nodes
    M = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return M[dofmap.free][:, dofmap.free].tocsr()
