"""Tests for P1 assembly, the V-norm, static condensation and prolongation."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest
import scipy.linalg

from contacthvi.fem import (
    AssemblyError,
    assemble,
    assemble_load,
    assemble_operator,
    build_dofmap,
    constitutive_matrix,
    element_stiffness,
    interpolate_nodal,
    prolongate,
    schur_reduce,
    solve_linear,
    vnorm,
)
from contacthvi.mesh import build_uniform_mesh, mesh_for_level
from tests.conftest import make_problem

REF_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def stiffness_oracle(coords: np.ndarray, lam: float, eta: float) -> np.ndarray:
    """Constant-strain integration with full 2x2 tensors, no Voigt notation."""
    (x0, y0), (x1, y1), (x2, y2) = coords
    T = np.array([[x1 - x0, x2 - x0], [y1 - y0, y2 - y0]])
    area = 0.5 * abs(np.linalg.det(T))
    ref_grads = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = ref_grads @ np.linalg.inv(T)
    strains = []
    for a in range(3):
        for comp in range(2):
            G = np.zeros((2, 2))
            G[comp] = grads[a]
            strains.append(0.5 * (G + G.T))
    K = np.zeros((6, 6))
    for i, ei in enumerate(strains):
        for j, ej in enumerate(strains):
            sigma = 2.0 * eta * ej + lam * np.trace(ej) * np.eye(2)
            K[i, j] = area * np.sum(sigma * ei)
    return K


class TestElementStiffness:
    """Element matrices against an independent oracle."""

    def test_constitutive_identity_strain(self):
        D = constitutive_matrix(4.0, 4.0)
        assert np.allclose(D @ np.array([1.0, 1.0, 0.0]), [16.0, 16.0, 0.0])

    def test_reference_triangle_matches_oracle(self):
        K = element_stiffness(REF_TRIANGLE, 4.0, 4.0)
        assert np.allclose(K, stiffness_oracle(REF_TRIANGLE, 4.0, 4.0), atol=1e-12, rtol=0)

    def test_reference_triangle_entries(self):
        K = element_stiffness(REF_TRIANGLE, 4.0, 4.0)
        assert K[0, 0] == pytest.approx(8.0)
        assert K[2, 2] == pytest.approx(6.0)
        assert K[3, 3] == pytest.approx(2.0)
        assert K[0, 3] == pytest.approx(-2.0)

    def test_random_triangle_matches_oracle(self, rng):
        coords = rng.uniform(-1.0, 1.0, size=(3, 2))
        K = element_stiffness(coords, 1.5, 0.7)
        assert np.allclose(K, stiffness_oracle(coords, 1.5, 0.7), atol=1e-10, rtol=1e-12)

    def test_rigid_body_kernel(self, rng):
        coords = rng.uniform(0.0, 1.0, size=(3, 2))
        K = element_stiffness(coords, 4.0, 4.0)
        tx = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        ty = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        rot = np.column_stack([-coords[:, 1], coords[:, 0]]).ravel()
        for mode in (tx, ty, rot):
            assert np.allclose(K @ mode, 0.0, atol=1e-12)

    def test_degenerate_triangle(self):
        with pytest.raises(AssemblyError):
            element_stiffness(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), 4.0, 4.0)

    def test_rejects_bad_coefficients(self):
        with pytest.raises(ValueError):
            element_stiffness(REF_TRIANGLE, -1.0, 4.0)
        with pytest.raises(ValueError):
            element_stiffness(REF_TRIANGLE, 4.0, 0.0)


class TestGlobalAssembly:
    """Global operator, load vector and the V-norm Gram matrix."""

    def test_stiffness_exactly_symmetric(self):
        p = make_problem(4)
        diff = p.system.K - p.system.K.T
        assert (abs(diff).max() if diff.nnz else 0.0) == 0.0

    @pytest.mark.parametrize("ny", [1, 2])
    def test_stiffness_positive_definite(self, ny):
        p = make_problem(ny)
        assert np.linalg.eigvalsh(p.system.K.toarray())[0] > 0.0

    def test_gram_matrix_is_stiffness_with_unit_shear(self):
        mesh = build_uniform_mesh(4, 2)
        dofmap = build_dofmap(mesh)
        system = assemble(mesh, dofmap, 4.0, 4.0, (0.0, 0.0), (0.0, 0.0))
        expected = assemble_operator(mesh, 0.0, 0.5)[dofmap.free][:, dofmap.free]
        assert np.allclose(system.B.toarray(), expected.toarray(), atol=1e-14, rtol=0)

    def test_load_partition_of_unity(self):
        mesh = build_uniform_mesh(8, 4)
        load = assemble_load(mesh, (-1.2, -0.9), (0.0, 0.0)).reshape(-1, 2)
        assert load[:, 1].sum() == pytest.approx(-1.8, rel=1e-12)
        assert load[:, 0].sum() == pytest.approx(-2.4, rel=1e-12)

    def test_traction_total(self):
        """Neumann length is 1 (right) + 2 (top) = 3."""
        mesh = build_uniform_mesh(4, 2)
        load = assemble_load(mesh, (0.0, 0.0), (0.5, -1.0)).reshape(-1, 2)
        assert load[:, 0].sum() == pytest.approx(1.5)
        assert load[:, 1].sum() == pytest.approx(-3.0)

    def test_zero_load(self):
        p = make_problem(2, f0=(0.0, 0.0))
        assert np.all(p.system.fvec == 0.0)

    def test_dirichlet_dofs_removed(self):
        mesh = build_uniform_mesh(4, 2)
        dofmap = build_dofmap(mesh)
        clamped = np.flatnonzero(mesh.nodes[:, 0] == 0.0)
        assert dofmap.n_free == 2 * (mesh.n_nodes - clamped.size)
        assert not set(dofmap.free) & set(dofmap.dirichlet)

    def test_contact_ordering(self):
        mesh = build_uniform_mesh(4, 2)
        dofmap = build_dofmap(mesh)
        assert np.all(np.diff(dofmap.trace_x) > 0.0)
        assert dofmap.trace_x[0] == 0.0
        assert dofmap.contact.size == 2 * 4
        assert np.array_equal(
            dofmap.free[dofmap.contact[0::2]] + 1, dofmap.free[dofmap.contact[1::2]]
        )

    def test_rejects_foreign_dofmap(self):
        with pytest.raises(ValueError):
            assemble(
                build_uniform_mesh(4, 2),
                build_dofmap(build_uniform_mesh(2, 1)),
                4.0,
                4.0,
                (0.0, 0.0),
                (0.0, 0.0),
            )


class TestVNorm:
    def test_zero(self, problem_h1):
        assert vnorm(problem_h1.system, np.zeros(problem_h1.system.n_free)) == 0.0

    def test_homogeneity(self, problem_h2, rng):
        v = rng.standard_normal(problem_h2.system.n_free)
        assert vnorm(problem_h2.system, -3.0 * v) == pytest.approx(
            3.0 * vnorm(problem_h2.system, v), rel=1e-12
        )

    def test_single_element_oracle(self, problem_h1):
        """Field supported on one free node: sum over its triangles of |eps|^2 area."""
        p = problem_h1
        mesh = p.mesh
        node = mesh.node_index(2, 1)
        nodal = np.zeros((mesh.n_nodes, 2))
        nodal[node] = [0.3, -0.7]
        v = p.dofmap.restrict(nodal)
        expected = 0.0
        for tri in mesh.triangles:
            if node not in tri:
                continue
            K = stiffness_oracle(mesh.nodes[tri], 0.0, 0.5)
            local = nodal[tri].ravel()
            expected += local @ K @ local
        assert vnorm(p.system, v) == pytest.approx(np.sqrt(expected), rel=1e-12)

    def test_shape_mismatch(self, problem_h1):
        with pytest.raises(ValueError):
            vnorm(problem_h1.system, np.zeros(3))


class TestSchurReduce:
    """Condensation of the quadratic energy onto the contact DOFs."""

    def test_no_interior(self, problem_h1):
        p = problem_h1
        n = p.system.n_free
        dofmap = dataclasses.replace(
            p.dofmap, contact=np.arange(n), interior=np.zeros(0, dtype=np.int64)
        )
        red = schur_reduce(p.system, dofmap)
        assert np.allclose(red.S, p.system.K.toarray(), atol=0)
        assert np.array_equal(red.g, p.system.fvec)
        assert red.offset == 0.0

    @pytest.mark.parametrize("ny", [1, 2])
    def test_reduced_minimum_matches_full(self, ny):
        p = make_problem(ny)
        K = p.system.K.toarray()
        f = p.system.fvec
        full_min = -0.5 * f @ np.linalg.solve(K, f)
        red = p.reduced
        v_c = np.linalg.solve(red.S, red.g)
        assert red.quadratic(v_c) == pytest.approx(full_min, rel=1e-10)
        assert np.allclose(red.reconstruct(v_c), np.linalg.solve(K, f), rtol=1e-10, atol=1e-12)

    def test_quadratic_equals_energy_after_back_substitution(self, problem_h1, rng):
        red = problem_h1.reduced
        for _ in range(5):
            v_c = rng.standard_normal(red.n_contact)
            assert red.quadratic(v_c) == pytest.approx(
                problem_h1.system.energy(red.reconstruct(v_c)), rel=1e-10, abs=1e-12
            )

    def test_schur_positive_definite(self, problem_h2):
        assert np.linalg.eigvalsh(problem_h2.reduced.S)[0] > 0.0

    def test_h1_dimensions(self, problem_h1):
        assert problem_h1.system.n_free == 8
        assert problem_h1.reduced.n_contact == 4

    def test_restrict_reconstruct(self, problem_h1, rng):
        red = problem_h1.reduced
        v_c = rng.standard_normal(red.n_contact)
        assert np.array_equal(red.restrict(red.reconstruct(v_c)), v_c)


class TestLinearSolve:
    def test_zero_load(self):
        p = make_problem(2, f0=(0.0, 0.0))
        assert np.all(solve_linear(p.system) == 0.0)

    def test_residual(self, problem_h2):
        u = solve_linear(problem_h2.system)
        r = problem_h2.system.K @ u - problem_h2.system.fvec
        assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(problem_h2.system.fvec)

    def test_body_pushed_down(self, problem_h2):
        u = solve_linear(problem_h2.system)
        assert np.min(problem_h2.dofmap.trace(u).values[:, 1]) < 0.0


class TestProlongation:
    """Exact transfer between nested meshes."""

    def test_zero_field(self):
        coarse, fine = mesh_for_level(1), mesh_for_level(3)
        n = build_dofmap(coarse).n_free
        assert np.all(prolongate(np.zeros(n), coarse, fine) == 0.0)

    def test_constants_reproduced(self):
        coarse, fine = mesh_for_level(1), mesh_for_level(2)
        nodal = np.tile([0.25, -1.5], (coarse.n_nodes, 1))
        out = interpolate_nodal(nodal, coarse, fine)
        assert np.allclose(out, np.tile([0.25, -1.5], (fine.n_nodes, 1)), atol=1e-15)

    def test_coarse_nodes_keep_values(self, rng):
        coarse, fine = mesh_for_level(1), mesh_for_level(3)
        nodal = rng.standard_normal((coarse.n_nodes, 2))
        out = interpolate_nodal(nodal, coarse, fine)
        for j in range(coarse.ny + 1):
            for i in range(coarse.nx + 1):
                assert np.allclose(
                    out[fine.node_index(4 * i, 4 * j)], nodal[coarse.node_index(i, j)]
                )

    def test_linear_fields_reproduced(self):
        coarse, fine = mesh_for_level(0), mesh_for_level(2)
        f = lambda p: np.column_stack([2.0 * p[:, 0] - p[:, 1], 0.5 * p[:, 1]])  # noqa: E731
        out = interpolate_nodal(f(coarse.nodes), coarse, fine)
        assert np.allclose(out, f(fine.nodes), atol=1e-14)

    def test_energy_norm_preserved(self, rng):
        coarse_p = make_problem(1)
        fine_p = make_problem(4)
        u = rng.standard_normal(coarse_p.system.n_free)
        u_fine = prolongate(u, coarse_p.mesh, fine_p.mesh)
        assert vnorm(fine_p.system, u_fine) == pytest.approx(
            vnorm(coarse_p.system, u), rel=1e-10
        )

    def test_dense_gram_oracle(self, problem_h1):
        """B is SPD on the free DOFs (Korn with a clamped side)."""
        assert scipy.linalg.eigvalsh(problem_h1.system.B.toarray())[0] > 0.0
