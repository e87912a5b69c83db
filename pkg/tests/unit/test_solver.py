"""Tests for the condensed objective and the fixed-point iteration."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import minimize

from contacthvi.config import SolverConfig
from contacthvi.contact import eval_J
from contacthvi.fem import solve_linear, vnorm
from contacthvi.laws import get_law_set
from contacthvi.solver import (
    ReducedObjective,
    fixed_point_solve,
    initial_guess,
    reduced_objective,
)
from tests.conftest import make_problem


def full_objective(p, w_c, v_c):
    """L(w, v) = 0.5 v'Kv - f'v + J(gamma w, gamma v) on the full free-DOF vector."""
    u_w = p.reduced.reconstruct(w_c)
    u_v = p.reduced.reconstruct(v_c)
    return p.system.energy(u_v) + eval_J(
        p.mesh, p.dofmap.trace(u_w), p.dofmap.trace(u_v), p.laws
    )


def oracle_minimize(objective, center, radius, points=9):
    """Exhaustive grid over a box followed by a Nelder-Mead polish."""
    axes = [np.linspace(c - radius, c + radius, points) for c in center]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(center))
    best = min(grid, key=objective)
    x = best
    for _ in range(3):
        res = minimize(
            objective,
            x,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 40000, "maxfev": 80000},
        )
        x = res.x
    return x


class TestReducedObjective:
    """The condensed energy equals the full energy after back-substitution."""

    def test_zero_point(self, problem_h1):
        red = problem_h1.reduced
        z = np.zeros(red.n_contact)
        assert reduced_objective(red, problem_h1.laws, z, z) == pytest.approx(red.offset)

    def test_linear_minimum(self):
        p = make_problem(1, law="linear")
        v_c = np.linalg.solve(p.reduced.S, p.reduced.g)
        K = p.system.K.toarray()
        f = p.system.fvec
        full_min = -0.5 * f @ np.linalg.solve(K, f)
        assert reduced_objective(p.reduced, p.laws, v_c, v_c) == pytest.approx(full_min, rel=1e-10)

    def test_matches_full_objective(self, problem_h1, rng):
        red = problem_h1.reduced
        for _ in range(5):
            w_c = 0.1 * rng.standard_normal(red.n_contact)
            v_c = 0.1 * rng.standard_normal(red.n_contact)
            assert reduced_objective(red, problem_h1.laws, w_c, v_c) == pytest.approx(
                full_objective(problem_h1, w_c, v_c), rel=1e-10, abs=1e-12
            )

    def test_along_matches_call(self, problem_h2, rng):
        red = problem_h2.reduced
        obj = ReducedObjective(red, problem_h2.laws, 0.05 * rng.standard_normal(red.n_contact))
        x = 0.05 * rng.standard_normal(red.n_contact)
        d = rng.standard_normal(red.n_contact)
        phi = obj.along(x, d)
        for t in (-0.3, 0.0, 0.01, 0.2):
            assert phi(t) == pytest.approx(obj(x + t * d), rel=1e-10, abs=1e-12)

    def test_shape_checks(self, problem_h1):
        red = problem_h1.reduced
        with pytest.raises(ValueError):
            ReducedObjective(red, problem_h1.laws, np.zeros(3))
        obj = ReducedObjective(red, problem_h1.laws, np.zeros(red.n_contact))
        with pytest.raises(ValueError):
            obj(np.zeros(red.n_contact + 1))


class TestFixedPointSolve:
    """Outer iteration: limit cases and qualitative behavior."""

    def test_zero_load(self):
        p = make_problem(2, f0=(0.0, 0.0))
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        assert sol.converged
        assert np.allclose(sol.u, 0.0, atol=1e-8)

    def test_linear_limit_one_iteration(self):
        p = make_problem(2, law="linear")
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        direct = solve_linear(p.system)
        assert sol.converged
        assert sol.outer_iters == 1
        assert vnorm(p.system, sol.u - direct) <= 1e-8 * vnorm(p.system, direct)

    def test_frozen_friction_two_iterations(self):
        p = make_problem(2, law="frozen-friction", frozen_bound=1.0)
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        assert sol.converged
        assert sol.outer_iters == 2
        assert sol.history[-1] <= 1e-6

    def test_sample_data_h1_matches_oracle(self, problem_h1):
        """The fixed point minimizes L(u, .) over the 4 contact DOFs."""
        p = problem_h1
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        assert sol.converged
        u_c = p.reduced.restrict(sol.u)
        objective = ReducedObjective(p.reduced, p.laws, u_c)
        radius = 2.0 * float(np.max(np.abs(u_c))) + 0.05
        oracle = oracle_minimize(objective, np.zeros(4), radius)
        assert np.allclose(u_c, oracle, atol=1e-3)

    def test_sample_data_h2_descends(self, problem_h2):
        p = problem_h2
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        assert sol.converged
        assert all(b <= a for a, b in zip(sol.history, sol.history[1:]))
        assert len(sol.inner_sweeps) == sol.outer_iters
        assert all(sol.inner_converged)

    @pytest.mark.parametrize("start", ["free", "zero"])
    def test_objective_descends_every_iteration(self, problem_h2, start):
        p = problem_h2
        sol = fixed_point_solve(
            p.reduced, p.laws, p.system, p.dofmap, SolverConfig(eps=1e-7, start=start)
        )
        assert len(sol.start_values) == len(sol.objective_values) == sol.outer_iters
        for before, after in zip(sol.start_values, sol.objective_values):
            assert after <= before + 1e-10 * max(1.0, abs(before))

    def test_start_values_evaluate_previous_iterate(self, problem_h2):
        p = problem_h2
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        w0 = p.reduced.restrict(initial_guess(p.system))
        assert sol.start_values[0] == pytest.approx(reduced_objective(p.reduced, p.laws, w0, w0))

    def test_max_outer_reports_failure(self, problem_h2):
        p = problem_h2
        sol = fixed_point_solve(
            p.reduced, p.laws, p.system, p.dofmap, SolverConfig(max_outer=1, eps=1e-300)
        )
        assert not sol.converged
        assert sol.outer_iters == 1
        assert len(sol.history) == 1

    def test_warm_and_cold_inner_starts_agree(self, problem_h2):
        p = problem_h2
        eps = 1e-7
        warm = fixed_point_solve(
            p.reduced, p.laws, p.system, p.dofmap, SolverConfig(eps=eps, start="zero")
        )
        cold = fixed_point_solve(
            p.reduced,
            p.laws,
            p.system,
            p.dofmap,
            SolverConfig(eps=eps, start="zero", warm_start=False),
        )
        assert warm.converged and cold.converged
        assert vnorm(p.system, warm.u - cold.u) <= 10 * eps

    def test_outer_start_selects_the_branch(self, problem_h2):
        """L(w, .) is not convex once j_nu saturates; u_0 picks the fixed point."""
        p = problem_h2
        free = fixed_point_solve(
            p.reduced, p.laws, p.system, p.dofmap, SolverConfig(eps=1e-7, start="free")
        )
        zero = fixed_point_solve(
            p.reduced, p.laws, p.system, p.dofmap, SolverConfig(eps=1e-7, start="zero")
        )
        assert free.converged and zero.converged
        assert vnorm(p.system, free.u - zero.u) > 0.1

    def test_trace_in_solution(self, problem_h1):
        p = problem_h1
        sol = fixed_point_solve(p.reduced, p.laws, p.system, p.dofmap)
        assert np.array_equal(sol.trace.values, p.dofmap.trace(sol.u).values)
        assert np.all(sol.trace.values[0] == 0.0)

    def test_law_switch(self):
        assert get_law_set("linear").is_trivial


@pytest.mark.slow
class TestSampleDataQuarterMesh:
    """Sample data at h = 1/4, eps = 1e-6."""

    def test_history_non_increasing_and_converged(self):
        p = make_problem(4)
        sol = fixed_point_solve(
            p.reduced, p.laws, p.system, p.dofmap, SolverConfig(eps=1e-6, start="zero")
        )
        assert sol.converged
        assert all(b <= a for a, b in zip(sol.history, sol.history[1:]))
