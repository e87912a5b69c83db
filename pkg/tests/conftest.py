# tests/conftest.py
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from contacthvi.config import RunConfig
from contacthvi.config_loader import PRESETS, build_config
from contacthvi.fem import (
    AssembledSystem,
    DofMap,
    ReducedProblem,
    assemble,
    build_dofmap,
    schur_reduce,
)
from contacthvi.laws import ContactLawSet, get_law_set
from contacthvi.mesh import build_uniform_mesh
from contacthvi.models import Mesh

SAMPLE_F0 = (-1.2, -0.9)
SAMPLE_LAM = 4.0
SAMPLE_ETA = 4.0


@dataclass
class Problem:
    mesh: Mesh
    dofmap: DofMap
    system: AssembledSystem
    reduced: ReducedProblem
    laws: ContactLawSet


def make_problem(
    ny: int,
    law: str = "normal-compliance",
    f0: tuple[float, float] = SAMPLE_F0,
    fN: tuple[float, float] = (0.0, 0.0),
    lam: float = SAMPLE_LAM,
    eta: float = SAMPLE_ETA,
    frozen_bound: float = 1.0,
) -> Problem:
    mesh = build_uniform_mesh(2 * ny, ny)
    dofmap = build_dofmap(mesh)
    system = assemble(mesh, dofmap, lam, eta, f0, fN)
    reduced = schur_reduce(system, dofmap)
    return Problem(mesh, dofmap, system, reduced, get_law_set(law, frozen_bound=frozen_bound))


@pytest.fixture
def problem_h1() -> Problem:
    """Sample data on the coarsest mesh h = 1 (4 contact DOFs)."""
    return make_problem(1)


@pytest.fixture
def problem_h2() -> Problem:
    return make_problem(2)


@pytest.fixture
def sample_config(tmp_path: Path) -> RunConfig:
    """The bundled preset with output redirected to a temporary directory."""
    cfg = build_config(PRESETS["paper-sec5"])
    return cfg.model_copy(
        update={"output": cfg.output.model_copy(update={"out_dir": tmp_path / "out"})}
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
