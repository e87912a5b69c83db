"""Run-configuration models.

Every block forbids unknown fields and rejects NaN/inf, so a typo in a
config file or a non-finite physical parameter fails at load time.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .laws import LawConstants, canonical_law_name
from .powell import PowellConfig

_STRICT = ConfigDict(extra="forbid", allow_inf_nan=False, populate_by_name=True)


class MeshConfig(BaseModel):
    model_config = _STRICT

    ny: int = Field(default=4, ge=1, description="Cells in y for a single solve (h = 1/ny)")
    levels: int = Field(
        default=5, ge=2, le=10, description="Study levels h = 1, 1/2, ..., 2^-(levels-1)"
    )
    ref_level: int = Field(default=6, ge=1, le=10, description="Reference mesh h = 2^-ref_level")

    @model_validator(mode="after")
    def _reference_finer(self) -> MeshConfig:
        if self.ref_level <= self.levels - 1:
            raise ValueError(
                f"ref_level={self.ref_level} must be finer than the finest study level "
                f"{self.levels - 1}"
            )
        return self


class MaterialConfig(BaseModel):
    model_config = _STRICT

    lam: float = Field(default=4.0, alias="lambda", ge=0, description="Lame coefficient lambda")
    eta: float = Field(default=4.0, gt=0, description="Lame coefficient eta (shear modulus)")


class LoadConfig(BaseModel):
    model_config = _STRICT

    f0: tuple[float, float] = Field(default=(0.0, 0.0), description="Body force density")
    f_n: tuple[float, float] = Field(default=(0.0, 0.0), alias="fN", description="Traction density")


class LawConfig(BaseModel):
    model_config = _STRICT

    name: str = Field(default="normal-compliance", description="Contact law set")
    frozen_bound: float = Field(
        default=1.0, ge=0, description="Constant friction bound of 'frozen-friction'"
    )
    constants: LawConstants = Field(default_factory=LawConstants)

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        return canonical_law_name(v)


class SolverConfig(BaseModel):
    """Outer fixed-point iteration settings."""

    model_config = _STRICT

    eps: float = Field(default=1e-6, gt=0, description="Stop when ||u_k - u_{k-1}||_V <= eps")
    max_outer: int = Field(default=100, ge=1, description="Outer iteration cap")
    start: Literal["free", "zero"] = Field(
        default="free", description="u_0: traction-free linear solve or zero"
    )
    warm_start: bool = Field(default=True, description="Start Powell from u_{k-1}")
    powell: PowellConfig = Field(default_factory=PowellConfig)

    def inner_config(self) -> PowellConfig:
        """Powell settings with x_tol at least two orders below eps."""
        return self.powell.model_copy(update={"x_tol": min(self.powell.x_tol, 1e-2 * self.eps)})


class DiagnosticsConfig(BaseModel):
    model_config = _STRICT

    seed: int = Field(default=0, ge=0, description="Seed for sampled residual directions")
    n_dirs: int = Field(default=200, ge=0, description="Random directions in the residual check")
    residual_tolerance: float = Field(default=1e-4, gt=0, description="Accepted violation")
    deltas: tuple[float, ...] = Field(
        default=(1e-5, 1e-6, 1e-7), description="Difference steps, strictly decreasing"
    )

    @field_validator("deltas")
    @classmethod
    def validate_deltas(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not v or any(d <= 0 for d in v) or any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("deltas must be positive and strictly decreasing")
        return v


class OutputConfig(BaseModel):
    model_config = _STRICT

    out_dir: Path = Field(default=Path("output"), description="Output directory")
    csv: bool = Field(default=True, description="Write CSV files")
    vtk: bool = Field(default=True, description="Write legacy VTK file")
    gnuplot: bool = Field(default=True, description="Write gnuplot scripts")
    displacement_scale: float = Field(
        default=1.0, gt=0, description="Displacement magnification in the deformed plot"
    )


class RuntimeConfig(BaseModel):
    model_config = _STRICT

    deterministic: bool = Field(default=False, description="Sequential, reproducible execution")
    workers: int = Field(default=1, ge=1, description="Parallel convergence-study levels")


class RunConfig(BaseModel):
    """Complete configuration of a solve or a convergence study."""

    model_config = _STRICT

    mesh: MeshConfig = Field(default_factory=MeshConfig)
    material: MaterialConfig = Field(default_factory=MaterialConfig)
    loads: LoadConfig = Field(default_factory=LoadConfig)
    law: LawConfig = Field(default_factory=LawConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
