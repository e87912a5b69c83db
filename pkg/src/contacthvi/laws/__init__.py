# contacthvi/laws/__init__.py
"""Contact law sets: the triple (j_nu, h_tau, j_tau) plus advisory constants.

Each law set is looked up by name through ``get_law_set`` the same way the
CLI looks up every other pluggable piece. All callables are vectorized over
numpy arrays.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

ScalarLaw = Callable[[np.ndarray], np.ndarray]


class LawConstants(BaseModel):
    """Constants of the growth, Lipschitz and relaxed-monotonicity conditions.

    They are not derivable from the law callables; the advisory check only
    reports what the user supplies. ``None`` means "not provided".
    """

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    c_nu0: float | None = Field(default=None, ge=0, description="Growth constant of dj_nu")
    c_nu1: float | None = Field(default=None, ge=0, description="Linear growth of dj_nu")
    alpha_nu: float | None = Field(default=None, ge=0, description="Relaxed monotonicity of j_nu")
    c_tau: float | None = Field(default=None, gt=0, description="Lipschitz constant of j_tau")
    alpha_tau: float | None = Field(
        default=None, ge=0, description="Relaxed monotonicity of j_tau"
    )
    h_tau_bar: float | None = Field(default=None, gt=0, description="Upper bound of h_tau")
    L_htau: float | None = Field(default=None, gt=0, description="Lipschitz constant of h_tau")
    m_alpha: float | None = Field(default=None, ge=0, description="Relaxed monotonicity of J")
    m_L: float | None = Field(default=None, ge=0, description="Lipschitz coupling of J")


class ContactLaws(Protocol):
    def name(self) -> str: ...
    def j_nu(self, xi: np.ndarray) -> np.ndarray: ...
    def h_tau(self, eta: np.ndarray) -> np.ndarray: ...
    def j_tau(self, xi: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ContactLawSet:
    """A law triple bound to its constants record.

    ``j_tau`` takes tangential vectors of shape (..., 2). The kink tuples list
    where j_nu (in v_nu), h_tau (in w_nu) and j_tau (in the tangential
    component) lose smoothness; quadrature cuts edges there.
    """

    name: str
    j_nu: ScalarLaw
    h_tau: ScalarLaw
    j_tau: ScalarLaw
    constants: LawConstants = field(default_factory=LawConstants)
    normal_kinks: tuple[float, ...] = ()
    friction_kinks: tuple[float, ...] = ()
    tangential_kinks: tuple[float, ...] = ()

    @property
    def is_trivial(self) -> bool:
        """True when J vanishes identically (the linear-elasticity limit)."""
        return self.name == "linear"

    def density(self, w_nu: np.ndarray, v_nu: np.ndarray, v_tau: np.ndarray) -> np.ndarray:
        """j(x, w, v) = j_nu(v_nu) + h_tau(w_nu) j_tau(v_tau)."""
        return self.j_nu(v_nu) + self.h_tau(w_nu) * self.j_tau(v_tau)


def _bind(laws: ContactLaws, constants: LawConstants | None) -> ContactLawSet:
    return ContactLawSet(
        name=laws.name(),
        j_nu=laws.j_nu,
        h_tau=laws.h_tau,
        j_tau=laws.j_tau,
        constants=constants or LawConstants(),
        normal_kinks=tuple(getattr(laws, "normal_kinks", ())),
        friction_kinks=tuple(getattr(laws, "friction_kinks", ())),
        tangential_kinks=tuple(getattr(laws, "tangential_kinks", ())),
    )


LAW_NAMES = ("normal-compliance", "linear", "frozen-friction")
_LAW_ALIASES = {
    "paper-sec5": "normal-compliance",
    "sample": "normal-compliance",
    "none": "linear",
    "elastic": "linear",
    "frozen": "frozen-friction",
}


def canonical_law_name(law_name: str) -> str:
    """Registered name for a law name or alias.

    Raises:
        ValueError: for an unknown name.
    """
    ln = (law_name or "").replace("_", "-").strip().lower()
    ln = _LAW_ALIASES.get(ln, ln)
    if ln not in LAW_NAMES:
        raise ValueError(f"Unknown contact law '{law_name}'; expected one of {list(LAW_NAMES)}")
    return ln


def get_law_set(
    law_name: str,
    constants: LawConstants | None = None,
    *,
    frozen_bound: float = 1.0,
) -> ContactLawSet:
    """Resolve a law set by name.

    Raises:
        ValueError: for an unknown name.
    """
    ln = canonical_law_name(law_name)
    if ln == "normal-compliance":
        from .normal_compliance import SaturatedNormalCompliance

        return _bind(SaturatedNormalCompliance(), constants)
    if ln == "linear":
        from .linear import NoContact

        return _bind(NoContact(), constants)
    from .frozen import FrozenFrictionBound

    return _bind(FrozenFrictionBound(frozen_bound), constants)
