from __future__ import annotations

import numpy as np

from .normal_compliance import SATURATION, eval_jnu, eval_jtau


class FrozenFrictionBound:
    """Normal compliance as in the sample data, friction bound frozen to a constant.

    J then no longer depends on its first argument, so the fixed-point map is
    constant and the fixed-point iteration stops after its second iterate.
    """

    normal_kinks = (0.0, SATURATION)
    tangential_kinks = (0.0,)

    def __init__(self, bound: float = 1.0):
        if bound < 0:
            raise ValueError(f"Frozen friction bound must be >= 0, got {bound}")
        self.bound = float(bound)

    def name(self) -> str:
        return "frozen-friction"

    def j_nu(self, xi):
        return eval_jnu(xi)

    def h_tau(self, eta):
        return np.full(np.shape(eta), self.bound)

    def j_tau(self, xi):
        return eval_jtau(xi)
