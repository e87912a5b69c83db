from __future__ import annotations

import numpy as np


class NoContact:
    """J == 0: the contact boundary is traction free."""

    def name(self) -> str:
        return "linear"

    def j_nu(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=float))

    def h_tau(self, eta):
        return np.zeros_like(np.asarray(eta, dtype=float))

    def j_tau(self, xi):
        return np.zeros(np.shape(xi)[:-1])
