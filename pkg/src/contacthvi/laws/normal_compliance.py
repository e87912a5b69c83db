"""Saturated normal compliance with logarithmic, displacement-bounded friction.

    j_nu(xi)  = 0 for xi < 0, 10 xi^2 for 0 <= xi < 0.1, 0.1 for xi >= 0.1
    j_tau(xi) = ln(|xi| + 1)
    h_tau(eta) = 0 for eta < 0, 8 eta for eta >= 0

j_nu and j_tau are nondifferentiable and nonconvex; j_tau is Lipschitz
with constant 1.
"""

from __future__ import annotations

import numpy as np

SATURATION = 0.1
STIFFNESS = 10.0
FRICTION_SLOPE = 8.0


def eval_jnu(xi):
    xi = np.asarray(xi, dtype=float)
    out = np.where(xi < SATURATION, STIFFNESS * xi**2, STIFFNESS * SATURATION**2)
    out = np.where(xi < 0.0, 0.0, out)
    return out if out.ndim else float(out)


def eval_jtau(xi):
    xi = np.asarray(xi, dtype=float)
    out = np.log1p(np.linalg.norm(xi, axis=-1))
    return out if np.ndim(out) else float(out)


def eval_htau(eta):
    eta = np.asarray(eta, dtype=float)
    out = np.where(eta < 0.0, 0.0, FRICTION_SLOPE * eta)
    return out if out.ndim else float(out)


class SaturatedNormalCompliance:
    normal_kinks = (0.0, SATURATION)
    friction_kinks = (0.0,)
    tangential_kinks = (0.0,)

    def name(self) -> str:
        return "normal-compliance"

    def j_nu(self, xi):
        return eval_jnu(xi)

    def h_tau(self, eta):
        return eval_htau(eta)

    def j_tau(self, xi):
        return eval_jtau(xi)
