"""Algebraic identities between roots of ``psi(z) = q`` and derivatives of ``psi``.

They hold exactly for simple roots and serve as numerical diagnostics: the
partial-fraction expansion of ``1/(psi - q)`` and root sums at ``q = 0`` taken
over the nonzero roots of ``psi(z) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import RiskModel, classify, psi, psi_deriv
from .roots import solve_roots


@dataclass(frozen=True)
class IdentityResult:
    name: str
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / max(1.0, abs(self.rhs))

    def passed(self, tol: float = 1e-8) -> bool:
        return self.residual < tol


def partial_fraction(model: RiskModel, q: float, theta: float) -> IdentityResult:
    """``1/(psi(theta) - q) = sum_z 1/(psi'(z) (theta - z))`` over all roots ``z``."""
    rs = solve_roots(model, q)
    z = rs.all_roots
    d1 = np.array([psi_deriv(model, w, 1) for w in z])
    expansion = np.sum(1.0 / (d1 * (theta - z))).real
    direct = 1.0 / (psi(model, float(theta)) - q)
    return IdentityResult(f"partial_fraction(q={q:g}, theta={theta:g})", float(expansion), float(direct))


def _other_roots(model: RiskModel):
    z = np.array([w for w in solve_roots(model, 0.0).all_roots if w != 0], dtype=complex)
    d = [np.array([psi_deriv(model, w, j) for w in z], dtype=complex) for j in (1, 2, 3)]
    return z, d


def root_sum_identities(model: RiskModel) -> list[IdentityResult]:
    """Root sums at ``q = 0`` against closed expressions in ``psi^(j)(0)``.

    Each sum runs over the nonzero roots of ``psi = 0`` (including ``Phi(0)``
    when it is positive); ``W(0) = 1/p`` without perturbation and 0 otherwise.
    The last three follow from ``d^j/dq^j W^(q)(0) = 0`` for ``j = 0, 1, 2``
    minus the contribution of the zero root.
    """
    classify(model)
    a1 = psi_deriv(model, 0.0, 1)
    a2 = psi_deriv(model, 0.0, 2)
    a3 = psi_deriv(model, 0.0, 3)
    w0 = 0.0 if model.perturbed else 1.0 / model.p
    z, (d1, d2, d3) = _other_roots(model)
    out = [
        ("inverse_root_sum", np.sum(1 / (d1 * z)), a2 / (2 * a1**2)),
        (
            "inverse_root_sum_dq",
            np.sum(2 / (d1**2 * z**2) + 2 * d2 / (d1**3 * z)),
            3 * a2**2 / (2 * a1**4) - 2 * a3 / (3 * a1**3),
        ),
        ("scale_at_zero", np.sum(1 / d1), w0 - 1 / a1),
        ("scale_at_zero_dq", np.sum(d2 / d1**3), -a2 / a1**3),
        (
            "scale_at_zero_dq2",
            np.sum(3 * d2**2 / d1**5 - d3 / d1**4),
            -(3 * a2**2 / a1**5 - a3 / a1**4),
        ),
    ]
    return [IdentityResult(name, float(np.real(l)), float(r)) for name, l, r in out]
