"""Perturbed Cramer-Lundberg risk model and its Laplace exponent.

The surplus is ``X_t = x + p t - sum_{i<=N_t} S_i + sigma B_t`` with Poisson
claim arrivals of intensity ``lam`` and phase-type claims. Its Laplace exponent
is

    psi(z) = p z + sigma2 z^2 / 2 - lam (alpha (zI - T)^{-1} T 1 + 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CriticalDrift, InvalidModel, SingularResolvent, UnsupportedOrder
from .phasetype import PhaseTypeDistribution, ph_moment

# Resolvent solves refuse above this condition number.
RESOLVENT_COND_MAX = 1e12
CRITICAL_DRIFT_RTOL = 1e-12


@dataclass(frozen=True)
class RiskModel:
    p: float
    sigma2: float
    lam: float
    claims: PhaseTypeDistribution

    def __post_init__(self):
        for name in ("p", "sigma2", "lam"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.p > 0:
            raise InvalidModel("premium rate p must be positive")
        if self.sigma2 < 0 or self.lam < 0:
            raise InvalidModel("sigma2 and lam must be nonnegative")
        if self.lam == 0 and self.sigma2 == 0:
            raise InvalidModel("pure drift is excluded: need lam > 0 or sigma2 > 0")

    @property
    def perturbed(self) -> bool:
        return self.sigma2 > 0


class RegimeTag(enum.Enum):
    UNPROFITABLE = "unprofitable"
    PROFITABLE = "profitable"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    drift: float

    @property
    def profitable(self) -> bool:
        return self.tag is RegimeTag.PROFITABLE


def _resolvent_powers(model: RiskModel, z: complex, n: int) -> list[complex]:
    """``alpha (zI - T)^{-k} T 1`` for k = 1..n by repeated solves."""
    claims = model.claims
    A = z * np.eye(claims.d) - claims.T_mat
    if np.linalg.cond(A) > RESOLVENT_COND_MAX:
        raise SingularResolvent(f"zI - T is singular at z = {z}")
    v = -claims.exit_vec.astype(complex)  # T 1
    out = []
    for _ in range(n):
        v = np.linalg.solve(A, v)
        out.append(complex(claims.alpha_vec @ v))
    return out


def _real_if(z, val: complex):
    return val.real if np.isrealobj(z) or isinstance(z, (int, float)) else val


def psi(model: RiskModel, z):
    """Laplace exponent at real or complex ``z``.

    Real input returns a real float.
    """
    zc = complex(z)
    val = model.p * zc + 0.5 * model.sigma2 * zc * zc
    if model.lam:
        (r1,) = _resolvent_powers(model, zc, 1)
        val -= model.lam * (r1 + 1.0)
    return _real_if(z, val)


def psi_derivative(model: RiskModel, z, order: int):
    """Derivative of ``psi`` of any positive order.

    The rational part contributes ``-lam (-1)^n n! alpha (zI-T)^{-(n+1)} T 1``.
    """
    if order < 1:
        raise UnsupportedOrder("derivative order must be >= 1")
    zc = complex(z)
    if order == 1:
        val = model.p + model.sigma2 * zc
    elif order == 2:
        val = complex(model.sigma2)
    else:
        val = 0j
    if model.lam:
        r = _resolvent_powers(model, zc, order + 1)[order]
        val += -model.lam * (-1) ** order * math.factorial(order) * r
    return _real_if(z, val)


def psi_deriv(model: RiskModel, z, order: int):
    """First, second or third derivative of ``psi``."""
    if order not in (1, 2, 3):
        raise UnsupportedOrder(f"psi_deriv supports orders 1..3, got {order}")
    return psi_derivative(model, z, order)


def classify(model: RiskModel, rtol: float = CRITICAL_DRIFT_RTOL) -> Regime:
    """Profitability regime from the mean drift ``p - lam E[S]``."""
    drift = model.p - model.lam * ph_moment(model.claims, 1)
    if abs(drift) < rtol * max(1.0, model.p):
        raise CriticalDrift(f"drift psi'(0+) = {drift:.3g} is critical")
    tag = RegimeTag.PROFITABLE if drift > 0 else RegimeTag.UNPROFITABLE
    return Regime(tag, drift)
