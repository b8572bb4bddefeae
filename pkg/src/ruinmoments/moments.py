"""Ruin probability and moments of the ruin time ``tau = tau_0^-``.

Four independent routes are provided:

* :func:`moments_general` evaluates the scale-function representation of the
  first two conditional moments (``W``, ``int W`` and q-derivatives of ``W``
  at ``q -> 0+``), with the coefficient algebra of
  :class:`~ruinmoments.scale.ScaleTermExpansion`;
* :func:`moments_phase_type` evaluates the explicit root-sum forms;
* :func:`moments_exponential` evaluates the closed forms for exponential claims;
* :func:`moments_convolution` works on a grid with convolution powers of
  ``W^(0)`` and covers any order ``k``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bell import bell_partial, bell_table
from .errors import (
    BetaNonpositive,
    InitialCapitalExcluded,
    NotExponentialClaims,
    UnsupportedOrder,
)
from .model import Regime, RiskModel, classify, psi, psi_derivative, psi_deriv
from .roots import root_derivs, solve_roots
from .scale import (
    ScaleTermExpansion,
    combine,
    constant_expansion,
    conv_powers,
    default_grid_step,
    integrate,
    scale_terms,
)

__all__ = [
    "MomentMethod",
    "MomentReport",
    "EtaDerivatives",
    "AsymptoticSlope",
    "bell_partial",
    "eta_derivs",
    "eta_derivs_bell",
    "ruin_probability",
    "moments_general",
    "moments_phase_type",
    "moments_exponential",
    "moments_convolution",
    "laplace_uk",
    "asymptotic_slope",
    "moment_curves",
]

log = logging.getLogger(__name__)

VARIANCE_SLACK = 1e-9
CLAMP_LOG_THRESHOLD = 1e-10
LAPLACE_LIMIT_BAND = 1e-8


class MomentMethod(enum.Enum):
    GENERAL = "General"
    PHASE_TYPE_CLOSED = "PhaseTypeClosed"
    EXPONENTIAL_CLOSED = "ExponentialClosed"
    CONVOLUTION = "Convolution"


@dataclass(frozen=True)
class MomentReport:
    """Ruin probability and conditional moments ``E_x[tau^k | tau < inf]``.

    ``second`` and ``variance`` are ``None`` when only the mean was requested.
    """

    x: float
    regime: Regime
    ruin_prob: float
    mean: float
    second: float | None
    variance: float | None
    method: MomentMethod


@dataclass(frozen=True)
class EtaDerivatives:
    """``eta^(l)(0+)`` for ``l = 0..k`` where ``eta(q) = q / Phi(q)``."""

    values: tuple
    regime: Regime

    def __getitem__(self, l: int) -> float:
        return self.values[l]

    def __len__(self) -> int:
        return len(self.values)


class AsymptoticSlope(NamedTuple):
    slope: float
    regime: Regime


def _variance(mean: float, second: float) -> float:
    var = second - mean * mean
    if var < 0 and -var <= VARIANCE_SLACK * max(1.0, second):
        var = 0.0
    return var


# ---------------------------------------------------------------------------
# eta derivatives


def _inverse_phi_derivs(model: RiskModel, regime: Regime, n: int) -> list[float]:
    """``[Phi'(0+), ..., Phi^(n)(0+)]``."""
    phi0 = 0.0 if regime.profitable else solve_roots(model, 0.0).phi
    return [float(np.real(v)) for v in root_derivs(model, phi0, n)]


def eta_derivs_bell(model: RiskModel, k_max: int) -> EtaDerivatives:
    """All ``eta^(l)(0+)``, ``l <= k_max``, from derivatives of ``Phi`` at 0.

    Unprofitable: ``eta^(l)(0+) = l * d^{l-1}(1/Phi)(0+)``, the inner derivative
    by Faa di Bruno with ``f(u) = 1/u``. Profitable: ``eta = phi_ratio o Phi``
    with ``phi_ratio(b) = psi(b)/b``, whose l-th derivative at ``0+`` is
    ``psi^(l+1)(0+)/(l+1)``.
    """
    regime = classify(model)
    vals = [regime.drift if regime.profitable else 0.0]
    if k_max < 1:
        return EtaDerivatives(tuple(vals), regime)
    dphi = _inverse_phi_derivs(model, regime, k_max)
    B = bell_table(k_max, dphi)
    if regime.profitable:
        outer = [psi_derivative(model, 0.0, j + 1) / (j + 1) for j in range(1, k_max + 1)]
        for l in range(1, k_max + 1):
            vals.append(sum(outer[j - 1] * B[l][j] for j in range(1, l + 1)))
    else:
        phi0 = solve_roots(model, 0.0).phi
        fders = [(-1) ** j * math.factorial(j) / phi0 ** (j + 1) for j in range(1, k_max + 1)]
        inv = [1.0 / phi0]  # d^m (1/Phi) for m = 0, 1, ...
        for m in range(1, k_max):
            inv.append(sum(fders[j - 1] * B[m][j] for j in range(1, m + 1)))
        for l in range(1, k_max + 1):
            vals.append(l * inv[l - 1])
    return EtaDerivatives(tuple(vals), regime)


def eta_derivs(model: RiskModel, k_max: int = 2) -> EtaDerivatives:
    """``eta^(l)(0+)`` with the standard closed forms for ``l <= 2``.

    Orders beyond 2 come from :func:`eta_derivs_bell`.
    """
    regime = classify(model)
    d1 = regime.drift
    if regime.profitable:
        d2 = psi_deriv(model, 0.0, 2)
        d3 = psi_deriv(model, 0.0, 3)
        closed = [d1, d2 / (2 * d1), d3 / (3 * d1**2) - d2**2 / (2 * d1**3)]
    else:
        phi0 = solve_roots(model, 0.0).phi
        closed = [0.0, 1.0 / phi0, -2.0 / (phi0**2 * psi_deriv(model, phi0, 1))]
    if k_max <= 2:
        return EtaDerivatives(tuple(closed[: k_max + 1]), regime)
    rest = eta_derivs_bell(model, k_max).values[3:]
    return EtaDerivatives(tuple(closed) + tuple(rest), regime)


# ---------------------------------------------------------------------------
# general (scale-function) route


@dataclass(frozen=True)
class _MomentExpansions:
    regime: Regime
    ruin: ScaleTermExpansion | None  # None: ruin is certain
    first: ScaleTermExpansion  # E_x[tau; tau < inf]
    second: ScaleTermExpansion | None


def _expansions(model: RiskModel, k: int) -> _MomentExpansions:
    regime = classify(model)
    W = scale_terms(model, 0.0)
    IW = integrate(W)
    dW = scale_terms(model, 0.0, 1) if k >= 2 or regime.profitable else None
    eta = eta_derivs(model, 2)
    if not regime.profitable:
        # growth exp(Phi(0) x) cancels analytically in every moment
        phi0 = complex(solve_roots(model, 0.0).phi)
        first = combine((eta[1], W), (-1.0, IW)).without_rate(phi0)
        second = None
        if k >= 2:
            IdW = integrate(dW)
            second = combine((2.0, IdW), (-2.0 * eta[1], dW), (-eta[2], W)).without_rate(phi0)
        return _MomentExpansions(regime, None, first, second)
    d1 = regime.drift
    d2 = psi_deriv(model, 0.0, 2)
    # P_x and u_k P_x tend to 0, so their polynomial parts vanish analytically
    ruin = combine((1.0, constant_expansion(1.0, W)), (-d1, W)).without_poly()
    first = combine((d1, dW), (d2 / (2 * d1), W), (-1.0, IW)).without_poly()
    second = None
    if k >= 2:
        d2W = scale_terms(model, 0.0, 2)
        IdW = integrate(dW)
        second = combine(
            (2.0, IdW), (-d1, d2W), (-d2 / d1, dW), (-eta[2], W)
        ).without_poly()
    return _MomentExpansions(regime, ruin, first, second)


def _ratio(num: ScaleTermExpansion, den: ScaleTermExpansion, x):
    """``num(x)/den(x)`` with both scaled by ``exp(-s x)``, ``s`` the slowest live rate."""
    s = den.leading_rate()
    return num(x, shift=s) / den(x, shift=s)


def _clamp_prob(P):
    P = np.asarray(P, dtype=float)
    clipped = np.clip(P, 0.0, 1.0)
    gap = float(np.max(np.abs(clipped - P))) if P.size else 0.0
    if gap > 0:
        lvl = logging.WARNING if gap > CLAMP_LOG_THRESHOLD else logging.DEBUG
        log.log(lvl, "ruin probability clamped to [0, 1] by %.3g", gap)
    return clipped


def moment_curves(model: RiskModel, x, k: int = 2):
    """Vectorised ``(ruin_prob, mean, second)`` along an array of ``x >= 0``.

    ``second`` is ``None`` for ``k = 1``. Profitable models with ``sigma2 > 0``
    are rejected at ``x = 0``.
    """
    if k not in (1, 2):
        raise UnsupportedOrder("closed-form moments exist for k = 1, 2")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("initial capital must be nonnegative")
    ex = _expansions(model, k)
    if not ex.regime.profitable:
        P = np.ones_like(x)
        m1 = ex.first(x)
        m2 = ex.second(x) if k >= 2 else None
        return P, m1, m2
    if model.perturbed and np.any(x == 0):
        raise InitialCapitalExcluded("x = 0 is excluded when sigma2 > 0 in the profitable regime")
    P = _clamp_prob(ex.ruin(x))
    m1 = _ratio(ex.first, ex.ruin, x)
    m2 = _ratio(ex.second, ex.ruin, x) if k >= 2 else None
    return P, m1, m2


def ruin_probability(model: RiskModel, x):
    """``P_x(tau < inf)``: 1 if unprofitable, else ``1 - psi'(0+) W^(0)(x)``."""
    regime = classify(model)
    x = np.asarray(x, dtype=float)
    if not regime.profitable:
        out = np.ones_like(x)
    else:
        ex = _expansions(model, 1)
        out = _clamp_prob(ex.ruin(np.maximum(x, 0.0)))
        out = np.where(x < 0, 1.0, out)
    return out if out.ndim else float(out)


def _report(model, x, k, P, m1, m2, method) -> MomentReport:
    regime = classify(model)
    second = None if m2 is None else float(m2)
    var = None if m2 is None else _variance(float(m1), second)
    return MomentReport(float(x), regime, float(P), float(m1), second, var, method)


def _check_k(k):
    if k not in (1, 2):
        raise UnsupportedOrder("closed-form moments exist for k = 1, 2")


def moments_general(model: RiskModel, x: float, k: int = 2) -> MomentReport:
    """Conditional moments from ``W``, ``int W`` and ``d_q W``, ``d_q^2 W`` at ``q = 0+``."""
    _check_k(k)
    P, m1, m2 = moment_curves(model, np.array([x]), k)
    return _report(model, x, k, P[0], m1[0], None if m2 is None else m2[0], MomentMethod.GENERAL)


# ---------------------------------------------------------------------------
# explicit root-sum forms


@dataclass(frozen=True)
class _RootData:
    """Nonzero ``q = 0`` roots other than ``Phi(0)`` with ``psi'``, ``psi''``, ``psi'''`` there."""

    z: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


def _root_data(model: RiskModel, include_phi: bool = False) -> _RootData:
    rs = solve_roots(model, 0.0)
    zs = [z for z in rs.roots if z != 0]
    z = np.array(zs, dtype=complex)
    d = [np.array([psi_deriv(model, w, j) for w in z], dtype=complex) for j in (1, 2, 3)]
    return _RootData(z, *d)


def phase_type_constants(model: RiskModel) -> dict:
    """Constants of the explicit forms.

    Unprofitable: ``C1``, ``C2`` (closed expressions in ``psi`` derivatives) and
    the slope of the linear term of the second moment. Profitable: arrays
    ``B`` and ``C`` indexed like the nonzero negative roots.
    """
    regime = classify(model)
    a1 = regime.drift
    a2 = psi_deriv(model, 0.0, 2)
    a3 = psi_deriv(model, 0.0, 3)
    if not regime.profitable:
        phi0 = solve_roots(model, 0.0).phi
        dphi = psi_deriv(model, phi0, 1)
        C1 = 1 / (phi0 * a1) + a2 / (2 * a1**2)
        C2 = (
            2 * a2 / (phi0 * a1**3)
            + 2 / (phi0**2 * dphi * a1)
            + 3 * a2**2 / (2 * a1**4)
            - 2 * a3 / (3 * a1**3)
        )
        lin2 = -2 / a1**2 * (a2 / a1 + 1 / phi0)
        return {"C1": C1, "C2": C2, "lin2": lin2, "phi0": phi0, "dphi0": dphi}
    rd = _root_data(model)
    z, d1, d2, d3 = rd.z, rd.d1, rd.d2, rd.d3
    B = a2 / (a1**2 * d1**2) - 2 / (d1**2 * z * a1) - 3 * d2 / d1**4
    C = (
        2 / (d1**2 * z**2 * a1)
        - d3 / d1**4
        + a3 / (3 * d1 * a1**3)
        - a2**2 / (2 * d1 * a1**4)
        - d2 / d1 * B
    )
    return {"B": B, "C": C}


def _eps_terms(model: RiskModel, x):
    """``(eps1(x), eps2(x))`` of the unprofitable explicit form."""
    const = phase_type_constants(model)
    phi0, dphi = const["phi0"], const["dphi0"]
    rd = _root_data(model)
    z, d1, d2 = rd.z, rd.d1, rd.d2
    x = np.asarray(x, dtype=float)
    e = np.exp(np.multiply.outer(x, z))
    xs = x[..., None]
    eps1 = e @ (1 / d1 * (1 / phi0 - 1 / z))
    term = (
        xs * e / d1**2 * (1 / z - 1 / phi0)
        + e * (d2 / d1**3) * (1 / phi0 - 1 / z)
        + e * (1 / (phi0**2 * dphi * d1) - 1 / (d1**2 * z**2))
    )
    eps2 = 2 * term.sum(axis=-1)
    return eps1.real, eps2.real


def phase_type_curves(model: RiskModel, x, k: int = 2):
    """Vectorised ``(ruin_prob, mean, second)`` from the explicit root-sum forms."""
    _check_k(k)
    regime = classify(model)
    x = np.asarray(x, dtype=float)
    a1 = regime.drift
    a2 = psi_deriv(model, 0.0, 2)
    a3 = psi_deriv(model, 0.0, 3)
    w0 = 0.0 if model.perturbed else 1.0 / model.p
    if not regime.profitable:
        const = phase_type_constants(model)
        eps1, eps2 = _eps_terms(model, x)
        m1 = -x / a1 + const["C1"] + eps1
        m2 = x**2 / a1**2 + const["lin2"] * x + const["C2"] + eps2
        # the explicit x = 0 values
        at0 = x == 0
        phi0, dphi = const["phi0"], const["dphi0"]
        m1 = np.where(at0, w0 / phi0, m1)
        m2 = np.where(at0, 2 * w0 / (phi0**2 * dphi), m2)
        return np.ones_like(x), m1, (m2 if k >= 2 else None)
    if model.perturbed and np.any(x == 0):
        raise InitialCapitalExcluded("x = 0 is excluded when sigma2 > 0 in the profitable regime")
    const = phase_type_constants(model)
    rd = _root_data(model)
    z, d1, d2 = rd.z, rd.d1, rd.d2
    s = float(np.max(z.real))
    e = np.exp(np.multiply.outer(x, z - s))
    xs = x[..., None]
    D = (e / d1).sum(axis=-1).real
    num1 = (
        (e * xs / d1**2).sum(axis=-1)
        - (e * (d2 / d1**3 - a2 / (2 * a1**2 * d1) + 1 / (a1 * d1 * z))).sum(axis=-1)
    ).real
    m1 = -num1 / D
    num2 = (e * (xs**2 / d1**3 + const["B"] * xs + const["C"])).sum(axis=-1).real
    m2 = num2 / D
    P = _clamp_prob(-a1 * D * np.exp(s * x))
    at0 = x == 0
    if np.any(at0):
        lead = 1.0 / (w0 - 1.0 / a1)
        m1 = np.where(at0, lead * (-a2 / (2 * a1**2)) * w0, m1)
        m2 = np.where(at0, lead * (a3 / (3 * a1**3) - a2**2 / (2 * a1**4)) * w0, m2)
    return P, m1, (m2 if k >= 2 else None)


def moments_phase_type(model: RiskModel, x: float, k: int = 2) -> MomentReport:
    """Conditional moments from the explicit root-sum forms for phase-type claims."""
    P, m1, m2 = phase_type_curves(model, np.array([x]), k)
    return _report(
        model, x, k, P[0], m1[0], None if m2 is None else m2[0], MomentMethod.PHASE_TYPE_CLOSED
    )


# ---------------------------------------------------------------------------
# exponential claims


def exponential_curves(model: RiskModel, x, k: int = 2):
    """Vectorised ``(ruin_prob, mean, second)`` for exponential claims of rate ``gamma``."""
    _check_k(k)
    if not model.claims.is_exponential:
        raise NotExponentialClaims(f"claims have {model.claims.d} phases; need 1")
    regime = classify(model)
    x = np.asarray(x, dtype=float)
    p, lam, g, s2 = model.p, model.lam, model.claims.rate, model.sigma2
    if s2 == 0:
        a = abs(p * g - lam)
        if regime.profitable:
            m1 = (lam / p * x + 1) / (p * g - lam)
            P = lam / (p * g) * np.exp(-(g - lam / p) * x)
        else:
            m1 = (g * x + 1) / (lam - p * g)
            P = np.ones_like(x)
        var = (2 * lam * g * x + p * g + lam) / a**3
        return P, m1, (var + m1**2 if k >= 2 else None)
    if regime.profitable and np.any(x == 0):
        raise InitialCapitalExcluded("x = 0 is excluded when sigma2 > 0 in the profitable regime")
    r = math.sqrt((g * s2 - 2 * p) ** 2 + 8 * lam * s2)
    if not regime.profitable:
        a = lam - p * g
        kap = (g * s2 + 2 * p + r) / (2 * s2)
        decay = -np.expm1(-kap * x)
        B = 2 * g**2 / a**2 * (2 * lam / (g * a) + g * s2 / a + 2 * s2 / (g * s2 + 2 * p - r))
        C1 = lam / a**2 + g**2 * s2 / (2 * a**2) + 2 * g * s2 / (a * (g * s2 + 2 * p - r))
        C2 = (
            -4 * lam / a**3
            + 3 * (s2 * g**2 + 2 * lam) ** 2 / (2 * a**4)
            + (4 * g**3 * s2**2 + 8 * lam * g * s2) / (a**3 * (g * s2 + 2 * p - r))
            + 16 * g * s2**2 / (r * a) * (g * s2 - 2 * p + r) / (g * s2 + 2 * p - r) ** 3
        )
        ratio = ((g * s2 - 2 * p - r) / (g * s2 + 2 * p + r)) ** 2
        m1 = g / a * x + C1 * decay
        m2 = (
            g**2 / a**2 * x**2
            + (B - ratio * 4 / (r * a) * np.exp(-kap * x)) * x
            + C2 * decay
        )
        return np.ones_like(x), m1, (m2 if k >= 2 else None)
    b = p * g - lam
    eps = (
        -(g * s2 - 2 * p - r) / (g * s2 - 2 * p + r)
        * (g * s2 + 2 * p - r) / (g * s2 + 2 * p + r)
        * np.exp(-r / s2 * x)
    )
    w_plus = 1 / (1 + eps)
    w_minus = eps / (1 + eps)  # = 1 / (1 + 1/eps)
    parts = {}
    for sg in (1, -1):
        u = (g * s2 - 2 * p + sg * r) / (g * s2 + 2 * p - sg * r)
        bracket = 1 + 16 * lam * g * s2**2 / (g * s2 - 2 * p + sg * r) ** 3
        A = (
            -lam / b**2
            - g**2 * s2 / (2 * b**2)
            - 2 * g * s2 / (b * (g * s2 + 2 * p - sg * r))
            + 4 * s2 / r**2 * u**2 * bracket
        )
        Bc = -sg * 2 / r * u * (
            (2 * lam + g**2 * s2) / b**2 + 4 * g * s2 / (b * (g * s2 + 2 * p - sg * r))
        ) + sg * 24 * s2 / r**3 * u**3 * bracket
        Cc = (
            -2 * lam / b**3
            - (2 * lam + g**2 * s2) ** 2 / (2 * b**4)
            + sg * 96 * g * s2**3 / r**3 * (g * s2 - 2 * p - sg * r) / (g * s2 + 2 * p - sg * r) ** 3
            - sg * 16 * g * s2**2 / (r * b) * (g * s2 - 2 * p + sg * r) / (g * s2 + 2 * p - sg * r) ** 3
            + sg * 2 * s2 / r * u * bracket * Bc
        )
        parts[sg] = (sg * 2 / r * u, A, 4 / r**2 * u**2, Bc, Cc)
    lp, Ap, qp, Bp, Cp = parts[1]
    lm, Am, qm, Bm, Cm = parts[-1]
    m1 = (x * lp + Ap) * w_plus + (x * lm + Am) * w_minus
    m2 = (x**2 * qp + x * Bp + Cp) * w_plus + (x**2 * qm + x * Bm + Cm) * w_minus
    P = np.asarray(ruin_probability(model, x), dtype=float)
    return P, m1, (m2 if k >= 2 else None)


def moments_exponential(model: RiskModel, x: float, k: int = 2) -> MomentReport:
    """Conditional moments from the closed forms for exponential claims."""
    P, m1, m2 = exponential_curves(model, np.array([x]), k)
    return _report(
        model, x, k, P[0], m1[0], None if m2 is None else m2[0], MomentMethod.EXPONENTIAL_CLOSED
    )


# ---------------------------------------------------------------------------
# convolution route and transforms


def moments_convolution(model: RiskModel, x: float, k: int, h: float | None = None) -> float:
    """``E_x[tau^k | tau < inf]`` for any ``k >= 1`` on a grid of step about ``h``.

    ``u_k P_x = (-1)^k k! (int_0^x W^{*k} - sum_l eta^(l)(0+)/l! W^{*(k-l+1)}(x))``,
    with the step shrunk so that ``x`` is a grid point.
    """
    if k < 1:
        raise UnsupportedOrder("moment order must be >= 1")
    if not x > 0:
        raise ValueError("the convolution route needs x > 0")
    regime = classify(model)
    if h is None:
        h = default_grid_step(model)
    n = int(math.ceil(x / h - 1e-9))
    h = x / n
    eta = eta_derivs(model, k)
    powers = conv_powers(model, x, h, k + 1)
    integral = powers[k - 1].cumulative_integral().values[n]
    total = integral - sum(
        eta[l] / math.factorial(l) * powers[k - l].values[n] for l in range(k + 1)
    )
    raw = (-1) ** k * math.factorial(k) * total
    P = 1.0 if not regime.profitable else float(ruin_probability(model, x))
    return raw / P


def laplace_uk(model: RiskModel, k: int, beta: float) -> float:
    """``int_0^inf e^{-beta x} E_x[tau^k; tau < inf] dx``.

    ``(-1)^k k! (1/(beta psi(beta)^k) - sum_{l=0}^k eta^(l)(0+)/l! psi(beta)^{-(k-l+1)})``;
    ``beta`` within ``1e-8`` of ``Phi(0) > 0`` uses the limit
    ``(-1)^k eta^(k+1)(0+)/(k+1)``.
    """
    if not beta > 0:
        raise BetaNonpositive(f"beta = {beta} must be positive")
    regime = classify(model)
    if not regime.profitable:
        phi0 = solve_roots(model, 0.0).phi
        if abs(beta - phi0) < LAPLACE_LIMIT_BAND:
            eta = eta_derivs(model, k + 1)
            return (-1) ** k * eta[k + 1] / (k + 1)
    eta = eta_derivs(model, k)
    ps = psi(model, float(beta))
    total = 1.0 / (beta * ps**k) - sum(
        eta[l] / math.factorial(l) / ps ** (k - l + 1) for l in range(k + 1)
    )
    return (-1) ** k * math.factorial(k) * total


def asymptotic_slope(model: RiskModel, k: int) -> AsymptoticSlope:
    """``lim E_x[tau^k]/x^k = 1/|psi'(0+)|^k`` (unprofitable); 0 in the profitable regime,
    where ``E_x[tau^k; tau < inf] -> 0``.
    """
    regime = classify(model)
    if regime.profitable:
        return AsymptoticSlope(0.0, regime)
    return AsymptoticSlope(1.0 / abs(regime.drift) ** k, regime)
