"""Roots of ``psi(z) = q``.

Multiplying ``psi(z) - q`` by ``det(zI - T)`` gives a real polynomial whose
roots are found as companion-matrix eigenvalues and then Newton-polished
against ``psi`` itself. Eigenvalues of ``T`` that cancel out of the rational
exponent show up as spurious candidates and are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.optimize

from .bell import inverse_derivatives
from .errors import (
    MultipleRootDetected,
    NearCriticalRoot,
    NegativeArgument,
    ResidualTooLarge,
    SingularResolvent,
    UnsupportedOrder,
)
from .model import RiskModel, psi, psi_derivative, psi_deriv

SEPARATION_RTOL = 1e-6
RESIDUAL_RTOL = 1e-8
_NEWTON_MAXITER = 60


@dataclass(frozen=True)
class RootSystem:
    """``Phi(q)`` and the remaining roots ``phi_1..phi_n`` of ``psi(z) = q``.

    ``roots`` is sorted by nonincreasing real part (then nonincreasing
    imaginary part); index 0 of :attr:`all_roots` is ``Phi(q)``.
    """

    q: float
    phi: float
    roots: tuple
    residuals: tuple
    min_separation: float

    @property
    def n(self) -> int:
        return len(self.roots)

    @property
    def all_roots(self) -> np.ndarray:
        return np.array((self.phi,) + self.roots, dtype=complex)


def faddeev_leverrier(T: np.ndarray):
    """Characteristic polynomial and adjugate expansion of ``zI - T``.

    Returns ``c`` (length d+1, highest degree first, ``c[0] = 1``) with
    ``det(zI - T) = sum_k c[k] z^{d-k}`` and matrices ``B[k]`` with
    ``adj(zI - T) = sum_k B[k] z^{d-1-k}``.
    """
    d = T.shape[0]
    c = [1.0]
    B = [np.eye(d)]
    for k in range(1, d + 1):
        TB = T @ B[-1]
        ck = -np.trace(TB) / k
        c.append(ck)
        if k < d:
            B.append(TB + ck * np.eye(d))
    return np.array(c), B


def char_poly(model: RiskModel, q: float) -> np.ndarray:
    """Coefficients (highest degree first) of ``(psi(z) - q) det(zI - T)``."""
    claims = model.claims
    c, B = faddeev_leverrier(claims.T_mat)
    T1 = -claims.exit_vec
    # alpha adj(zI-T) T 1 as a degree d-1 polynomial
    num = np.array([claims.alpha_vec @ Bk @ T1 for Bk in B])
    if model.sigma2 > 0:
        quad = np.array([0.5 * model.sigma2, model.p, -model.lam - q])
    else:
        quad = np.array([model.p, -model.lam - q])
    return np.polysub(np.polymul(quad, c), model.lam * num)


def _newton_polish(model: RiskModel, z: complex, q: float, real: bool):
    """Damped Newton on ``psi(z) - q``; returns ``(z, |residual|)``."""
    cast = (lambda w: float(np.real(w))) if real else complex
    z = cast(z)
    f = psi(model, z) - q
    for _ in range(_NEWTON_MAXITER):
        fp = psi_deriv(model, z, 1)
        if fp == 0:
            break
        step = f / fp
        t = 1.0
        while True:
            zn = cast(z - t * step)
            try:
                fn = psi(model, zn) - q
            except SingularResolvent:
                fn = np.inf
            if abs(fn) < abs(f) or t < 1e-6:
                break
            t *= 0.5
        if not abs(fn) < abs(f):
            break
        z, f = zn, fn
        if abs(t * step) <= 4e-16 * max(1.0, abs(z)):
            break
    return z, abs(f)


def _residual_scale(model, z, q):
    return RESIDUAL_RTOL * max(1.0, q, abs(psi_deriv(model, z, 1)))


def _pair_conjugates(values: list[complex]) -> list[complex]:
    reals, cplx = [], []
    for z in values:
        if abs(z.imag) <= 1e-10 * max(1.0, abs(z)):
            reals.append(complex(z.real, 0.0))
        else:
            cplx.append(z)
    upper = [z for z in cplx if z.imag > 0]
    lower = [z for z in cplx if z.imag < 0]
    if len(upper) != len(lower):
        raise ResidualTooLarge("complex roots do not close under conjugation")
    out = list(reals)
    for z in upper:
        j = int(np.argmin([abs(z - w.conjugate()) for w in lower]))
        w = lower.pop(j)
        if abs(z - w.conjugate()) > 1e-6 * max(1.0, abs(z)):
            raise ResidualTooLarge("complex roots do not close under conjugation")
        m = 0.5 * (z + w.conjugate())
        out += [m, m.conjugate()]
    return out


@lru_cache(maxsize=512)
def solve_roots(model: RiskModel, q: float) -> RootSystem:
    """All simple roots of ``psi(z) = q`` with ``Phi(q)`` singled out."""
    if q < 0:
        raise NegativeArgument("q must be nonnegative")
    q = float(q)
    if model.lam == 0:
        # no claims: the polynomial factor det(zI - T) carries no roots of psi - q
        candidates = np.roots([0.5 * model.sigma2, model.p, -q])
    else:
        candidates = np.roots(char_poly(model, q))
    eig = model.claims.eigenvalues
    kept = []
    for z0 in candidates:
        near_pole = model.lam > 0 and np.any(np.abs(eig - z0) < 1e-6 * (1 + np.abs(eig)))
        if near_pole:
            continue
        real = abs(z0.imag) <= 1e-10 * max(1.0, abs(z0))
        try:
            z, res = _newton_polish(model, z0, q, real)
        except SingularResolvent:
            continue
        if res < _residual_scale(model, z, q):
            kept.append(complex(z))
        elif np.any(np.abs(eig - z) < 1e-4 * (1 + np.abs(eig))):
            continue  # removable singularity surviving as a polynomial root
        else:
            raise ResidualTooLarge(f"root polish failed near z = {z0}, residual {res:.3g}")
    kept = _pair_conjugates(kept)
    if q == 0:
        i0 = int(np.argmin(np.abs(kept)))
        kept[i0] = 0j
    kept.sort(key=lambda z: (-z.real, -z.imag))
    top = kept[0]
    if top.imag != 0 or top.real < 0:
        raise ResidualTooLarge("no nonnegative real root found for Phi(q)")
    phi = top.real
    rest = tuple(kept[1:])
    allr = np.array(kept)
    sep = np.inf
    for i in range(len(allr)):
        for j in range(i + 1, len(allr)):
            dist = abs(allr[i] - allr[j])
            sep = min(sep, dist)
            if dist < SEPARATION_RTOL * (1 + abs(allr[i])):
                raise MultipleRootDetected(
                    f"roots {allr[i]:.6g} and {allr[j]:.6g} are not separated"
                )
    residuals = tuple(abs(psi(model, z) - q) for z in kept)
    return RootSystem(q, phi, rest, residuals, float(sep))


def _phi_newton(model: RiskModel, q: float, lo: float, hi: float) -> float:
    """Newton on ``psi - q`` safeguarded by the bracket ``[lo, hi]``."""
    f = lambda t: psi(model, t) - q
    x = hi
    for _ in range(200):
        fx = f(x)
        if fx > 0:
            hi = x
        else:
            lo = x
        dfx = psi_deriv(model, x, 1)
        xn = x - fx / dfx if dfx > 0 else 0.5 * (lo + hi)
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def phi_of_q(model: RiskModel, q: float) -> float:
    """Right inverse ``Phi(q) = sup{theta >= 0 : psi(theta) = q}``."""
    if q < 0:
        raise NegativeArgument("q must be nonnegative")
    d0 = psi_deriv(model, 0.0, 1)
    theta_min = 0.0
    if d0 < 0:
        hi = 1.0
        while psi_deriv(model, hi, 1) <= 0:
            hi *= 2.0
        theta_min = scipy.optimize.brentq(lambda t: psi_deriv(model, t, 1), 0.0, hi, xtol=1e-15)
    elif q == 0:
        return 0.0
    hi = max(1.0, 2 * theta_min)
    while psi(model, hi) <= q:
        hi *= 2.0
    return _phi_newton(model, q, theta_min, hi)


def root_deriv(model: RiskModel, root, order: int):
    """``d^k phi / dq^k`` along a simple root branch, k = 1..3."""
    if order not in (1, 2, 3):
        raise UnsupportedOrder(f"root_deriv supports orders 1..3, got {order}")
    d1 = psi_deriv(model, root, 1)
    if abs(d1) < 1e-10:
        raise NearCriticalRoot(f"psi'({root}) = {d1:.3g} is too small")
    if order == 1:
        return 1 / d1
    d2 = psi_deriv(model, root, 2)
    if order == 2:
        return -d2 / d1**3
    d3 = psi_deriv(model, root, 3)
    return 3 * d2**2 / d1**5 - d3 / d1**4


def root_derivs(model: RiskModel, root, n: int) -> list:
    """``[phi', ..., phi^{(n)}]`` of any order via Faa di Bruno inversion."""
    d = [psi_derivative(model, root, k) for k in range(1, n + 1)]
    if abs(d[0]) < 1e-10:
        raise NearCriticalRoot(f"psi'({root}) = {d[0]:.3g} is too small")
    return inverse_derivatives(d, n)
