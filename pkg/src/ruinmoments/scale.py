"""q-scale functions of the phase-type risk model.

With simple roots the scale function is a finite exponential sum

    W^(q)(x) = sum_{z in {Phi(q)} u R_q} exp(z x) / psi'(z),   x >= 0,

so its x-antiderivative and q-derivatives are again sums of
``exp(z x) * polynomial(x)`` terms. :class:`ScaleTermExpansion` stores such
sums coefficient-wise; linear combinations are formed on the coefficients
before any exponential is evaluated, which keeps cancelling ``exp(Phi x)``
growth out of moment formulas at large ``x``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .errors import BetaTooSmall
from .model import RiskModel, psi, psi_deriv
from .roots import RootSystem, root_deriv, solve_roots

_EPS = np.finfo(float).eps
# combined coefficients below this multiple of eps * (sum of |contributions|) are zero
FLUSH_ULPS = 64.0


@dataclass(frozen=True)
class ScaleTermExpansion:
    """``sum_i exp(r_i x) sum_j coeffs[i, j] x^j + sum_j poly[j] x^j``.

    ``roots`` holds only nonzero roots; terms at a zero root live in ``poly``.
    """

    roots: np.ndarray
    coeffs: np.ndarray
    poly: np.ndarray

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def padded(self, deg: int) -> "ScaleTermExpansion":
        extra = deg - self.degree
        if extra <= 0:
            return self
        return ScaleTermExpansion(
            self.roots,
            np.pad(self.coeffs, ((0, 0), (0, extra))),
            np.pad(self.poly, (0, extra)),
        )

    def evaluate_complex(self, x, shift: float = 0.0):
        x = np.asarray(x, dtype=float)
        xs = x[..., None]
        powers = xs ** np.arange(self.degree + 1)
        # rows that cancelled exactly are skipped so that inf * 0 never occurs
        live = np.any(self.coeffs != 0, axis=1)
        exps = np.exp(np.multiply.outer(x, self.roots[live] - shift))
        val = np.einsum("...i,ij,...j->...", exps, self.coeffs[live], powers)
        if np.any(self.poly != 0):
            val = val + np.exp(-shift * x) * (powers @ self.poly)
        return val

    def __call__(self, x, shift: float = 0.0):
        """Real value times ``exp(-shift x)``; zero for ``x < 0``."""
        x = np.asarray(x, dtype=float)
        val = self.evaluate_complex(np.maximum(x, 0.0), shift).real
        val = np.where(x < 0, 0.0, val)
        return val if val.ndim else float(val)

    def imag_residue(self, x) -> float:
        """``|Im| / max(1, |Re|)`` at ``x``; should sit at rounding level."""
        v = self.evaluate_complex(x)
        return float(np.max(np.abs(v.imag) / np.maximum(1.0, np.abs(v.real))))

    def without_rate(self, z: complex) -> "ScaleTermExpansion":
        """Drop the exponential row of root ``z`` (known to cancel analytically)."""
        coeffs = np.where((self.roots == z)[:, None], 0.0, self.coeffs)
        return ScaleTermExpansion(self.roots, coeffs, self.poly)

    def without_poly(self) -> "ScaleTermExpansion":
        return ScaleTermExpansion(self.roots, self.coeffs, np.zeros_like(self.poly))

    def leading_rate(self) -> float:
        """Largest real part among roots with a nonzero coefficient (0 for a polynomial part)."""
        live = np.any(self.coeffs != 0, axis=1)
        rates = list(self.roots[live].real)
        if np.any(self.poly != 0):
            rates.append(0.0)
        return max(rates) if rates else 0.0


def combine(*pairs) -> ScaleTermExpansion:
    """Linear combination ``sum a_k E_k`` over expansions sharing one root set.

    Coefficients that cancel to within ``FLUSH_ULPS`` rounding units of the
    magnitudes that produced them are set to exactly zero.
    """
    deg = max(e.degree for _, e in pairs)
    pairs = [(a, e.padded(deg)) for a, e in pairs]
    roots = pairs[0][1].roots
    coeffs = sum(a * e.coeffs for a, e in pairs)
    poly = sum(a * e.poly for a, e in pairs)
    mag_c = sum(abs(a) * np.abs(e.coeffs) for a, e in pairs)
    mag_p = sum(abs(a) * np.abs(e.poly) for a, e in pairs)
    coeffs = np.where(np.abs(coeffs) <= FLUSH_ULPS * _EPS * mag_c, 0.0, coeffs)
    poly = np.where(np.abs(poly) <= FLUSH_ULPS * _EPS * mag_p, 0.0, poly)
    return ScaleTermExpansion(roots, coeffs, poly)


def constant_expansion(value: float, like: ScaleTermExpansion) -> ScaleTermExpansion:
    poly = np.zeros(like.degree + 1, dtype=complex)
    poly[0] = value
    return ScaleTermExpansion(like.roots, np.zeros_like(like.coeffs), poly)


def _from_root_coeffs(rs: RootSystem, per_root: list[list[complex]]) -> ScaleTermExpansion:
    allr = rs.all_roots
    deg = max(len(c) for c in per_root) - 1
    nz = allr != 0
    coeffs = np.zeros((len(allr), deg + 1), dtype=complex)
    for i, c in enumerate(per_root):
        coeffs[i, : len(c)] = c
    poly = coeffs[~nz].sum(axis=0)
    return ScaleTermExpansion(allr[nz], coeffs[nz], poly)


def scale_terms(model: RiskModel, q: float, dq_order: int = 0) -> ScaleTermExpansion:
    """Expansion of ``d^k/dq^k W^(q)(x)`` (k = ``dq_order`` in 0..2).

    With ``a = phi'(q)`` and per-root term ``a exp(phi x)``, the q-derivatives
    are ``exp(phi x)(phi'' + x phi'^2)`` and
    ``exp(phi x)(phi''' + 3 x phi' phi'' + x^2 phi'^3)``.
    """
    rs = solve_roots(model, q)
    per_root = []
    for z in rs.all_roots:
        d1 = root_deriv(model, z, 1)
        if dq_order == 0:
            per_root.append([d1])
            continue
        d2 = root_deriv(model, z, 2)
        if dq_order == 1:
            per_root.append([d2, d1 * d1])
            continue
        d3 = root_deriv(model, z, 3)
        per_root.append([d3, 3 * d1 * d2, d1**3])
    return _from_root_coeffs(rs, per_root)


def integrate(e: ScaleTermExpansion) -> ScaleTermExpansion:
    """Antiderivative from 0: ``int_0^x``, term by term.

    ``int_0^x y^m e^{r y} dy = e^{r x} sum_{j<=m} (-1)^{m-j} m!/(j! r^{m-j+1}) x^j
    - (-1)^m m!/r^{m+1}``.
    """
    deg = e.degree + 1
    coeffs = np.zeros((len(e.roots), deg + 1), dtype=complex)
    poly = np.zeros(deg + 1, dtype=complex)
    for m in range(e.degree + 1):
        poly[m + 1] += e.poly[m] / (m + 1)
        c = e.coeffs[:, m]
        for j in range(m + 1):
            coeffs[:, j] += c * (-1) ** (m - j) * math.factorial(m) / (
                math.factorial(j) * e.roots ** (m - j + 1)
            )
        poly[0] -= np.sum(c * (-1) ** m * math.factorial(m) / e.roots ** (m + 1))
    return ScaleTermExpansion(e.roots, coeffs, poly)


def scale_w(model: RiskModel, q: float, x):
    """``W^(q)(x)``; zero for ``x < 0``."""
    return scale_terms(model, q)(x)


def scale_w_int(model: RiskModel, q: float, x):
    """``int_0^x W^(q)(y) dy`` via ``expm1`` per root, ``x / psi'(0)`` at a zero root."""
    rs = solve_roots(model, q)
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 0.0)
    total = np.zeros(xp.shape, dtype=complex)
    for z in rs.all_roots:
        w = 1.0 / psi_deriv(model, z, 1)
        if z == 0:
            total = total + w * xp
        else:
            total = total + w * np.expm1(z * xp) / z
    out = np.where(x < 0, 0.0, total.real)
    return out if out.ndim else float(out)


def scale_z(model: RiskModel, q: float, x):
    """``Z^(q)(x) = 1 + q int_0^x W^(q)``."""
    return 1.0 + q * scale_w_int(model, q, x)


def scale_w_dq(model: RiskModel, q: float, x, order: int = 1):
    """``d^k/dq^k W^(q)(x)`` for k = 1, 2; ``q = 0`` gives the ``q -> 0+`` limit."""
    if order not in (1, 2):
        raise ValueError("scale_w_dq supports order 1 or 2")
    return scale_terms(model, q, order)(x)


def scale_w_callable(model: RiskModel, q: float):
    """Fast scalar ``x -> W^(q)(x)`` for adaptive quadrature."""
    rs = solve_roots(model, q)
    terms = [(complex(z), complex(1.0 / psi_deriv(model, z, 1))) for z in rs.all_roots]

    def w(x: float) -> float:
        if x < 0:
            return 0.0
        return sum(c * cmath.exp(z * x) for z, c in terms).real

    return w


@dataclass(frozen=True)
class GridFunction:
    """Samples on the uniform grid ``0, h, ..., N h``."""

    h: float
    values: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(len(self.values))

    def at(self, x: float) -> float:
        i = x / self.h
        k = int(round(i))
        if abs(i - k) > 1e-9 * max(1.0, i) or not 0 <= k < len(self.values):
            raise ValueError(f"x = {x} is not a grid point")
        return float(self.values[k])

    def cumulative_integral(self) -> "GridFunction":
        v = self.values
        out = np.concatenate([[0.0], np.cumsum(0.5 * self.h * (v[1:] + v[:-1]))])
        return GridFunction(self.h, out)


def trapezoid_convolve(f: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    """``(f * g)(x_n) = int_0^{x_n} f(y) g(x_n - y) dy`` by the trapezoid rule.

    End values are the right limits at 0, so a jump of ``f`` or ``g`` at the
    origin only enters with the half weights.
    """
    n = len(f)
    full = np.convolve(f, g)[:n]
    out = h * (full - 0.5 * f[0] * g - 0.5 * f * g[0])
    out[0] = 0.0
    return out


def default_grid_step(model: RiskModel) -> float:
    """Step resolving the slowest exponential of ``W^(0)`` with 200 points."""
    rs = solve_roots(model, 0.0)
    if rs.phi > 0:
        scale = 1.0 / rs.phi
    else:
        scale = 1.0 / abs(rs.roots[0].real)
    return scale / 200.0


def conv_powers(model: RiskModel, x_max: float, h: float, k_max: int) -> list[GridFunction]:
    """``(W^(0))^{*k}`` for k = 1..k_max on a grid of step ``h`` covering ``[0, x_max]``."""
    if not h > 0 or k_max < 1:
        raise ValueError("need h > 0 and k_max >= 1")
    N = int(math.ceil(x_max / h - 1e-9))
    grid = h * np.arange(N + 1)
    w = np.asarray(scale_w(model, 0.0, grid))
    out = [GridFunction(h, w)]
    for _ in range(k_max - 1):
        out.append(GridFunction(h, trapezoid_convolve(out[-1].values, w, h)))
    return out


def laplace_check(model: RiskModel, q: float, beta: float, rtol: float = 1e-12):
    """``(int_0^inf e^{-beta x} W^(q)(x) dx, 1/(psi(beta) - q))``.

    The integral runs on ``[0, X]`` by adaptive quadrature;
    ``W^(q)(x) <= e^{Phi x}/psi'(Phi)`` bounds the discarded tail.
    """
    rs = solve_roots(model, q)
    phi = rs.phi
    if beta <= phi:
        raise BetaTooSmall(f"beta = {beta} must exceed Phi(q) = {phi}")
    exact = 1.0 / (psi(model, float(beta)) - q)
    gap = beta - phi
    w_top = 1.0 / psi_deriv(model, phi, 1)
    X = max(1.0, math.log(w_top / (gap * rtol * abs(exact))) / gap)
    w = scale_w_callable(model, q)
    f = lambda x: math.exp(-beta * x) * w(x)
    edges = np.linspace(0.0, X, int(math.ceil(X * gap / 2.0)) + 1)
    parts = [
        scipy.integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ]
    return math.fsum(parts), exact
