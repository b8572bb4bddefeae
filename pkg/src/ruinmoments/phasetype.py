"""Phase-type claim-size distributions PH_d(alpha, T).

A claim is the absorption time of a Markov jump process on ``d`` transient
states started from ``alpha`` with subintensity matrix ``T``; the exit-rate
vector is ``t = -T @ 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidModel, NegativeArgument

_SUBINTENSITY_TOL = 1e-12


@dataclass(frozen=True)
class PhaseTypeDistribution:
    """Phase-type distribution with initial vector ``alpha`` and subintensity ``T``.

    Inputs are normalised to nested tuples so instances are hashable and can
    key the root-system cache.
    """

    alpha: tuple
    T: tuple

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        if alpha.ndim != 1 or T.ndim != 2 or T.shape != (alpha.size, alpha.size):
            raise DimensionMismatch(
                f"alpha has shape {alpha.shape}, T has shape {T.shape}"
            )
        if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > 1e-12:
            raise InvalidModel("alpha must be a nonnegative vector summing to 1")
        off = T - np.diag(np.diag(T))
        if np.any(off < 0):
            raise InvalidModel("off-diagonal entries of T must be nonnegative")
        if np.any(T.sum(axis=1) > _SUBINTENSITY_TOL):
            raise InvalidModel("row sums of T must be nonpositive")
        eig = np.linalg.eigvals(T)
        if np.any(eig.real >= 0):
            raise InvalidModel("T must have eigenvalues with negative real part")
        object.__setattr__(self, "alpha", tuple(float(a) for a in alpha))
        object.__setattr__(self, "T", tuple(tuple(float(v) for v in row) for row in T))

    @classmethod
    def exponential(cls, rate: float) -> "PhaseTypeDistribution":
        if not rate > 0:
            raise InvalidModel("exponential rate must be positive")
        return cls((1.0,), ((-float(rate),),))

    @classmethod
    def hyperexponential(cls, probs, rates) -> "PhaseTypeDistribution":
        return cls(tuple(probs), np.diag(-np.asarray(rates, dtype=float)))

    @property
    def d(self) -> int:
        return len(self.alpha)

    @cached_property
    def alpha_vec(self) -> np.ndarray:
        return np.array(self.alpha)

    @cached_property
    def T_mat(self) -> np.ndarray:
        return np.array(self.T)

    @cached_property
    def exit_vec(self) -> np.ndarray:
        """Absorption rates ``t = -T 1``."""
        return -self.T_mat.sum(axis=1)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.T_mat)

    @property
    def is_exponential(self) -> bool:
        return self.d == 1

    @property
    def rate(self) -> float:
        """Rate of a one-phase (exponential) distribution."""
        return -self.T[0][0]


def matrix_exp(M, t: float = 1.0) -> np.ndarray:
    """``exp(M t)`` by scaling-and-squaring with a Pade core."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix_exp needs a square matrix, got {M.shape}")
    return scipy.linalg.expm(M * t)


def _check_nonneg(z):
    if np.any(np.asarray(z) < 0):
        raise NegativeArgument("phase-type cdf/pdf need z >= 0")


def ph_cdf(dist: PhaseTypeDistribution, z):
    """``F(z) = 1 - alpha exp(Tz) 1``; vectorised over ``z``."""
    _check_nonneg(z)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    ones = np.ones(dist.d)
    out = np.array([1.0 - dist.alpha_vec @ matrix_exp(dist.T_mat, zi) @ ones for zi in zs])
    out = np.clip(out, 0.0, 1.0)
    return out if np.ndim(z) else float(out[0])


def ph_pdf(dist: PhaseTypeDistribution, z):
    """``f(z) = alpha exp(Tz) t``; vectorised over ``z``."""
    _check_nonneg(z)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    t = dist.exit_vec
    out = np.array([dist.alpha_vec @ matrix_exp(dist.T_mat, zi) @ t for zi in zs])
    out = np.maximum(out, 0.0)
    return out if np.ndim(z) else float(out[0])


def ph_moment(dist: PhaseTypeDistribution, n: int) -> float:
    """Raw moment ``E[S^n] = n! alpha (-T)^{-n} 1``."""
    if n < 1 or int(n) != n:
        raise ValueError("moment order must be a positive integer")
    v = np.ones(dist.d)
    A = -dist.T_mat
    for _ in range(int(n)):
        v = np.linalg.solve(A, v)
    return float(math.factorial(int(n)) * dist.alpha_vec @ v)


def tail_cutoff(dist: PhaseTypeDistribution, eps: float = 1e-12) -> float:
    """Smallest doubling point ``z`` with ``F(z) > 1 - eps``."""
    z = ph_moment(dist, 1)
    while 1.0 - ph_cdf(dist, z) >= eps:
        z *= 2.0
    return z


@dataclass(frozen=True)
class _JumpChain:
    """Embedded chain of the absorbing Markov process; last column is absorption."""

    rates: np.ndarray
    cum: np.ndarray


def _jump_chain(dist: PhaseTypeDistribution) -> _JumpChain:
    T = dist.T_mat
    rates = -np.diag(T)
    P = np.zeros((dist.d, dist.d + 1))
    P[:, : dist.d] = T / rates[:, None]
    np.fill_diagonal(P[:, : dist.d], 0.0)
    P[:, dist.d] = dist.exit_vec / rates
    P = np.clip(P, 0.0, None)
    cum = np.cumsum(P, axis=1)
    cum /= cum[:, -1:]
    return _JumpChain(rates, cum)


def ph_sample_many(dist: PhaseTypeDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    """Exact samples by running the absorbing jump chain for ``size`` claims at once."""
    if dist.is_exponential:
        return rng.exponential(1.0 / dist.rate, size)
    chain = _jump_chain(dist)
    d = dist.d
    state = rng.choice(d, size=size, p=dist.alpha_vec)
    total = np.zeros(size)
    alive = np.arange(size)
    while alive.size:
        s = state[alive]
        total[alive] += rng.exponential(1.0, alive.size) / chain.rates[s]
        u = rng.random(alive.size)
        nxt = (u[:, None] >= chain.cum[s]).sum(axis=1)
        nxt = np.minimum(nxt, d)
        state[alive] = nxt
        alive = alive[nxt < d]
    return total


def ph_sample(dist: PhaseTypeDistribution, rng: np.random.Generator) -> float:
    """Single exact sample; see :func:`ph_sample_many`."""
    return float(ph_sample_many(dist, rng, 1)[0])
