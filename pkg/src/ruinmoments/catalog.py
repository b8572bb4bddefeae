"""Reference models: the three claim laws of the comparison study, the
exponential running example, and a seeded generator of random test models."""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .model import RiskModel, classify
from .phasetype import PhaseTypeDistribution
from .roots import solve_roots

CLAIMS = {
    "x": PhaseTypeDistribution((1.0, 0.0), ((-1.0, 0.05), (0.1, -0.1))),
    "y": PhaseTypeDistribution.hyperexponential((0.03, 0.57, 0.4), (0.07, 2.0, 0.5)),
    "z": PhaseTypeDistribution.exponential(1 / 1.57895),
}

# (p, lam) per regime; both give |psi'(0+)| close to 0.5
REGIMES = {"unprof": (1.0, 1.0), "prof": (2.0, 1.0)}
SIGMA2 = {"s0": 0.0, "s2": 2.0}


def figure1_model(claims: str, regime: str, sigma2: str) -> RiskModel:
    p, lam = REGIMES[regime]
    return RiskModel(p, SIGMA2[sigma2], lam, CLAIMS[claims])


def figure1_models() -> dict[str, RiskModel]:
    """All twelve comparison models keyed ``"{claims}_{regime}_{sigma2}"``."""
    return {
        f"{c}_{r}_{s}": figure1_model(c, r, s)
        for c in CLAIMS
        for r in REGIMES
        for s in SIGMA2
    }


def exponential_model(p: float, lam: float = 1.0, gamma: float = 2 / 3, sigma2: float = 0.0) -> RiskModel:
    return RiskModel(p, sigma2, lam, PhaseTypeDistribution.exponential(gamma))


EXPONENTIAL_UNPROF = exponential_model(1.0)
EXPONENTIAL_PROF = exponential_model(2.0)


def _random_claims(rng: np.random.Generator, d: int) -> PhaseTypeDistribution:
    rates = rng.uniform(0.3, 3.0, d)
    T = np.diag(-rates)
    if d > 1:
        # route part of each exit rate to the other phases
        w = rng.dirichlet(np.ones(d), size=d) * rng.uniform(0.0, 0.8, (d, 1))
        np.fill_diagonal(w, 0.0)
        T = T + w * rates[:, None]
    alpha = rng.dirichlet(np.ones(d))
    return PhaseTypeDistribution(tuple(alpha), T)


def random_model(rng: np.random.Generator, min_drift: float = 0.1, qs=(0.0, 0.3, 1.0)) -> RiskModel:
    """Random model with ``d <= 3`` phases, ``|psi'(0+)| >= min_drift`` and
    well-separated simple roots at every ``q`` in ``qs``."""
    while True:
        d = int(rng.integers(1, 4))
        claims = _random_claims(rng, d)
        sigma2 = 0.0 if rng.random() < 0.5 else float(rng.uniform(0.2, 2.0))
        model = RiskModel(float(rng.uniform(0.5, 3.0)), sigma2, float(rng.uniform(0.3, 2.0)), claims)
        try:
            if abs(classify(model).drift) < min_drift:
                continue
            if all(solve_roots(model, q).min_separation > 1e-3 for q in qs):
                return model
        except DomainError:
            continue


def random_models(seed: int, n: int) -> list[RiskModel]:
    rng = np.random.default_rng(seed)
    return [random_model(rng) for _ in range(n)]
