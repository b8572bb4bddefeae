"""Monte Carlo estimates of the ruin probability and of ruin-time moments.

Paths are simulated exactly in distribution, interval by interval between
claim arrivals. Without perturbation the level moves linearly and ruin can
only happen at a claim. With ``sigma2 > 0`` the Gaussian endpoint of each
interval is drawn first and a crossing of zero inside the interval is decided
by the Brownian-bridge probability ``exp(-2ab/(sigma2 E))``. Given a crossing,
its time comes either from an exact time-changed inverse-Gaussian draw
(``crossing="exact"``) or from recursive bridge bisection down to
``bridge_tol`` (``crossing="bisect"``).

Randomness: one root ``SeedSequence(seed)`` is split into one child stream
per block of ``block_size`` paths, so results do not depend on ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .errors import InvalidStart, NoRuinObserved
from .model import RiskModel, classify
from .moments import ruin_probability
from .phasetype import ph_sample_many

ALIVE, RUINED, ESCAPED, CENSORED = 0, 1, 2, 3
BARRIER_RUIN_PROB = 1e-8


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    seed: int = 0
    barrier: float | None = None  # profitable runs stop as escaped above this level
    bridge_tol: float = 1e-6
    crossing: str = "exact"  # or "bisect"
    max_jumps: int = 1_000_000
    horizon: float | None = None  # paths still alive at this time are censored
    time_slice: float = 1.0  # interval length when there are no claims
    block_size: int = 50_000
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if not self.bridge_tol > 0:
            raise ValueError("bridge_tol must be positive")
        if self.barrier is not None and not self.barrier > 0:
            raise ValueError("barrier must be positive")
        if self.crossing not in ("exact", "bisect"):
            raise ValueError("crossing must be 'exact' or 'bisect'")


@dataclass(frozen=True)
class Ruined:
    time: float


@dataclass(frozen=True)
class Escaped:
    level: float


@dataclass(frozen=True)
class Censored:
    pass


@dataclass(frozen=True)
class McEstimate:
    x: float
    n_paths: int
    n_ruined: int
    n_escaped: int
    n_censored: int
    ruin_prob: float
    ruin_prob_se: float
    mean: float
    mean_se: float
    second: float
    second_se: float
    variance: float
    variance_se: float
    third: float
    third_se: float
    bias_bound: float
    barrier: float | None
    crossing_time_error: float


@dataclass
class PathBatch:
    status: np.ndarray
    time: np.ndarray
    level: np.ndarray
    jumps: np.ndarray = field(repr=False)


def default_barrier(model: RiskModel, target: float = BARRIER_RUIN_PROB) -> float:
    """Smallest level ``U`` with ``P_U(tau < inf) < target`` (profitable regime)."""
    f = lambda u: math.log(max(float(ruin_probability(model, u)), 1e-300)) - math.log(target)
    if f(0.0) < 0:
        return 0.0
    hi = 1.0
    while f(hi) >= 0:
        hi *= 2.0
    return scipy.optimize.brentq(f, hi / 2 if hi > 1 else 0.0, hi, xtol=1e-10)


def wald_sample(rng: np.random.Generator, mean: np.ndarray, shape: np.ndarray) -> np.ndarray:
    """Inverse-Gaussian draws; the small root is formed as ``mean^2 / large root``
    to avoid cancellation when ``mean`` is large."""
    y = rng.standard_normal(mean.shape) ** 2
    my = mean * y
    big = mean + my * mean / (2 * shape) + mean / (2 * shape) * np.sqrt(4 * mean * shape * y + my * my)
    small = mean * mean / big
    u = rng.random(mean.shape)
    return np.where(u <= mean / (mean + small), small, big)


def crossing_time_exact(rng, a, b, E, sigma2):
    """First time a Brownian bridge from ``a > 0`` to ``b`` over ``[0, E]`` hits 0,
    conditioned on hitting.

    With ``t = U E / (E + U)`` the hitting-time density becomes inverse Gaussian in
    ``U`` with mean ``a E / |b|`` and shape ``a^2 / sigma2``; ``b = 0`` leaves the
    Levy law ``a^2 / (sigma2 N^2)``.
    """
    a, b, E = np.asarray(a, float), np.asarray(b, float), np.asarray(E, float)
    zero = np.abs(b) < 1e-300
    mean = a * E / np.where(zero, 1.0, np.abs(b))
    shape = a * a / sigma2
    U = wald_sample(rng, mean, shape)
    if np.any(zero):
        U = np.where(zero, shape / rng.standard_normal(a.shape) ** 2, U)
    return U * E / (E + U)


def _hit_prob(a, b, dt, sigma2):
    if a <= 0 or b <= 0:
        return 1.0
    return math.exp(-2.0 * a * b / (sigma2 * dt))


def crossing_time_bisect(rng, a, b, E, sigma2, tol, max_rejects=10_000):
    """First hitting time of a bridge conditioned to hit, by recursive bisection.

    The midpoint of ``[t0, t0 + dt]`` is drawn from the bridge law
    ``N((a+b)/2, sigma2 dt / 4)`` and accepted with the hit probability
    ``1 - (1 - p1)(1 - p2)``; the earliest half that hits is kept. The hitting
    time law depends on the right end only through ``b^2``, so a positive right
    end is reflected to ``-b``; the hit is then certain and no draw is rejected.
    """
    t0, dt = 0.0, float(E)
    a, b = float(a), float(b)
    while dt > tol:
        b = -abs(b)
        half = 0.5 * dt
        for _ in range(max_rejects):
            c = 0.5 * (a + b) + math.sqrt(sigma2 * dt / 4.0) * rng.standard_normal()
            p1 = _hit_prob(a, c, half, sigma2)
            p2 = _hit_prob(c, b, half, sigma2)
            hit = 1.0 - (1.0 - p1) * (1.0 - p2)
            if rng.random() < hit:
                break
        else:
            raise RuntimeError("bridge bisection rejection cap reached")
        if rng.random() < p1 / hit:
            b = c
        else:
            t0, a = t0 + half, c
        dt = half
    return t0 + 0.5 * dt


def diffusion_step(rng, level, E, p, sigma2, config: McConfig):
    """Advance levels over intervals of length ``E`` with Brownian perturbation.

    Returns ``(hit, t_hit, endpoint)``; ``t_hit`` is meaningful where ``hit``.
    """
    end = level + p * E + math.sqrt(sigma2) * np.sqrt(E) * rng.standard_normal(level.shape)
    cross_p = np.where(end <= 0, 1.0, np.exp(-2.0 * level * np.maximum(end, 0.0) / (sigma2 * E)))
    hit = rng.random(level.shape) < cross_p
    t_hit = np.full(level.shape, np.nan)
    if np.any(hit):
        idx = np.flatnonzero(hit)
        if config.crossing == "exact":
            t_hit[idx] = crossing_time_exact(rng, level[idx], end[idx], E[idx], sigma2)
        else:
            t_hit[idx] = [
                crossing_time_bisect(rng, level[i], end[i], E[i], sigma2, config.bridge_tol)
                for i in idx
            ]
    return hit, t_hit, end


def simulate_paths(model: RiskModel, x: float, n: int, rng: np.random.Generator, config: McConfig) -> PathBatch:
    """Simulate ``n`` independent paths from ``x``; vectorised over paths."""
    if model.perturbed and not x > 0:
        raise InvalidStart("x must be positive when sigma2 > 0")
    if x < 0:
        raise InvalidStart("x must be nonnegative")
    status = np.zeros(n, dtype=np.int8)
    time = np.zeros(n)
    level = np.full(n, float(x))
    jumps = np.zeros(n, dtype=np.int64)
    barrier = config.barrier
    if barrier is not None:
        status[level >= barrier] = ESCAPED
    alive = np.flatnonzero(status == ALIVE)
    while alive.size:
        m = alive.size
        if model.lam > 0:
            E = rng.exponential(1.0 / model.lam, m)
        else:
            E = np.full(m, config.time_slice)
        truncated = np.zeros(m, dtype=bool)
        if config.horizon is not None:
            room = config.horizon - time[alive]
            truncated = E >= room
            E = np.minimum(E, room)
        y = level[alive]
        if model.perturbed:
            hit, t_hit, y = diffusion_step(rng, y, E, model.p, model.sigma2, config)
            ruined_now = hit
            t_ruin = time[alive] + t_hit
        else:
            y = y + model.p * E
            ruined_now = np.zeros(m, dtype=bool)
            t_ruin = np.full(m, np.nan)
        t_end = time[alive] + E
        escaped = ~ruined_now & (barrier is not None) & (y >= (barrier or 0.0))
        censored = ~ruined_now & ~escaped & truncated
        goes_on = ~ruined_now & ~escaped & ~censored
        if model.lam > 0 and np.any(goes_on):
            k = np.flatnonzero(goes_on)
            y[k] = y[k] - ph_sample_many(model.claims, rng, k.size)
            jumps[alive[k]] += 1
            claim_ruin = np.zeros(m, dtype=bool)
            claim_ruin[k] = y[k] < 0
            ruined_now |= claim_ruin
            t_ruin = np.where(claim_ruin, t_end, t_ruin)
            goes_on &= ~claim_ruin
        over = goes_on & (jumps[alive] >= config.max_jumps)
        censored |= over
        status[alive[ruined_now]] = RUINED
        time[alive[ruined_now]] = t_ruin[ruined_now]
        status[alive[escaped]] = ESCAPED
        status[alive[censored]] = CENSORED
        rest = ~ruined_now
        time[alive[rest]] = t_end[rest]
        level[alive] = y
        alive = alive[goes_on & ~over]
    return PathBatch(status, time, level, jumps)


def simulate_path(model: RiskModel, x: float, config: McConfig, stream: np.random.Generator):
    """One path as :class:`Ruined`, :class:`Escaped` or :class:`Censored`."""
    b = simulate_paths(model, x, 1, stream, config)
    s = int(b.status[0])
    if s == RUINED:
        return Ruined(float(b.time[0]))
    if s == ESCAPED:
        return Escaped(float(b.level[0]))
    return Censored()


def _run_block(args):
    model, x, n, seed_seq, config = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    b = simulate_paths(model, x, n, rng, config)
    return b.status, b.time


def run_blocks(model: RiskModel, x: float, config: McConfig):
    """``(status, time)`` for all paths, concatenated in block order."""
    n_blocks = -(-config.n_paths // config.block_size)
    seqs = np.random.SeedSequence(config.seed).spawn(n_blocks)
    sizes = [config.block_size] * (n_blocks - 1) + [config.n_paths - config.block_size * (n_blocks - 1)]
    jobs = [(model, x, n, s, config) for n, s in zip(sizes, seqs)]
    if config.workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    status = np.concatenate([p[0] for p in parts])
    time = np.concatenate([p[1] for p in parts])
    return status, time


def _moment_se(t: np.ndarray, k: int) -> tuple[float, float]:
    v = t**k
    n = v.size
    m = math.fsum(v) / n
    se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return m, se


def estimate(model: RiskModel, x: float, config: McConfig) -> McEstimate:
    """Ruin probability and moments of the ruin time given ruin, with standard errors."""
    regime = classify(model)
    if regime.profitable and config.barrier is None:
        config = replace(config, barrier=default_barrier(model))
    status, time = run_blocks(model, x, config)
    ruined = status == RUINED
    t = time[ruined]
    n = config.n_paths
    n_r = int(ruined.sum())
    if n_r == 0:
        raise NoRuinObserved(f"no ruin in {n} paths from x = {x}")
    p_hat = n_r / n
    m1, se1 = _moment_se(t, 1)
    m2, se2 = _moment_se(t, 2)
    m3, se3 = _moment_se(t, 3)
    c = t - m1
    var = math.fsum(c * c) / (n_r - 1) if n_r > 1 else 0.0
    mu4 = math.fsum(c**4) / n_r
    var_se = math.sqrt(max(mu4 - var * var, 0.0) / n_r)
    bias = float(ruin_probability(model, config.barrier)) if config.barrier is not None else 0.0
    return McEstimate(
        x=float(x),
        n_paths=n,
        n_ruined=n_r,
        n_escaped=int((status == ESCAPED).sum()),
        n_censored=int((status == CENSORED).sum()),
        ruin_prob=p_hat,
        ruin_prob_se=math.sqrt(p_hat * (1 - p_hat) / n),
        mean=m1,
        mean_se=se1,
        second=m2,
        second_se=se2,
        variance=var,
        variance_se=var_se,
        third=m3,
        third_se=se3,
        bias_bound=bias,
        barrier=config.barrier,
        crossing_time_error=config.bridge_tol if config.crossing == "bisect" else 0.0,
    )
