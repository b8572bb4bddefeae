import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruinmoments.catalog import figure1_models, random_models
from ruinmoments.config import load_config
from ruinmoments.errors import MultipleRootDetected, NearCriticalRoot, NegativeArgument
from ruinmoments.model import RiskModel, psi, psi_deriv
from ruinmoments.phasetype import PhaseTypeDistribution
from ruinmoments.roots import (
    char_poly,
    faddeev_leverrier,
    phi_of_q,
    root_deriv,
    root_derivs,
    solve_roots,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _exp_roots(p, lam, g, q):
    # p z^2 + (p g - lam - q) z - q g = 0
    b = p * g - lam - q
    disc = math.sqrt(b * b + 4 * p * q * g)
    return sorted([(-b + disc) / (2 * p), (-b - disc) / (2 * p)])


@pytest.mark.parametrize("p", [1.0, 2.0])
@pytest.mark.parametrize("q", [0.0, 0.3, 1.0])
def test_exponential_quadratic(p, q):
    m = RiskModel(p, 0.0, 1.0, PhaseTypeDistribution.exponential(2 / 3))
    lo, hi = _exp_roots(p, 1.0, 2 / 3, q)
    rs = solve_roots(m, q)
    assert rs.phi == pytest.approx(max(hi, 0.0), abs=1e-14)
    others = sorted(z.real for z in rs.all_roots[1:])
    expect = sorted(r for r in (lo, hi) if not math.isclose(r, rs.phi, abs_tol=1e-12))
    assert others == pytest.approx(expect, abs=1e-13)


def test_faddeev_leverrier_char_poly():
    T = np.array([[-1.0, 0.05, 0.2], [0.1, -0.1, 0.0], [0.0, 0.3, -2.0]])
    c, B = faddeev_leverrier(T)
    assert np.allclose(c, np.poly(T), atol=1e-14)
    z = 0.37
    adj = np.linalg.det(z * np.eye(3) - T) * np.linalg.inv(z * np.eye(3) - T)
    assert np.allclose(sum(Bk * z ** (2 - k) for k, Bk in enumerate(B)), adj, atol=1e-13)


@pytest.mark.parametrize("key", sorted(figure1_models()))
def test_char_poly_vanishes_at_roots(key):
    m = figure1_models()[key]
    for q in (0.0, 0.5):
        c = char_poly(m, q)
        d = m.claims.d
        assert len(c) == d + (3 if m.perturbed else 2)
        for z in solve_roots(m, q).all_roots:
            assert abs(psi(m, z) - q) < 1e-9 * (1 + abs(z)) ** 2


@pytest.mark.parametrize("key", sorted(figure1_models()))
def test_root_count_and_location(key):
    m = figure1_models()[key]
    rs = solve_roots(m, 0.5)
    # psi - q has d + 1 roots (d + 2 with perturbation), only Phi in the right half plane
    assert rs.n + 1 == m.claims.d + (2 if m.perturbed else 1)
    assert rs.phi > 0
    assert all(z.real < 0 for z in rs.roots)


def test_phi_agrees_with_bracketing(random_set):
    for m in random_set:
        for q in (0.0, 0.3, 1.0):
            assert solve_roots(m, q).phi == pytest.approx(phi_of_q(m, q), rel=1e-12, abs=1e-14)


def test_conjugate_pairs_close(random_set):
    for m in random_set:
        roots = solve_roots(m, 0.3).all_roots
        assert np.allclose(np.sort_complex(roots), np.sort_complex(roots.conj()), atol=1e-12)


def test_root_derivatives_finite_difference():
    m = figure1_models()["y_prof_s2"]
    q, h = 0.5, 1e-3
    f = [phi_of_q(m, q + j * h) for j in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    phi = solve_roots(m, q).phi
    assert root_deriv(m, phi, 1) == pytest.approx(d1, rel=1e-9)
    assert root_deriv(m, phi, 2) == pytest.approx(d2, rel=1e-6)
    assert np.allclose(root_derivs(m, phi, 3), [root_deriv(m, phi, k) for k in (1, 2, 3)], rtol=1e-12)


def test_complex_root_branch_derivative():
    m = RiskModel(1.0, 2.0, 1.0, PhaseTypeDistribution((1.0, 0.0, 0.0), ((-3, 3, 0), (0, -3, 3), (0, 0, -3))))
    z0 = next(z for z in solve_roots(m, 0.4).roots if abs(z.imag) > 1e-6)
    h = 1e-4
    z1 = min(solve_roots(m, 0.4 + h).roots, key=lambda z: abs(z - z0))
    zm = min(solve_roots(m, 0.4 - h).roots, key=lambda z: abs(z - z0))
    assert abs(root_deriv(m, z0, 1) - (z1 - zm) / (2 * h)) < 1e-6


def test_errors():
    m = figure1_models()["x_unprof_s0"]
    with pytest.raises(NegativeArgument):
        phi_of_q(m, -0.1)
    with pytest.raises(MultipleRootDetected):
        solve_roots(load_config(CONFIGS / "double_root.json"), 0.0)
    # psi' vanishes at the minimum of psi on the positive axis
    import scipy.optimize

    zmin = scipy.optimize.brentq(lambda z: psi_deriv(m, z, 1), 0.0, 5.0, xtol=1e-15)
    with pytest.raises(NearCriticalRoot):
        root_deriv(m, zmin, 1)


MODELS = random_models(3, 8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(MODELS) - 1), st.floats(0.0, 3.0))
def test_phi_is_increasing_root(i, q):
    m = MODELS[i]
    phi = solve_roots(m, q).phi
    assert psi(m, phi) == pytest.approx(q, abs=1e-9 * (1 + q))
    assert psi_deriv(m, phi, 1) > 0 or q == 0
    assert solve_roots(m, q + 0.1).phi > phi
