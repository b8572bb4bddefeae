import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from ruinmoments.catalog import CLAIMS, random_models
from ruinmoments.errors import CriticalDrift, InvalidModel, UnsupportedOrder
from ruinmoments.model import RegimeTag, RiskModel, classify, psi, psi_deriv, psi_derivative
from ruinmoments.phasetype import PhaseTypeDistribution, ph_moment, ph_pdf


def _psi_by_quadrature(model, z):
    # psi(z) = p z + sigma2 z^2 / 2 + lam (E e^{-zS} - 1)
    lt, _ = scipy.integrate.quad(lambda s: np.exp(-z * s) * ph_pdf(model.claims, s), 0, np.inf, epsabs=1e-14)
    return model.p * z + 0.5 * model.sigma2 * z * z + model.lam * (lt - 1)


def test_psi_exponential_closed_form():
    m = RiskModel(1.3, 0.7, 0.9, PhaseTypeDistribution.exponential(2.0))
    for z in (0.0, 0.4, 2.0, -1.5):
        ref = 1.3 * z + 0.35 * z * z - 0.9 * z / (2.0 + z)
        assert psi(m, z) == pytest.approx(ref, abs=1e-14)


@pytest.mark.parametrize("c", sorted(CLAIMS))
def test_psi_matches_transform_of_claims(c):
    m = RiskModel(2.0, 2.0, 1.0, CLAIMS[c])
    for z in (0.1, 0.7, 3.0):
        assert psi(m, z) == pytest.approx(_psi_by_quadrature(m, z), rel=1e-9)


def test_psi_zero_and_real_output():
    m = RiskModel(2.0, 0.0, 1.0, CLAIMS["x"])
    assert psi(m, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert isinstance(psi(m, 1.0), float)
    assert isinstance(psi(m, 1.0 + 0.5j), complex)


def test_mean_drift_and_second_derivative():
    m = RiskModel(2.0, 0.5, 1.0, CLAIMS["y"])
    S = m.claims
    assert psi_deriv(m, 0.0, 1) == pytest.approx(2.0 - ph_moment(S, 1), rel=1e-13)
    assert psi_deriv(m, 0.0, 2) == pytest.approx(0.5 + ph_moment(S, 2), rel=1e-13)
    assert psi_deriv(m, 0.0, 3) == pytest.approx(-ph_moment(S, 3), rel=1e-13)
    assert psi_derivative(m, 0.0, 5) == pytest.approx(-ph_moment(S, 5), rel=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_by_finite_differences(order):
    m = RiskModel(1.0, 2.0, 1.0, CLAIMS["x"])
    z, h = 0.8, 1e-3
    f = lambda w: psi_derivative(m, w, order - 1) if order > 1 else psi(m, w)
    fd = (f(z - 2 * h) - 8 * f(z - h) + 8 * f(z + h) - f(z + 2 * h)) / (12 * h)
    assert psi_derivative(m, z, order) == pytest.approx(fd, rel=1e-8)


def test_complex_derivative_is_holomorphic():
    m = RiskModel(1.0, 2.0, 1.0, CLAIMS["y"])
    z, h = 0.3 + 0.4j, 1e-5
    fd = (psi(m, z + h) - psi(m, z - h)) / (2 * h)
    fdi = (psi(m, z + 1j * h) - psi(m, z - 1j * h)) / (2j * h)
    assert abs(fd - fdi) < 1e-8
    assert abs(psi_deriv(m, z, 1) - fd) < 1e-8


def test_classify():
    assert classify(RiskModel(1.0, 0.0, 1.0, PhaseTypeDistribution.exponential(2 / 3))).tag is RegimeTag.UNPROFITABLE
    r = classify(RiskModel(2.0, 0.0, 1.0, PhaseTypeDistribution.exponential(2 / 3)))
    assert r.profitable and r.drift == pytest.approx(0.5)
    with pytest.raises(CriticalDrift):
        classify(RiskModel(1.5, 0.0, 1.0, PhaseTypeDistribution.exponential(2 / 3)))


def test_invalid_models():
    S = PhaseTypeDistribution.exponential(1.0)
    with pytest.raises(InvalidModel):
        RiskModel(0.0, 0.0, 1.0, S)
    with pytest.raises(InvalidModel):
        RiskModel(1.0, -1.0, 1.0, S)
    with pytest.raises(InvalidModel):
        RiskModel(1.0, 0.0, 0.0, S)
    with pytest.raises(UnsupportedOrder):
        psi_deriv(RiskModel(1.0, 0.0, 1.0, S), 0.0, 4)


MODELS = random_models(7, 10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(MODELS) - 1), st.floats(0.0, 20.0))
def test_psi_convex_on_positive_axis(i, z):
    assert psi_deriv(MODELS[i], z, 2) > 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(MODELS) - 1), st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.0, 1.0))
def test_psi_convexity_inequality(i, a, b, t):
    m = MODELS[i]
    lhs = psi(m, t * a + (1 - t) * b)
    rhs = t * psi(m, a) + (1 - t) * psi(m, b)
    assert lhs <= rhs + 1e-12 * (1 + abs(rhs))
