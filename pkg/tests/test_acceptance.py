"""Acceptance criteria 1-10, each at its stated tolerance and runtime budget.

Run ``pytest tests/test_acceptance.py -v`` (or this file directly); the
terminal summary prints one PASS/FAIL line per criterion.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.integrate

from _oracles import eta_by_differences
from ruinmoments.catalog import EXPONENTIAL_PROF, EXPONENTIAL_UNPROF, figure1_models
from ruinmoments.cli import main
from ruinmoments.identities import partial_fraction, root_sum_identities
from ruinmoments.model import classify
from ruinmoments.moments import (
    eta_derivs,
    laplace_uk,
    moment_curves,
    moments_convolution,
    moments_exponential,
    moments_general,
    moments_phase_type,
)
from ruinmoments.montecarlo import McConfig, estimate
from ruinmoments.roots import solve_roots
from ruinmoments.scale import laplace_check, scale_w

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
FIG1 = figure1_models()
UNPROF = {k: m for k, m in FIG1.items() if "_unprof_" in k}


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_criterion_01_laplace_identity(random_set):
    worst = 0.0
    with Budget(30):
        for m in random_set:
            for q in (0.0, 0.3, 1.0):
                phi = solve_roots(m, q).phi
                for gap in (0.5, 1.0, 2.0):
                    num, exact = laplace_check(m, q, phi + gap)
                    worst = max(worst, _rel(num, exact))
    print(f"criterion 1: max relative error {worst:.2e}")
    assert worst < 1e-6


def test_criterion_02_boundary_values(random_set):
    worst = 0.0
    for m in random_set:
        for q in (0.0, 0.3, 1.0):
            target = 0.0 if m.perturbed else 1.0 / m.p
            worst = max(worst, abs(float(scale_w(m, q, 0.0)) - target))
    print(f"criterion 2: max |W(0) - target| {worst:.2e}")
    assert worst < 1e-10


def test_criterion_03_closed_form_agreement():
    xs = np.array([0.5, 1.0, 2.0, 5.0, 10.0, 50.0])
    worst = 0.0
    with Budget(10):
        for key, m in FIG1.items():
            for x in xs:
                g = moments_general(m, x)
                others = [moments_phase_type(m, x)]
                if m.claims.is_exponential:
                    others.append(moments_exponential(m, x))
                for o in others:
                    for attr in ("ruin_prob", "mean", "second"):
                        worst = max(worst, _rel(getattr(o, attr), getattr(g, attr)))
    print(f"criterion 3: max relative disagreement {worst:.2e}")
    assert worst < 1e-8


def _mc_check(model, x, analytic, seed):
    est = estimate(model, x, McConfig(n_paths=100_000, seed=seed))
    pairs = {
        "mean": (est.mean, est.mean_se, analytic["mean"]),
        "variance": (est.variance, est.variance_se, analytic["variance"]),
    }
    if "ruin_prob" in analytic:
        pairs["ruin_prob"] = (est.ruin_prob, est.ruin_prob_se, analytic["ruin_prob"])
    zs = {k: (v - a) / se for k, (v, se, a) in pairs.items()}
    print(f"  x={x:g}: " + ", ".join(f"z[{k}] = {z:+.2f}" for k, z in zs.items()))
    return zs


def test_criterion_04_unprofitable_exponential():
    m = EXPONENTIAL_UNPROF
    with Budget(60):
        for x in (0.0, 1.0, 5.0):
            r = moments_general(m, x)
            assert r.mean == pytest.approx(2 * x + 3, rel=1e-10, abs=1e-10)
            assert r.variance == pytest.approx(36 * x + 45, rel=1e-10, abs=1e-10)
            zs = _mc_check(m, x, {"mean": 2 * x + 3, "variance": 36 * x + 45}, seed=400 + int(x))
            assert all(abs(z) < 3 for z in zs.values())


def test_criterion_05_profitable_exponential():
    m = EXPONENTIAL_PROF
    with Budget(60):
        for x in (0.0, 2.0, 6.0):
            r = moments_general(m, x)
            P = 0.75 * math.exp(-x / 6)
            assert r.ruin_prob == pytest.approx(P, rel=1e-10, abs=1e-10)
            assert r.mean == pytest.approx(1.5 * x + 3, rel=1e-10, abs=1e-10)
            assert r.variance == pytest.approx(36 * x + 63, rel=1e-10, abs=1e-10)
            ref = {"ruin_prob": P, "mean": 1.5 * x + 3, "variance": 36 * x + 63}
            zs = _mc_check(m, x, ref, seed=500 + int(x))
            assert all(abs(z) < 3 for z in zs.values())


def test_criterion_06_asymptotics():
    failures = []
    with Budget(5):
        for key, m in sorted(UNPROF.items()):
            a = abs(classify(m).drift)
            r = moments_general(m, 200.0)
            d1 = _rel(r.mean / 200.0, 1 / a)
            d2 = _rel(r.second / 200.0**2, 1 / a**2)
            print(f"criterion 6: {key}: E/x off by {d1:.2%}, E2/x^2 off by {d2:.2%}")
            if d1 >= 0.01 or d2 >= 0.02:
                failures.append(key)
    assert not failures, f"slope tolerance missed at x = 200 for {failures}"


def _order(errs):
    return [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]


def test_criterion_07_convolution_route():
    with Budget(300):
        for m, x in ((EXPONENTIAL_UNPROF, 2.0), (FIG1["y_unprof_s2"], 2.0), (FIG1["x_prof_s0"], 2.0)):
            ref = moments_general(m, x)
            h = 0.04
            for k, val in ((1, ref.mean), (2, ref.second)):
                errs = [abs(moments_convolution(m, x, k, h / 2**j) - val) for j in range(3)]
                orders = _order(errs)
                print(f"criterion 7: k={k} errors {['%.2e' % e for e in errs]} orders {['%.2f' % o for o in orders]}")
                assert min(orders) >= 1.8
        m, x = EXPONENTIAL_UNPROF, 2.0
        conv3 = moments_convolution(m, x, 3, h=0.0025)
        est = estimate(m, x, McConfig(n_paths=1_000_000, seed=7, workers=4, block_size=125_000))
        z = (est.third - conv3) / est.third_se
        print(f"criterion 7: E[tau^3] convolution {conv3:.6g}, MC {est.third:.6g} +- {est.third_se:.3g}, z = {z:+.2f}")
        assert abs(z) < 3


def test_criterion_08_proof_identities(random_set):
    worst_pf = worst_rs = 0.0
    for m in random_set:
        for q in (0.0, 0.3, 1.0):
            phi = solve_roots(m, q).phi
            for gap in (0.5, 1.0, 2.0):
                worst_pf = max(worst_pf, partial_fraction(m, q, phi + gap).residual)
        worst_rs = max(worst_rs, max(r.residual for r in root_sum_identities(m)))
    print(f"criterion 8: partial fractions {worst_pf:.2e}, root sums {worst_rs:.2e}")
    assert worst_pf < 1e-8 and worst_rs < 1e-8
    worst_eta = 0.0
    for m in list(FIG1.values()) + list(random_set):
        e = eta_derivs(m, 2)
        d1, d2 = eta_by_differences(m)
        worst_eta = max(worst_eta, abs(e[1] - d1) / max(1, abs(d1)), abs(e[2] - d2) / max(1, abs(d2)))
    print(f"criterion 8: eta derivatives vs differences {worst_eta:.2e}")
    assert worst_eta < 1e-5


def _laplace_numeric(m, k, beta):
    def u(x):
        P, m1, m2 = moment_curves(m, np.array([x]), 2)
        return float(P[0] * (m1[0] if k == 1 else m2[0]))

    f = lambda x: math.exp(-beta * x) * u(x)
    # polynomial growth times e^{-beta x}: the tail past X is below 1e-14 of the total
    X = 60.0 / beta
    edges = np.linspace(0.0, X, 31)
    return math.fsum(
        scipy.integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0] for a, b in zip(edges[:-1], edges[1:])
    )


def test_criterion_09_laplace_of_moments():
    worst = 0.0
    for m in (EXPONENTIAL_UNPROF, EXPONENTIAL_PROF, FIG1["y_unprof_s2"], FIG1["x_prof_s0"]):
        for k in (1, 2):
            for beta in (0.2, 0.5, 1.0):
                worst = max(worst, _rel(_laplace_numeric(m, k, beta), laplace_uk(m, k, beta)))
    print(f"criterion 9: quadrature vs transform {worst:.2e}")
    assert worst < 1e-5
    # int e^{-beta x} u_k ~ k!/(beta^{k+1} |psi'(0+)|^k) as beta -> 0 (unprofitable)
    beta = 1e-3
    cases = [(EXPONENTIAL_UNPROF, 1), (EXPONENTIAL_UNPROF, 2)] + [(m, 1) for m in UNPROF.values()]
    for m, k in cases:
        a = abs(classify(m).drift)
        ratio = laplace_uk(m, k, beta) * beta ** (k + 1) * a**k / math.factorial(k)
        print(f"criterion 9: Tauberian ratio k={k}: {ratio:.5f}")
        assert abs(ratio - 1) < 0.01


def _curve(tmp_path, key, x_max=100.0, steps=201):
    out = tmp_path / f"{key}.csv"
    code = main(["curve", "--config", str(CONFIGS / f"figure1_{key}.json"), "--x-min", "0", "--x-max", str(x_max),
                 "--steps", str(steps), "--out", str(out)])
    assert code == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (steps, 5)
    return data


def test_criterion_10_figure1_shapes(tmp_path):
    with Budget(10):
        curves = {key: _curve(tmp_path, key) for key in FIG1}
    for c in "xyz":
        s0, s2 = curves[f"{c}_unprof_s0"], curves[f"{c}_unprof_s2"]
        assert np.all(np.diff(s0[:, 2]) >= 0) and np.all(np.diff(s2[:, 2]) >= 0)
        assert np.all(s2[:, 2] < s0[:, 2])
        p0, p2 = curves[f"{c}_prof_s0"], curves[f"{c}_prof_s2"]
        print(f"criterion 10: {c}: E_100 profitable s0 {p0[-1, 2]:.4g}, s2 {p2[-1, 2]:.4g}")
        assert p2[-1, 2] > p0[-1, 2]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
