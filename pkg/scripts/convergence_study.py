"""Grid convergence of the convolution route and the large-x approach to the
linear asymptote.

    python3 scripts/convergence_study.py
"""

import math

from ruinmoments.catalog import EXPONENTIAL_UNPROF, figure1_models
from ruinmoments.model import classify
from ruinmoments.moments import moments_convolution, moments_general


def grid_study(name, model, x=2.0, h0=0.04, levels=5):
    ref = moments_general(model, x)
    print(f"\n{name}: x = {x:g}, closed forms E = {ref.mean:.12g}, E2 = {ref.second:.12g}")
    print(f"{'h':>10}{'err k=1':>12}{'order':>7}{'err k=2':>12}{'order':>7}{'k=3':>16}")
    prev = None
    for j in range(levels):
        h = h0 / 2**j
        e1 = abs(moments_convolution(model, x, 1, h) - ref.mean)
        e2 = abs(moments_convolution(model, x, 2, h) - ref.second)
        m3 = moments_convolution(model, x, 3, h)
        o1 = f"{math.log2(prev[0] / e1):7.2f}" if prev else " " * 7
        o2 = f"{math.log2(prev[1] / e2):7.2f}" if prev else " " * 7
        print(f"{h:>10.5f}{e1:>12.3e}{o1}{e2:>12.3e}{o2}{m3:>16.10g}")
        prev = (e1, e2)


def asymptote_study():
    print("\nrelative gap to the asymptotic slopes 1/|psi'(0+)| and 1/psi'(0+)^2")
    xs = (50.0, 200.0, 1000.0, 5000.0)
    print(f"{'model':<14}" + "".join(f"{'x=%g' % x:>18}" for x in xs))
    for key, m in sorted(figure1_models().items()):
        if "_unprof_" not in key:
            continue
        a = abs(classify(m).drift)
        cells = []
        for x in xs:
            r = moments_general(m, x)
            cells.append(f"{r.mean * a / x - 1:>+9.2%}{r.second * a * a / x**2 - 1:>+9.2%}")
        print(f"{key:<14}" + "".join(cells))


if __name__ == "__main__":
    grid_study("exponential unprofitable", EXPONENTIAL_UNPROF)
    grid_study("Y claims, unprofitable, sigma2 = 2", figure1_models()["y_unprof_s2"])
    grid_study("X claims, profitable, sigma2 = 0", figure1_models()["x_prof_s0"])
    asymptote_study()
