"""Command-line entry point: ``ruinmoments {moments,curve,mc,check}``.

Exit codes: 0 success, 1 statistical tripwire or failed check, 2 usage or
config error, 3 domain error, 4 no ruin observed in a Monte Carlo run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, load_config
from .errors import DomainError, NoRuinObserved
from .identities import partial_fraction, root_sum_identities
from .model import RiskModel, classify
from .moments import (
    exponential_curves,
    moment_curves,
    moments_convolution,
    phase_type_curves,
)
from .montecarlo import McConfig, estimate
from .roots import RESIDUAL_RTOL, solve_roots
from .scale import laplace_check, scale_w

EXIT_OK, EXIT_TRIPWIRE, EXIT_USAGE, EXIT_DOMAIN, EXIT_NO_RUIN = 0, 1, 2, 3, 4
Z_TRIPWIRE = 4.0
CSV_HEADER = "x,ruin_prob,mean,second,variance"

CHECK_QS = (0.0, 0.3, 1.0)
CHECK_XS = (0.5, 1.0, 2.0, 5.0, 10.0, 50.0)
AGREEMENT_RTOL = 1e-8
IDENTITY_TOL = 1e-8
LAPLACE_RTOL = 1e-6
CONV_RTOL = 1e-3


def fmt(v) -> str:
    return "%.17g" % v


# ---------------------------------------------------------------------------
# analytic curves


def _closed_curves(model: RiskModel, x, k: int):
    if model.claims.is_exponential:
        return exponential_curves(model, x, k)
    return phase_type_curves(model, x, k)


def _conv_curves(model: RiskModel, x, k: int):
    # the grid route needs x > 0; x = 0 falls back to the general expansion
    P, m1, m2 = moment_curves(model, x, k)
    m1, m2 = m1.copy(), (None if m2 is None else m2.copy())
    for i in np.flatnonzero(x > 0):
        m1[i] = moments_convolution(model, float(x[i]), 1)
        if m2 is not None:
            m2[i] = moments_convolution(model, float(x[i]), 2)
    return P, m1, m2


def curves(model: RiskModel, x, k: int = 2, method: str = "auto"):
    """``(ruin_prob, mean, second, variance)`` along ``x``.

    With ``sigma2 > 0`` in the profitable regime ruin at ``x = 0`` is
    immediate, so those rows are ``(1, 0, 0, 0)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    regime = classify(model)
    instant = (x == 0) if (regime.profitable and model.perturbed) else np.zeros(x.shape, bool)
    P = np.ones_like(x)
    m1 = np.zeros_like(x)
    m2 = np.zeros_like(x)
    rest = x[~instant]
    if rest.size:
        fn = {"auto": _closed_curves, "closed": _closed_curves, "general": moment_curves, "conv": _conv_curves}[method]
        p_, a_, b_ = fn(model, rest, k)
        P[~instant], m1[~instant] = p_, a_
        m2[~instant] = b_ if b_ is not None else np.nan
    var = m2 - m1 * m1
    return P, m1, m2, var


def write_csv(stream, x, P, m1, m2, var) -> None:
    stream.write(CSV_HEADER + "\n")
    for row in zip(x, P, m1, m2, var):
        stream.write(",".join(fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _suite(name, fn) -> list[CheckResult]:
    try:
        return fn()
    except DomainError as e:
        return [CheckResult(name, False, math.inf, f"{type(e).__name__}: {e}")]


def _roots_checks(model):
    out = []
    for q in CHECK_QS:
        rs = solve_roots(model, q)
        res = max(rs.residuals) if rs.residuals else 0.0
        out.append(CheckResult(f"root_residual(q={q:g})", res < RESIDUAL_RTOL, res, f"min separation {rs.min_separation:.3g}"))
    return out


def _partial_fraction_checks(model):
    out = []
    for q in CHECK_QS:
        phi = solve_roots(model, q).phi
        for gap in (0.5, 1.0, 2.0):
            r = partial_fraction(model, q, phi + gap)
            out.append(CheckResult(r.name, r.passed(IDENTITY_TOL), r.residual))
    return out


def _root_sum_checks(model):
    return [CheckResult(r.name, r.passed(IDENTITY_TOL), r.residual) for r in root_sum_identities(model)]


def _boundary_checks(model):
    w0 = float(scale_w(model, 0.0, 0.0))
    expect = 0.0 if model.perturbed else 1.0 / model.p
    res = abs(w0 - expect)
    return [CheckResult("scale_at_zero_boundary", res < 1e-10, res)]


def _laplace_checks(model):
    out = []
    for q in CHECK_QS:
        beta = solve_roots(model, q).phi + 1.0
        num, exact = laplace_check(model, q, beta)
        res = abs(num - exact) / abs(exact)
        out.append(CheckResult(f"laplace(q={q:g}, beta={beta:.6g})", res < LAPLACE_RTOL, res))
    return out


def _agreement_checks(model):
    x = np.array(CHECK_XS)
    ref = moment_curves(model, x, 2)
    routes = {"phase_type": phase_type_curves}
    if model.claims.is_exponential:
        routes["exponential"] = exponential_curves
    out = []
    for name, fn in routes.items():
        other = fn(model, x, 2)
        res = max(_rel(float(a), float(b)) for r, o in zip(ref, other) for a, b in zip(o, r))
        out.append(CheckResult(f"agreement(general, {name})", res < AGREEMENT_RTOL, res))
    conv = moments_convolution(model, 1.0, 1)
    res = _rel(conv, float(ref[1][1]))
    out.append(CheckResult("agreement(general, convolution) at x=1", res < CONV_RTOL, res))
    return out


def check_model(model: RiskModel) -> list[CheckResult]:
    try:
        regime = classify(model)
    except DomainError as e:
        return [CheckResult("regime", False, math.inf, f"{type(e).__name__}: {e}")]
    out = [CheckResult("regime", True, 0.0, f"{regime.tag.value}, drift {regime.drift:.6g}")]
    for name, fn in (
        ("roots", _roots_checks),
        ("partial_fraction", _partial_fraction_checks),
        ("root_sums", _root_sum_checks),
        ("boundary", _boundary_checks),
        ("laplace", _laplace_checks),
        ("agreement", _agreement_checks),
    ):
        out.extend(_suite(name, lambda fn=fn: fn(model)))
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_moments(args) -> int:
    model = load_config(args.config)
    regime = classify(model)
    P, m1, m2, var = curves(model, [args.x], min(args.k, 2), args.method)
    print(f"regime: {regime.tag.value}")
    print(f"drift: {fmt(regime.drift)}")
    print(f"method: {args.method}")
    print(f"x: {fmt(args.x)}")
    print(f"ruin_prob: {fmt(P[0])}")
    print(f"mean: {fmt(m1[0])}")
    if args.k >= 2:
        print(f"second: {fmt(m2[0])}")
        print(f"variance: {fmt(var[0])}")
    for j in range(3, args.k + 1):
        print(f"moment_{j}: {fmt(moments_convolution(model, args.x, j))}")
    return EXIT_OK


def cmd_curve(args) -> int:
    model = load_config(args.config)
    if args.steps < 1:
        raise _Usage("--steps must be at least 1")
    if args.x_max < args.x_min:
        raise _Usage("--x-max must not be below --x-min")
    x = np.linspace(args.x_min, args.x_max, args.steps)
    cols = curves(model, x, args.k, args.method)
    if args.out in (None, "-"):
        write_csv(sys.stdout, x, *cols)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as f:
                write_csv(f, x, *cols)
        except OSError as e:
            raise _Usage(f"cannot write {args.out}: {e.strerror or e}") from e
    return EXIT_OK


def cmd_mc(args) -> int:
    model = load_config(args.config)
    cfg = McConfig(
        n_paths=args.paths,
        seed=args.seed,
        barrier=args.barrier,
        bridge_tol=args.bridge_tol,
        crossing=args.crossing,
        workers=args.workers,
    )
    est = estimate(model, args.x, cfg)
    P, m1, m2, var = curves(model, [args.x], 2, "auto")
    rows = [
        ("ruin_prob", P[0], est.ruin_prob, est.ruin_prob_se),
        ("mean", m1[0], est.mean, est.mean_se),
        ("second", m2[0], est.second, est.second_se),
        ("variance", var[0], est.variance, est.variance_se),
    ]
    if args.k >= 3:
        rows.append(("moment_3", moments_convolution(model, args.x, 3), est.third, est.third_se))
    print(f"x = {fmt(args.x)}, paths = {est.n_paths}, ruined = {est.n_ruined}, escaped = {est.n_escaped}, censored = {est.n_censored}")
    if est.barrier is not None:
        print(f"barrier = {est.barrier:.6g}, ruin probability above it <= {est.bias_bound:.3g}")
    print(f"{'quantity':<10} {'analytic':>22} {'monte_carlo':>22} {'se':>12} {'z':>8}")
    worst = 0.0
    zs = {}
    for name, a, m, se in rows:
        z = (m - a) / se if se > 0 else (0.0 if m == a else math.inf)
        zs[name] = z
        worst = max(worst, abs(z))
        print(f"{name:<10} {a:>22.15g} {m:>22.15g} {se:>12.4g} {z:>8.3f}")
    if args.out:
        payload = {"estimate": dataclasses.asdict(est), "z": zs}
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
    if worst > Z_TRIPWIRE:
        print(f"tripwire: max |z| = {worst:.3f} > {Z_TRIPWIRE:g}")
        return EXIT_TRIPWIRE
    return EXIT_OK


def cmd_check(args) -> int:
    model = load_config(args.config)
    results = check_model(model)
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        line = f"{tag} {r.name:<44} residual {r.residual:.3e}"
        print(line + (f"  [{r.detail}]" if r.detail else ""))
    failed = [r for r in results if not r.passed]
    finite = [r.residual for r in results if math.isfinite(r.residual)]
    print(f"{len(results) - len(failed)}/{len(results)} passed, max residual {max(finite, default=0.0):.3e}")
    return EXIT_TRIPWIRE if failed else EXIT_OK


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ruinmoments", description="Ruin-time moments for perturbed Cramer-Lundberg models.")
    sub = ap.add_subparsers(dest="command", required=True)
    methods = ("auto", "general", "closed", "conv")

    m = sub.add_parser("moments", help="ruin probability and moments at one x")
    m.add_argument("--config", required=True)
    m.add_argument("--x", type=float, required=True)
    m.add_argument("--k", type=int, default=2)
    m.add_argument("--method", choices=methods, default="auto")
    m.set_defaults(func=cmd_moments)

    c = sub.add_parser("curve", help="CSV of moments along an x grid")
    c.add_argument("--config", required=True)
    c.add_argument("--x-min", type=float, default=0.0)
    c.add_argument("--x-max", type=float, required=True)
    c.add_argument("--steps", type=int, default=101)
    c.add_argument("--k", type=int, choices=(1, 2), default=2)
    c.add_argument("--method", choices=methods, default="auto")
    c.add_argument("--out")
    c.set_defaults(func=cmd_curve)

    s = sub.add_parser("mc", help="Monte Carlo estimates beside analytic values")
    s.add_argument("--config", required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--k", type=int, choices=(2, 3), default=2)
    s.add_argument("--barrier", type=float)
    s.add_argument("--bridge-tol", type=float, default=1e-6)
    s.add_argument("--crossing", choices=("exact", "bisect"), default="exact")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_mc)

    k = sub.add_parser("check", help="identity and cross-method diagnostics")
    k.add_argument("--config", required=True)
    k.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "k", 1) < 1:
        print("error: --k must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, _Usage) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NoRuinObserved as e:
        print(f"error: NoRuinObserved: {e}", file=sys.stderr)
        return EXIT_NO_RUIN
    except (DomainError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
