"""Monte Carlo against the analytic moments over every shipped config.

    python3 scripts/mc_crosscheck.py --paths 100000 --seed 0
"""

import argparse
import math
from pathlib import Path

from ruinmoments.config import load_config
from ruinmoments.errors import NoRuinObserved
from ruinmoments.moments import moments_general
from ruinmoments.montecarlo import McConfig, estimate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--x", type=float, nargs="+", default=[1.0, 5.0])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    names = sorted(p.stem for p in CONFIGS.glob("figure1_*.json")) + ["exponential_unprof", "exponential_prof"]
    print(f"{'config':<22}{'x':>5}{'ruined':>9}{'z[P]':>8}{'z[E]':>8}{'z[E2]':>8}{'z[Var]':>8}")
    worst = 0.0
    for name in names:
        m = load_config(CONFIGS / f"{name}.json")
        for x in args.x:
            r = moments_general(m, x)
            try:
                est = estimate(m, x, McConfig(n_paths=args.paths, seed=args.seed, workers=args.workers))
            except NoRuinObserved:
                print(f"{name:<22}{x:>5g}  no ruin observed")
                continue
            zs = [
                (est.ruin_prob - r.ruin_prob) / est.ruin_prob_se if est.ruin_prob_se > 0 else 0.0,
                (est.mean - r.mean) / est.mean_se,
                (est.second - r.second) / est.second_se,
                (est.variance - r.variance) / est.variance_se,
            ]
            worst = max(worst, max(abs(z) for z in zs))
            print(f"{name:<22}{x:>5g}{est.n_ruined:>9d}" + "".join(f"{z:>8.2f}" for z in zs))
    print(f"max |z| = {worst:.2f} over {len(names) * len(args.x)} cases")
    if not math.isfinite(worst) or worst > 4:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
