"""Emit the data behind the comparison figure: one CSV per shipped Figure-1 config
plus a summary of the qualitative orderings.

    python3 scripts/figure1_curves.py --out-dir results/figure1
"""

import argparse
from pathlib import Path

import numpy as np

from ruinmoments.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/figure1")
    ap.add_argument("--x-max", type=float, default=100.0)
    ap.add_argument("--steps", type=int, default=401)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = {}
    for cfg in sorted(CONFIGS.glob("figure1_*.json")):
        key = cfg.stem.removeprefix("figure1_")
        path = out / f"{key}.csv"
        code = cli_main(["curve", "--config", str(cfg), "--x-max", str(args.x_max), "--steps", str(args.steps), "--out", str(path)])
        if code:
            raise SystemExit(code)
        data[key] = np.loadtxt(path, delimiter=",", skiprows=1)
    print(f"{'claims':<7}{'regime':<8}{'E_0 (s0)':>12}{'E_0 (s2)':>12}{'E_xmax (s0)':>14}{'E_xmax (s2)':>14}  s2 below s0")
    for c in "xyz":
        for r in ("unprof", "prof"):
            a, b = data[f"{c}_{r}_s0"], data[f"{c}_{r}_s2"]
            below = bool(np.all(b[:, 2] <= a[:, 2]))
            print(f"{c:<7}{r:<8}{a[0, 2]:>12.5g}{b[0, 2]:>12.5g}{a[-1, 2]:>14.5g}{b[-1, 2]:>14.5g}  {below}")


if __name__ == "__main__":
    main()
