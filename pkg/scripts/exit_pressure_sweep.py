"""Shock position and front response across the admissible exit-pressure range.

    python scripts/exit_pressure_sweep.py [--n 7] [--eps 1e-3]
"""
import argparse

from dataclasses import replace

import numpy as np

from mhdshock.background import coefficients_at
from mhdshock.config import load_config
from mhdshock.driver import build_background, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/demo.toml")
    ap.add_argument("--n", type=int, default=7)
    ap.add_argument("--eps", type=float, default=1e-3)
    a = ap.parse_args()
    base = load_config(a.config).with_solver(epsilon=a.eps, N1=17, N2=4, N3=4,
                                                       tol=1e-9)
    for fr in np.linspace(0.05, 0.95, a.n):
        cfg = replace(base, background=replace(base.background, Pe_frac=float(fr)))
        bg = build_background(cfg)
        pos = min(coefficients_at(bg, check=False).positivity().values())
        _, it, rep = run(cfg, report_residuals=False)
        print(f"Pe_frac {fr:.3f}  rs {bg.rs:.6f}  min coeff {pos:.3f}  iters {rep.iterations}"
              f"{'' if rep.converged else ' (floor)'}"
              f"  V7 mean {np.mean(it.V7):+.3e}  sup {np.max(np.abs(it.V7)):.3e}")


if __name__ == "__main__":
    main()
