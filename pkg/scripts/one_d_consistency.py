"""Uniform exit perturbation against the re-solved 1D background family.

    python scripts/one_d_consistency.py

Separates the two error sources in |V7 - shift_1D|: the ratio across
epsilon at fixed grid and the ratio across grids at fixed epsilon.
"""
import numpy as np

from mhdshock.config import RunConfig
from mhdshock.driver import oracle_shift_1d, run
from mhdshock.upstream import Mode


def discrepancy(eps, N1):
    cfg = RunConfig(Te_modes=[Mode("cos", "cos", 0, 0, 1.0)]).with_solver(
        epsilon=eps, N1=N1, N2=4, N3=4)
    _, it, _ = run(cfg, report_residuals=False)
    shift = oracle_shift_1d(cfg, 1.0)
    return float(np.max(np.abs(it.V7 - shift))), shift, float(np.ptp(it.V7))


def main():
    print("fixed grid N1 = 33")
    prev = None
    for eps in (2e-3, 1e-3, 5e-4, 2.5e-4):
        d, s, spread = discrepancy(eps, 33)
        r = f"  ratio {prev / d:.2f}" if prev else ""
        print(f"  eps {eps:.2e}  shift {s:.6e}  |V7 - shift| {d:.3e}  spread {spread:.1e}{r}")
        prev = d
    print("fixed eps = 1e-3")
    prev = None
    for N1 in (17, 33, 65):
        d, _, _ = discrepancy(1e-3, N1)
        r = f"  ratio {prev / d:.2f}" if prev else ""
        print(f"  N1 {N1:3d}  |V7 - shift| {d:.3e}{r}")
        prev = d


if __name__ == "__main__":
    main()
