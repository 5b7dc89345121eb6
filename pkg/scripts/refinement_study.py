"""Residual reduction under uniform refinement of a converged 3D run.

    python scripts/refinement_study.py [--config configs/demo.toml] [--levels 3]

Prints each residual family per level and the ratio between consecutive
levels (about 4 for a second-order discretisation).
"""
import argparse
import time

from mhdshock.config import load_config
from mhdshock.driver import run

KEYS = ("mhd", "rh", "F", "F_printed_variant", "deformation_curl", "Pi", "exit")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--N1", type=int, default=65)
    ap.add_argument("--N", type=int, default=4, help="transverse modes at the coarsest level")
    ap.add_argument("--levels", type=int, default=2)
    ap.add_argument("--tol", type=float, default=1e-9)
    a = ap.parse_args()
    cfg = load_config(a.config) if a.config else load_config("configs/demo.toml")
    cfg = cfg.with_solver(N1=a.N1, N2=a.N, N3=a.N, tol=a.tol)
    prev = None
    for lev in range(a.levels):
        c = cfg.refined(lev)
        t0 = time.perf_counter()
        _, _, rep = run(c)
        s = c.solver
        res = rep.residuals
        print(f"({s.N1},{s.N2},{s.N3})  iters {rep.iterations}  {time.perf_counter() - t0:.1f}s")
        print("   " + "  ".join(f"{k} {res[k]:.3e}" for k in KEYS))
        if prev:
            print("   ratios " + "  ".join(f"{k} {prev[k] / res[k]:.2f}" for k in KEYS))
        prev = res


if __name__ == "__main__":
    main()
