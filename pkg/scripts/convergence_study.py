"""Step-size and node-count convergence of the numerical pipelines.

    python scripts/convergence_study.py

Volterra versus the exact chain solutions for a sequence of halved steps,
then Euler and Talbot inversion of the lattice density against the Volterra
solve at a fine step.
"""
import argparse

import numpy as np

from qfpt import InitialState, Partition, TightBindingChain, solve_exact
from qfpt.lattice import invert_laplace_numeric, laplace_pfp, solve_lattice_volterra
from qfpt.propagator import return_kernel_trigsum, survival_trigsum
from qfpt.volterra import TimeGrid, solve_volterra


def chain_study(t_max, steps):
    print("sites  h         max|dP_fp|   ratio")
    for n, b in ((2, 1), (3, 2), (4, 2)):
        chain, part, nu = TightBindingChain(n), Partition(b), InitialState(1)
        _, pfp_exact = solve_exact(chain, part, nu)
        pu, k = survival_trigsum(chain, part, nu), return_kernel_trigsum(chain, part)
        prev = None
        for h in steps:
            g = TimeGrid(t_max, h)
            _, pfp = solve_volterra(pu, k, g)
            err = np.max(np.abs(pfp - pfp_exact(g.nodes)))
            ratio = f"{prev / err:7.4f}" if prev else "       "
            print(f"{n:5d}  {h:<8.2e}  {err:.4e}  {ratio}")
            prev = err


def lattice_study(t_max, h):
    grid = TimeGrid(t_max, h)
    ref = solve_lattice_volterra(grid)
    t = grid.nodes[1:]
    best = invert_laplace_numeric(laplace_pfp, t, "euler", 64)
    print(f"\nlattice P_fp on (0, {t_max}]: vs Volterra at h={h:g}, and vs Euler with 64 terms")
    for method, counts in (("euler", (16, 24, 32, 48)), ("talbot", (16, 20, 24, 32))):
        for m in counts:
            kw = {"r_min": 4.0} if method == "talbot" else {}
            F = (lambda s: laplace_pfp(s, continued=True)) if method == "talbot" else laplace_pfp
            try:
                vals = invert_laplace_numeric(F, t, method, m, tol=np.inf, **kw)
                print(f"{method:6s} nodes={m:3d}  volterra {np.max(np.abs(vals - ref.pfp[1:])):.3e}"
                      f"  euler64 {np.max(np.abs(vals - best)):.3e}")
            except Exception as exc:  # report and keep sweeping
                print(f"{method:6s} nodes={m:3d}  {type(exc).__name__}: {exc}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tmax", type=float, default=2.0)
    ap.add_argument("--lattice-h", type=float, default=5e-4)
    args = ap.parse_args()
    chain_study(args.tmax, [4e-3, 2e-3, 1e-3, 5e-4])
    lattice_study(4.0, args.lattice_h)


if __name__ == "__main__":
    main()
