"""Write t,P_r,P_fp tables for the few-site chains, the infinite lattice and the classical pair.

    python scripts/curve_data.py --out-dir curves

Each chain table covers [0, T]; the lattice table covers the validated
window.  Files go through the CLI writer so they match ``qfpt solve`` output.
"""
import argparse
import os

import numpy as np

from qfpt import InitialState, Partition, TightBindingChain, solve_exact
from qfpt.cli import write_csv
from qfpt.fptcore import assemble
from qfpt.lattice import VALIDATED_T_MAX, solve_lattice_inversion
from qfpt.volterra import TimeGrid, classical_two_site

CHAINS = {"chain2": (2, 1), "chain3": (3, 2), "chain4": (4, 2)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="curves")
    ap.add_argument("--h", type=float, default=1e-3)
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    for name, (n, b) in CHAINS.items():
        sol = assemble(name, *solve_exact(TightBindingChain(n), Partition(b), InitialState(1)))
        t = np.append(np.arange(0.0, sol.T, args.h), sol.T)
        write_csv(os.path.join(args.out_dir, f"{name}.csv"), t, sol.pr(t), sol.pfp(t))
        print(f"{name}: T={sol.T:.6f} rows={len(t)}")

    grid = TimeGrid(VALIDATED_T_MAX, args.h)
    lat = solve_lattice_inversion(grid)
    write_csv(os.path.join(args.out_dir, "lattice.csv"), lat.t, lat.pr, lat.pfp)
    print(f"lattice: min P_fp={lat.pfp.min():.4g} at t={lat.t[np.argmin(lat.pfp)]:.3f}")

    grid = TimeGrid(10.0, args.h)
    pr, pfp = classical_two_site(1.0, grid)
    write_csv(os.path.join(args.out_dir, "classical2.csv"), grid.nodes, pr, pfp)
    print("classical2: rate 1 on [0, 10]")


if __name__ == "__main__":
    main()
