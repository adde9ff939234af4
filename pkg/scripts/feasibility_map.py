#!/usr/bin/env python3
"""Map the direct quadratic-certificate region in the (eps, rho) plane.

For small condition numbers the completed-square certificate admits a
band of valid (eps, rho) pairs; the band thins as kappa grows and is
empty from kappa = 3 on, because the worst curvature direction makes
the state (1 + theta, 1) gain energy under the difference map whenever
alpha*(1 + theta) reaches 1.  The map is printed as ASCII rows (rho
down, eps across, '#' feasible).
"""

import argparse
import sys

import numpy as np

from stabcert.lyapunov import contraction_rate, find_feasible_region
from stabcert.optimizers import theta_of


def render(kappa: float, eps_points: int, rho_points: int, grid: int) -> None:
    theta = theta_of(kappa)
    eps_lo = theta**2 if theta > 0.0 else 1e-9
    eps_grid = np.linspace(eps_lo, 4.0 * (1.0 + theta) ** 2, eps_points)
    rho_grid = np.linspace(1e-4, 0.5 / np.sqrt(kappa), rho_points)
    region = find_feasible_region(theta, eps_grid, rho_grid, grid_points=grid)
    valid = {(c.eps, c.rho) for c in region.feasible}

    print(f"kappa={kappa:g}  theta={theta:.4g}  feasible "
          f"{len(region.feasible)}/{len(region.certificates)}  "
          f"(ideal rate {contraction_rate(kappa).rho:.4g})")
    print(f"  eps in [{eps_grid[0]:.3g}, {eps_grid[-1]:.3g}], "
          f"rho in [{rho_grid[0]:.3g}, {rho_grid[-1]:.3g}]; rho grows downward")
    for rho in rho_grid:
        row = "".join(
            "#" if (float(eps), float(rho)) in valid else "." for eps in eps_grid
        )
        print(f"  {row}")
    if region.best is not None:
        b = region.best
        print(f"  best: eps={b.eps:.4g} rho={b.rho:.4g} margin={-b.worst_eig - b.slack:.2e}")
    print()


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappas", default="1,1.5,2,2.5,3,4",
                    help="comma-separated condition numbers")
    ap.add_argument("--eps-points", type=int, default=48)
    ap.add_argument("--rho-points", type=int, default=12)
    ap.add_argument("--grid", type=int, default=256)
    args = ap.parse_args()
    for kappa in (float(k) for k in args.kappas.split(",")):
        render(kappa, args.eps_points, args.rho_points, args.grid)
    return 0


if __name__ == "__main__":
    sys.exit(main())
