#!/usr/bin/env python3
"""Sweep condition numbers and tabulate LMI certificate outcomes.

For each kappa the script tries the sector-tuned Nesterov method and
SGD at eta = 1/beta (both with beta = 1, gamma = 1/kappa).  SGD
certifies at every kappa.  The tuned Nesterov method certifies up to
about kappa = 5; past that the two sector multipliers alone cannot
absorb the momentum cross terms, and the verdict passes through an
Inconclusive band (the search still creeping when the budget ends,
roughly kappa 5.2 to 6) before hardening to Infeasible (every restart
stalled at a clearly positive violation, kappa 8 and up), even though
the method itself converges on quadratics at every kappa.
"""

import argparse
import sys
import time

from stabcert.optimizers import NagSmoothQuadratic, SectorBounds, Sgd, lure_of
from stabcert.sdp import SolverOptions, solve_feasibility

DEFAULT_KAPPAS = (1.5, 2.0, 3.0, 4.0, 5.0, 5.2, 5.4, 6.0, 8.0, 10.0)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappas", default=",".join(str(k) for k in DEFAULT_KAPPAS),
                    help="comma-separated condition numbers")
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    kappas = [float(k) for k in args.kappas.split(",")]
    opts = SolverOptions(restarts=args.restarts, seed=args.seed)

    print(f"{'kappa':>7}  {'optimizer':<8}  {'status':<13}{'violation':>12}{'time':>8}")
    for kappa in kappas:
        bounds = SectorBounds(gamma=1.0 / kappa, beta=1.0)
        for name, spec in (
            ("nag-sq", NagSmoothQuadratic(bounds=bounds)),
            ("sgd", Sgd(eta=1.0)),
        ):
            t0 = time.time()
            res = solve_feasibility(lure_of(spec, bounds), bounds, name, options=opts)
            print(f"{kappa:>7g}  {name:<8}  {res.status:<13}"
                  f"{res.best_violation:>12.3e}{time.time() - t0:>7.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
