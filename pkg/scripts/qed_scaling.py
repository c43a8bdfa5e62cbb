"""Monte Carlo scaling of the reduced QED integral in e_l at d = 3.

Usage: python scripts/qed_scaling.py [--samples 1000000] [--seed 0]

The integrand's 1/|s1 - s2|^2 factor makes the 2+2 dimensional integral
log-divergent at coincident points, so the standard error stays large; the
script reports it per point rather than aborting.
"""

from __future__ import annotations

import argparse

import numpy as np

from pinchlab.oracle import fit_slope, qed_reduced_numeric


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    res = [qed_reduced_numeric(e, 3, args.samples, args.seed, check=False) for e in np.geomspace(1e-1, 1e-3, 7)]
    print("e_l,value,stderr,rel_err")
    for r in res:
        print(f"{r.e_l:.6g},{r.value:.6g},{r.stderr:.3g},{r.stderr / r.value:.3f}")
    fit = fit_slope([(r.e_l, r.value) for r in res])
    print(f"# slope {fit.slope:.4f} (predicted -1), r2 {fit.r_squared:.6f}")


if __name__ == "__main__":
    main()
