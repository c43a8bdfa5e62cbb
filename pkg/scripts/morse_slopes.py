"""Singular-part slopes of the Morse integral for n = 1..5.

Usage: python scripts/morse_slopes.py [--seed 0] [--forms 2]
Prints one line per (n, form) with the fitted slope, the expected n/2 - 1
and the fitted coefficient next to the closed-form one.
"""

from __future__ import annotations

import argparse

import numpy as np

from pinchlab.oracle import OracleConfig, morse_scan, random_spd


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--forms", type=int, default=2, help="random SPD forms per n besides the identity")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    grid = OracleConfig().eps_grid()
    print("n,form,slope,expected,r2,coefficient,exact_coefficient,stated_coefficient")
    for n in range(1, 6):
        forms = [("identity", np.eye(n))] + [(f"random{i}", random_spd(n, rng)) for i in range(args.forms)]
        for label, Q in forms:
            sc = morse_scan(Q, grid)
            slope = f"{sc.fit.slope:.5f}" if hasattr(sc.fit, "slope") else "log"
            print(f"{n},{label},{slope},{sc.exponent:.1f},{sc.fit.r_squared:.6f},"
                  f"{sc.coefficient:.6g},{sc.exact_coefficient:.6g},{sc.stated_coefficient:.6g}")


if __name__ == "__main__":
    main()
