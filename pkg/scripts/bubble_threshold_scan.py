"""Approach the bubble threshold s* = -(m0 + m1)^2 along s* + eps e^{i theta}.

Usage: python scripts/bubble_threshold_scan.py --d 5 [--m0sq 1 --m1sq 1 --theta 1.5708 --out scan.csv]
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

from pinchlab.oracle import OracleConfig, bubble_scan


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--m0sq", type=float, default=1.0)
    ap.add_argument("--m1sq", type=float, default=1.0)
    ap.add_argument("--theta", type=float, default=math.pi / 2)
    ap.add_argument("--out", help="CSV path; stdout if omitted")
    args = ap.parse_args()
    scan = bubble_scan(args.m0sq, args.m1sq, args.d, OracleConfig().eps_grid(), args.theta)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["eps", "re", "im"])
    for e, v in scan.values:
        w.writerow([repr(e), repr(v.real), repr(v.imag)])
    if args.out:
        fh.close()
    fit = scan.fit
    if scan.logarithmic:
        print(f"# d={args.d}: log fit b={fit.b:.6g} r2={fit.r_squared:.6f} passed={scan.passed()}", file=sys.stderr)
    else:
        print(f"# d={args.d}: slope={fit.slope:.5f} predicted={scan.predicted_exponent} "
              f"r2={fit.r_squared:.6f} passed={scan.passed()}", file=sys.stderr)


if __name__ == "__main__":
    main()
