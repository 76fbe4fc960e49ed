#!/usr/bin/env python3
"""Write the resource-bound table and print the odd-n chain.

Usage: python scripts/make_bound_table.py [--n-max N] [--out FILE]
"""

import argparse

from ebitnet import bounds, cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=16, dest="n_max")
    ap.add_argument("--out", default="bound_table.csv")
    args = ap.parse_args()

    rc = cli.main(["bounds", "--n-max", str(args.n_max), "--output", args.out])
    if rc:
        raise SystemExit(rc)

    print("\nodd-n entanglement chain (cap <= lower <= half-transfer <= teleport):")
    for n in range(3, args.n_max + 1, 2):
        cap, _ = bounds.distillation_caps(n)
        low, _ = bounds.lower_bounds(n)
        ht, _ = bounds.half_transfer_bounds(n)
        tel, _ = bounds.teleport_resources(n)
        ints, _ = bounds.integer_one_shot_bounds(n)
        print(f"  n={n:>2}: {str(cap):>4} <= {str(low):>7} <= {str(ht):>9} <= {str(tel):>4}"
              f"   (integer one-shot: {ints})")


if __name__ == "__main__":
    main()
