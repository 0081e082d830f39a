"""Global expansion-rate bounds across spin and cosmological constant."""

import argparse
import itertools

from kerrtrap import trapping
from kerrtrap.spacetime import BlackHoleParams, classify_subextremal


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spins", default="0,0.3,0.5,0.7,0.9")
    ap.add_argument("--lambdas", default="0,0.02")
    ap.add_argument("--grid", default="64x32x2")
    args = ap.parse_args()
    grid = tuple(int(v) for v in args.grid.split("x"))
    print("spin,lambda,nu_min,nu_max")
    for a, lam in itertools.product(map(float, args.spins.split(",")), map(float, args.lambdas.split(","))):
        params = BlackHoleParams(1.0, a, lam)
        if not classify_subextremal(params).is_subextremal:
            print(f"{a},{lam},,")
            continue
        rb = trapping.nu_bounds(params, grid)
        print(f"{a},{lam},{rb.nu_min:.6f},{rb.nu_max:.6f}")


if __name__ == "__main__":
    main()
