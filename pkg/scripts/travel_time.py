"""Travel time T^s: closed form vs integrating H_{phi-hat^u} until phi^s = 0."""

import argparse
import time

from kerrtrap import flow, trapping
from kerrtrap.spacetime import BlackHoleParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spin", type=float, default=0.5)
    ap.add_argument("--lambda", dest="cosmo", type=float, default=0.0)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()
    params = BlackHoleParams(1.0, args.spin, args.cosmo)
    pts = trapping.sample_neighborhood(params, args.n, args.seed)
    t0 = time.perf_counter()
    gaps = [abs(flow.travel_time_closed(params, p) - flow.travel_time_numeric(params, p)) for p in pts]
    print(f"{len(pts)} points, max gap {max(gaps):.3e}, mean gap {sum(gaps) / len(gaps):.3e}, "
          f"{time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
