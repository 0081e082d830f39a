"""Closed-form expansion rate vs the slope of log|phi^u| along the flow."""

import argparse
import itertools

from kerrtrap import flow, trapping
from kerrtrap.spacetime import BlackHoleParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=9, help="Gamma samples per (a, Lambda)")
    ap.add_argument("--seed", type=int, default=31)
    args = ap.parse_args()
    print("spin,lambda,xi_t,xi_phi,theta,w_closed,w_flow,rel_err")
    for a, lam in itertools.product((0.0, 0.5, 0.9), (0.0, 0.02)):
        params = BlackHoleParams(1.0, a, lam)
        for d in trapping.sample_trapped_set(params, args.n, args.seed):
            w, _ = trapping.expansion_rate(params, d.point)
            wf = flow.linearization_rate(params, d.point) * trapping.rate_normalization(d.point)
            print(f"{a},{lam},{d.xi_t:.6f},{d.xi_phi:.6f},{d.point.theta:.6f},{w:.9f},{wf:.9f},{abs(wf - w) / w:.2e}")


if __name__ == "__main__":
    main()
