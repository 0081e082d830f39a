"""Canonical relations of the normal-form map, in dual-number and finite-difference modes."""

import argparse

import numpy as np

from kerrtrap import normal_form as nf, trapping
from kerrtrap.spacetime import BlackHoleParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spin", type=float, default=0.5)
    ap.add_argument("--lambda", dest="cosmo", type=float, default=0.0)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fd-steps", default="1e-3,1e-4,1e-5,1e-6")
    args = ap.parse_args()
    params = BlackHoleParams(1.0, args.spin, args.cosmo)
    pts = trapping.sample_neighborhood(params, args.n, args.seed)
    dual = [nf.verify_canonical(params, p).max_residual for p in pts]
    print(f"dual-number: max residual {max(dual):.3e} over {len(pts)} points")
    for h in map(float, args.fd_steps.split(",")):
        fd = [nf.verify_canonical(params, p, "fd", h).max_residual for p in pts[:5]]
        print(f"finite-difference h={h:g}: max residual {max(fd):.3e}")
    print(f"x4 offset bound {nf.x4_offset_bound(params, pts):.4f}")
    print(f"min |d xi1 / d xi_r| {np.min(np.abs([nf.verify_generating_rank(params, p) for p in pts])):.4f}")


if __name__ == "__main__":
    main()
