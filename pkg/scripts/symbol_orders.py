"""Recovered (m, m~) for monomial test symbols and the x1 symbol."""

import argparse
import itertools

from kerrtrap import symbol_scaling as ss


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", default="0.25,0.5,0.75")
    args = ap.parse_args()
    print("symbol,alpha,m_true,m_tilde_true,m_est,m_tilde_est,fit_residual")
    for alpha in map(float, args.alphas.split(",")):
        for m0, k in itertools.product((-1, 0, 1, 2), (0, 1, 2)):
            est = ss.estimate_orders(ss.monomial(m0, k, alpha), alpha)
            print(f"monomial:{m0},{k},{alpha},{m0},{m0 + alpha * k},{est.m_est:.4f},{est.m_tilde_est:.4f},{est.fit_residual:.1e}")
        est = ss.estimate_orders(ss.builtin_symbol("x1", alpha), alpha)
        print(f"x1,{alpha},0,{-alpha},{est.m_est:.4f},{est.m_tilde_est:.4f},{est.fit_residual:.1e}")
        bad = ss.verify_symbol_bound(ss.builtin_symbol("x1", alpha), 0.0, -2 * alpha, alpha)
        print(f"# x1 with false claim (0, {-2 * alpha}): holds={bad.holds}, growth exponent {bad.growth_exponent:.3f}")


if __name__ == "__main__":
    main()
