"""Optimal signal intensity and SKR for DS-BB84 against unrestricted and restricted Eves.

    python scripts/bb84_optimum.py --kappa 0.01 0.1 1
"""

import argparse

from wiretapkey.bb84 import Bb84Params, optimize_mu


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", type=float, default=0.005)
    ap.add_argument("--kappa", type=float, nargs="+", default=[0.01, 0.1, 1.0])
    ap.add_argument("--nd", type=float, default=1e-4)
    ap.add_argument("--fl", type=float, default=1.1)
    ap.add_argument("--rate", type=float, default=1e9)
    args = ap.parse_args()

    print(f"{'kappa':>6s} {'model':>12s} {'mu*':>10s} {'SKR* [b/s]':>14s}")
    for kappa in args.kappa:
        p = Bb84Params.from_channel(args.eta, kappa, rate_R=args.rate, n_d=args.nd, f_L=args.fl)
        for model in ("unrestricted", "restricted"):
            res = optimize_mu(p, model)
            flag = "  (flat)" if res.flat else ""
            print(f"{kappa:6g} {model:>12s} {res.mu_star:10.4g} {res.skr_star:14.6g}{flag}")


if __name__ == "__main__":
    main()
