"""Compare Gaussian-pipeline entropies with the truncated Fock-space oracle.

Prints every marginal entropy of the wiretap output from both routes and the
relative entropy to the separable candidate.

    python scripts/fock_crosscheck.py --eta 0.6 --kappa 0.3 --mu 0.2 --ne 0.2
"""

import argparse
import itertools
import time

from wiretapkey.bounds import er_candidate, gaussian_relative_entropy
from wiretapkey.channel import ChannelParams, build_joint_state, marginal
from wiretapkey.fock import entropy_fock, gaussian_to_fock, reduced_density, relative_entropy_fock, wiretap_fock
from wiretapkey.gaussian import von_neumann_entropy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", type=float, default=0.6)
    ap.add_argument("--kappa", type=float, default=0.3)
    ap.add_argument("--mu", type=float, default=0.2)
    ap.add_argument("--ne", type=float, default=0.0)
    ap.add_argument("--dim", type=int, default=None, help="default 25 (pure loss) or 12 (thermal)")
    ap.add_argument("--re-dim", type=int, default=11, help="cutoff for the relative-entropy check")
    args = ap.parse_args()

    params = ChannelParams(args.eta, args.kappa, args.ne, args.mu)
    dim = args.dim or (12 if params.thermal else 25)
    wired = wiretap_fock(params, dim)
    gauss = build_joint_state(params)
    labels = gauss.cov.labels
    print(f"dim={dim} leakage={wired.leakage:.2e}")
    print(f"{'subset':10s} {'gaussian':>14s} {'fock':>14s} {'diff':>10s}")
    for r in range(1, len(labels)):
        for s in itertools.combinations(labels, r):
            g = von_neumann_entropy(marginal(gauss, s))
            f = entropy_fock(wired.state, s)
            print(f"{''.join(s):10s} {g:14.10f} {f:14.10f} {abs(g - f):10.2e}")

    t0 = time.perf_counter()
    v_abf, cand = er_candidate(params)
    rho = reduced_density(wiretap_fock(params, args.re_dim).state, ("A", "B", "F"))
    sigma = gaussian_to_fock(cand.cov.entries, args.re_dim, ("A", "B", "F"))
    d_g = gaussian_relative_entropy(v_abf, cand.cov)
    d_f = relative_entropy_fock(rho, sigma)
    print(f"relative entropy: gaussian {d_g:.10f}  fock(dim {args.re_dim}) {d_f:.10f}  "
          f"diff {abs(d_g - d_f):.2e}  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
