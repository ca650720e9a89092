"""Check the design guarantee: PCS >= p on a just-legal slippage instance.

Usage: python scripts/pcs_guarantee.py [--k 4] [--n0 10] [--replications 10000]
"""

import argparse

import numpy as np

from ranksel.distributions import RandomStream
from ranksel.hconst import DD, RINOTT
from ranksel.procedures import ProcedureParams, estimate_pcs, make_slippage_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--n0", type=int, default=10)
    ap.add_argument("--ps", default="0.75,0.9")
    ap.add_argument("--gap", type=float, default=1.01, help="mean gap in delta units")
    ap.add_argument("--replications", type=int, default=10**4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"k={args.k} n0={args.n0} gap={args.gap}*delta "
          f"replications={args.replications}")
    print(f"{'p':>5} {'variant':>8} {'pcs':>7} {'s.e.':>7} {'mean total':>11} {'h':>9}")
    for p in (float(v) for v in args.ps.split(",")):
        for sub, variant in enumerate((DD, RINOTT)):
            params = ProcedureParams(p=p, delta=1.0, k=args.k, n0=args.n0, variant=variant)
            inst = make_slippage_instance(params, args.gap, np.ones(args.k + 1))
            est = estimate_pcs(params, inst, args.replications,
                               RandomStream(args.seed).substream(sub))
            flag = "" if est.pcs >= p - 3 * est.std_error else "  <-- BELOW TARGET"
            print(f"{p:>5} {variant:>8} {est.pcs:>7.4f} {est.std_error:>7.4f} "
                  f"{est.mean_total:>11.1f} {est.h_used.value:>9.5f}{flag}")


if __name__ == "__main__":
    main()
