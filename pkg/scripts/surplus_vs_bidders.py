"""Closed-form buyer surplus and seller revenue against bidder count, with MC spot checks.

    python scripts/surplus_vs_bidders.py --m-max 12 --reps 200000
"""

import argparse

from auctionlab.analytics import expected_buyer_surplus, expected_seller_revenue, surplus_delta_closed
from auctionlab.distributions import Exponential, ParetoI, Uniform
from auctionlab.simulate import estimate_auction

FAMILIES = {
    "uniform(0,1)": Uniform(0, 1),
    "exponential(1)": Exponential(1),
    "pareto(1,3)": ParetoI(1, 3),
    "pareto(1,1.5)": ParetoI(1, 1.5),
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--reps", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print("family,m,surplus,revenue,delta_to_next,mc_surplus,mc_surplus_se")
    for name, dist in FAMILIES.items():
        for m in range(2, args.m_max + 1):
            est = estimate_auction(dist, m, replications=args.reps, seed=args.seed + m).buyer_surplus
            print(
                f"{name},{m},{expected_buyer_surplus(dist, m):.6g},{expected_seller_revenue(dist, m):.6g},"
                f"{surplus_delta_closed(dist, m):.6g},{est.mean:.6g},{est.std_error:.2g}"
            )


if __name__ == "__main__":
    main()
