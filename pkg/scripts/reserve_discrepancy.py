"""Exponential bidders at the optimal reserve: revenue gained versus surplus lost.

The seller's gain from reserve 1/lambda is much smaller than the buyers' loss;
the difference is the value of items that go unsold. Also prints where the
Pareto revenue-derivative ratio (n+1 over n bidders) crosses 1.

    python scripts/reserve_discrepancy.py --reps 1000000
"""

import argparse
import math

from auctionlab.analytics import expected_seller_revenue
from auctionlab.distributions import Exponential, ParetoI
from auctionlab.reserve import (
    derivative_ratio,
    reserve_revenue_gain,
    revenue_with_reserve,
    surplus_loss_exponential,
    threshold_report,
)
from auctionlab.simulate import estimate_auction


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    d = Exponential(1)
    print("n,revenue_gain,surplus_loss,(1-1/e)^n,mc_revenue_gain")
    for n in range(1, 9):
        # same seed for both arms, so the difference is paired on identical draws
        mc = estimate_auction(d, n, reserve=1.0, replications=args.reps, seed=args.seed).seller_revenue
        base = estimate_auction(d, n, replications=args.reps, seed=args.seed).seller_revenue
        print(
            f"{n},{reserve_revenue_gain(d, n):.6f},{surplus_loss_exponential(1, n):.6f},"
            f"{(1 - math.exp(-1)) ** n:.6f},{mc.mean - base.mean:.6f}"
        )
    assert abs(revenue_with_reserve(d, 2, 1.0) - expected_seller_revenue(d, 2) - reserve_revenue_gain(d, 2)) < 1e-12

    print()
    print("v,n,threshold_r,ratio_below,ratio_at,ratio_above")
    for v in (1.5, 2.0, 3.0):
        dist = ParetoI(1, v)
        for n in (1, 2, 5, 10):
            r = threshold_report(dist, n).reserve
            print(
                f"{v},{n},{r:.6f},{derivative_ratio(dist, n, 0.9 * r):.6f},"
                f"{derivative_ratio(dist, n, r):.12f},{derivative_ratio(dist, n, 1.1 * r):.6f}"
            )
    print()
    print(threshold_report(ParetoI(1, 2), 3).note)


if __name__ == "__main__":
    main()
