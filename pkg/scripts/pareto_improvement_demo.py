"""Round-robin exclusion versus letting every bidder into every auction.

    python scripts/pareto_improvement_demo.py --m 4
"""

import argparse

from auctionlab.distributions import Exponential, ParetoI, Uniform
from auctionlab.participation import is_pareto_improvement, random_exclusion, round_robin_exclusion


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=4)
    args = p.parse_args()

    cases = [("exponential(1)", Exponential(1)), ("pareto(1,2)", ParetoI(1, 2)), ("uniform(0,1)", Uniform(0, 1))]
    print("scenario,family,verdict,bidder_delta,seller_delta,strict,worse")
    for name, dist in cases:
        for mode in ("single-seller", "per-auction-seller"):
            res = is_pareto_improvement(*round_robin_exclusion(args.m, dist, mode))
            print(
                f"round-robin/{mode},{name},{res.verdict},{res.bidder_deltas[0]:.6g},"
                f"{res.seller_deltas.sum():.6g},{' '.join(res.strict_parties[:3])},{len(res.worse_parties)}"
            )
        res = random_exclusion(args.m, dist)
        print(
            f"random-exclusion,{name},{res.verdict},{res.bidder_deltas[0]:.6g},"
            f"{res.seller_deltas.sum():.6g},{' '.join(res.strict_parties[:3])},{len(res.worse_parties)}"
        )


if __name__ == "__main__":
    main()
