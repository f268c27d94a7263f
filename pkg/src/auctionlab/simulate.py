"""Seeded Monte Carlo engine for second-price auctions.

Replicates are processed in fixed chunks of ``CHUNK`` rows. Chunk ``k`` of
seed ``s`` draws from its own Philox stream keyed by ``SeedSequence(s,
spawn_key=(k,))``, and every per-chunk reduction is combined in chunk order,
so results are bit-identical whatever the worker count.

Two estimators are available:

``mean``
    sample mean, standard error ``s / sqrt(R)``.
``mom``
    median of ``blocks`` contiguous block means. The standard error is
    ``sqrt(pi/2) * sigma_b / sqrt(blocks)`` with ``sigma_b`` the block-mean
    spread estimated robustly (scaled MAD). Approximate under heavy tails.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from auctionlab.distributions import ParetoI, ValuationDistribution
from auctionlab.errors import DomainError

log = logging.getLogger(__name__)

CHUNK = 1 << 16
DEFAULT_BLOCKS = 32
MIN_REPLICATIONS = 100
# shapes at or below these need median-of-means / refuse the sample mean
MOM_DEFAULT_SHAPE = 2.0
MEAN_REFUSED_SHAPE = 1.2
THREADS_ENV = "AUCTIONLAB_THREADS"

_MAD_TO_SIGMA = 1.482602218505602
_MEDIAN_EFFICIENCY = math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class AuctionOutcome:
    winner: Optional[int]
    price: float
    surplus: float
    sold: bool


def run_auction(
    values: Sequence[float],
    reserve: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> AuctionOutcome:
    """Run one truthful second-price auction.

    The highest value wins (ties broken uniformly at random with ``rng``) and
    pays the runner-up value, or the reserve if that is higher. No sale if the
    top value is below the reserve. A lone bidder without a reserve pays 0.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("run_auction needs at least one value")
    top = vals.max()
    if reserve is not None and top < reserve:
        return AuctionOutcome(None, 0.0, 0.0, False)
    tied = np.flatnonzero(vals == top)
    if tied.size > 1:
        rng = rng if rng is not None else np.random.default_rng()
        winner = int(rng.choice(tied))
    else:
        winner = int(tied[0])
    others = np.delete(vals, winner)
    price = float(others.max()) if others.size else 0.0
    if reserve is not None:
        price = max(price, float(reserve))
    return AuctionOutcome(winner, price, float(top) - price, True)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    replications: int
    seed: int
    estimator: str
    blocks: Optional[int] = None

    def interval(self, z: float = 4.0) -> tuple[float, float]:
        return self.mean - z * self.std_error, self.mean + z * self.std_error

    def covers(self, value: float, z: float = 4.0) -> bool:
        lo, hi = self.interval(z)
        return lo <= value <= hi

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AuctionEstimates:
    buyer_surplus: Optional[Estimate]
    seller_revenue: Estimate
    sold_rate: Estimate

    def to_dict(self) -> dict:
        return {
            "buyer_surplus": None if self.buyer_surplus is None else self.buyer_surplus.to_dict(),
            "seller_revenue": self.seller_revenue.to_dict(),
            "sold_rate": self.sold_rate.to_dict(),
        }


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return os.cpu_count() or 1


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chunk),))
    return np.random.Generator(np.random.Philox(ss))


def resolve_estimator(dist: ValuationDistribution, estimator: str) -> str:
    """Pick or vet the estimator for ``dist``.

    ``auto`` picks median-of-means for Pareto with ``v <= 2``; the sample mean
    is refused outright for ``v <= 1.2``.
    """
    heavy = isinstance(dist, ParetoI) and dist.v <= MOM_DEFAULT_SHAPE
    if estimator == "auto":
        return "mom" if heavy else "mean"
    if estimator not in ("mean", "mom"):
        raise ValueError(f"unknown estimator {estimator!r}; use 'mean', 'mom' or 'auto'")
    if estimator == "mean" and isinstance(dist, ParetoI):
        if dist.v <= MEAN_REFUSED_SHAPE:
            raise DomainError(
                f"sample-mean estimator refused for ParetoI(v={dist.v}): outcome variance is "
                "infinite; use the median-of-means estimator (--estimator mom)"
            )
        if heavy:
            log.warning("ParetoI(v=%s) outcomes may have infinite variance; prefer 'mom'", dist.v)
    return estimator


# Per-block running statistics: (count, mean, M2) arrays of length `blocks`.
_Stats = tuple[np.ndarray, np.ndarray, np.ndarray]


def _block_stats(x: np.ndarray, block_ids: np.ndarray, blocks: int) -> _Stats:
    count = np.bincount(block_ids, minlength=blocks).astype(float)
    sums = np.bincount(block_ids, weights=x, minlength=blocks)
    mean = np.divide(sums, count, out=np.zeros(blocks), where=count > 0)
    m2 = np.bincount(block_ids, weights=(x - mean[block_ids]) ** 2, minlength=blocks)
    return count, mean, m2


def _merge(a: _Stats, b: _Stats) -> _Stats:
    # pairwise update of count/mean/M2 (Chan et al.)
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    frac = np.divide(nb, n, out=np.zeros_like(n), where=n > 0)
    mean = ma + delta * frac
    m2 = sa + sb + delta**2 * na * frac
    return n, mean, m2


Kernel = Callable[[np.random.Generator, int], dict]


def run_replicates(
    kernel: Kernel,
    replications: int,
    seed: int,
    blocks: int = 1,
    threads: Optional[int] = None,
) -> dict[str, _Stats]:
    """Run ``kernel(rng, rows)`` over all chunks and reduce per block.

    ``kernel`` returns a dict of equally long per-replicate arrays. Replicate
    ``j`` belongs to block ``j * blocks // replications``.
    """
    if replications < max(2, blocks):
        raise DomainError(f"need at least max(2, blocks={blocks}) replications, got {replications}")
    n_chunks = -(-replications // CHUNK)
    threads = default_threads() if threads is None else max(1, int(threads))

    def work(k: int) -> dict[str, _Stats]:
        start = k * CHUNK
        rows = min(CHUNK, replications - start)
        out = kernel(chunk_rng(seed, k), rows)
        ids = (np.arange(start, start + rows, dtype=np.int64) * blocks) // replications
        return {name: _block_stats(np.asarray(arr, dtype=float), ids, blocks) for name, arr in out.items()}

    if threads == 1 or n_chunks == 1:
        parts = [work(k) for k in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(n_chunks)))

    total = parts[0]
    for part in parts[1:]:
        total = {name: _merge(total[name], part[name]) for name in total}
    return total


def _finish(stats: _Stats, replications: int, seed: int, estimator: str, blocks: int) -> Estimate:
    count, mean, m2 = stats
    if estimator == "mean":
        n = count.sum()
        grand = float(np.dot(count, mean) / n)
        ss = float(m2.sum() + np.dot(count, (mean - grand) ** 2))
        se = math.sqrt(ss / (n - 1) / n)
        return Estimate(grand, se, replications, seed, "sample-mean")
    centre = float(np.median(mean))
    mad = float(np.median(np.abs(mean - centre)))
    se = _MEDIAN_EFFICIENCY * _MAD_TO_SIGMA * mad / math.sqrt(blocks)
    return Estimate(centre, se, replications, seed, "median-of-means", blocks)


def _estimate(kernel, replications, seed, estimator, blocks, threads) -> dict[str, Estimate]:
    if replications < MIN_REPLICATIONS:
        raise DomainError(f"need at least {MIN_REPLICATIONS} replications, got {replications}")
    nb = blocks if estimator == "mom" else 1
    stats = run_replicates(kernel, replications, seed, nb, threads)
    return {name: _finish(s, replications, seed, estimator, nb) for name, s in stats.items()}


def _top_two(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Largest and second-largest per row (second is 0 for single-column input)."""
    if values.shape[1] == 1:
        return values[:, 0], np.zeros(values.shape[0])
    part = np.partition(values, values.shape[1] - 2, axis=1)
    return part[:, -1], part[:, -2]


def _outcomes(values: np.ndarray, reserve: Optional[float]) -> dict:
    top, second = _top_two(values)
    if reserve is None:
        return {"surplus": top - second, "revenue": second, "sold": np.ones_like(top)}
    sold = top >= reserve
    price = np.where(sold, np.maximum(second, reserve), 0.0)
    return {"surplus": np.where(sold, top - price, 0.0), "revenue": price, "sold": sold.astype(float)}


def estimate_auction(
    dist: ValuationDistribution,
    m: int,
    reserve: Optional[float] = None,
    replications: int = 10**6,
    seed: int = 0,
    estimator: str = "auto",
    blocks: int = DEFAULT_BLOCKS,
    threads: Optional[int] = None,
) -> AuctionEstimates:
    """Estimate buyer surplus, seller revenue and sale rate with ``m`` bidders.

    Ties among equal top values do not change surplus or revenue, so the
    vectorised path never needs to pick a winner. ``buyer_surplus`` is
    ``None`` for equal-revenue Pareto, whose mean surplus is infinite.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"bidder count must be an integer >= 1, got {m}")
    est = resolve_estimator(dist, estimator)
    m = int(m)

    def kernel(rng, rows):
        return _outcomes(dist._ppf(rng.random((rows, m))), reserve)

    res = _estimate(kernel, replications, seed, est, blocks, threads)
    infinite_surplus = isinstance(dist, ParetoI) and dist.v <= 1
    return AuctionEstimates(
        buyer_surplus=None if infinite_surplus else res["surplus"],
        seller_revenue=res["revenue"],
        sold_rate=res["sold"],
    )


def estimate_surplus_delta(
    dist: ValuationDistribution,
    n: int,
    replications: int = 10**6,
    seed: int = 0,
    estimator: str = "auto",
    blocks: int = DEFAULT_BLOCKS,
    threads: Optional[int] = None,
) -> Estimate:
    """Paired estimate of ``E(p_{n+1} - p_n)``.

    Each replicate draws ``n + 1`` values; ``p_{n+1}`` uses all of them and
    ``p_n`` the first ``n`` (bidder ``n + 1`` removed), so both arms share the
    same draws.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"surplus delta needs n >= 2, got {n}")
    if isinstance(dist, ParetoI) and dist.v <= 1:
        raise DomainError("ParetoI with v <= 1: infinite expected top order statistic")
    est = resolve_estimator(dist, estimator)
    n = int(n)

    def kernel(rng, rows):
        values = dist._ppf(rng.random((rows, n + 1)))
        top_all, second_all = _top_two(values)
        top_n, second_n = _top_two(values[:, :n])
        return {"delta": (top_all - second_all) - (top_n - second_n)}

    return _estimate(kernel, replications, seed, est, blocks, threads)["delta"]


def estimate_order_stat(
    dist: ValuationDistribution,
    m: int,
    i: int,
    replications: int = 10**6,
    seed: int = 0,
    estimator: str = "auto",
    blocks: int = DEFAULT_BLOCKS,
    threads: Optional[int] = None,
) -> Estimate:
    """Estimate ``E X_(i)`` for ``m`` draws (rank 1 is the smallest)."""
    if int(m) != m or m < 1 or int(i) != i or not 1 <= i <= m:
        raise DomainError(f"need 1 <= i <= m, got i={i}, m={m}")
    est = resolve_estimator(dist, estimator)
    m, i = int(m), int(i)

    def kernel(rng, rows):
        values = dist._ppf(rng.random((rows, m)))
        return {"x": np.partition(values, i - 1, axis=1)[:, i - 1]}

    return _estimate(kernel, replications, seed, est, blocks, threads)["x"]
