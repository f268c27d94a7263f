import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from auctionlab import analytics as A
from auctionlab.distributions import Exponential, ParetoI, Uniform
from auctionlab.errors import DomainError
from auctionlab.simulate import (
    CHUNK,
    chunk_rng,
    default_threads,
    estimate_auction,
    estimate_order_stat,
    estimate_surplus_delta,
    resolve_estimator,
    run_auction,
    run_replicates,
)


def test_run_auction_examples():
    out = run_auction([3, 5, 2])
    assert (out.winner, out.price, out.surplus, out.sold) == (1, 3.0, 2.0, True)
    out = run_auction([3, 5, 2], reserve=4)
    assert (out.winner, out.price, out.surplus, out.sold) == (1, 4.0, 1.0, True)
    out = run_auction([3, 5, 2], reserve=6)
    assert (out.winner, out.price, out.surplus, out.sold) == (None, 0.0, 0.0, False)


def test_run_auction_single_bidder():
    out = run_auction([4.5])
    assert out.price == 0.0 and out.surplus == 4.5 and out.winner == 0
    out = run_auction([4.5], reserve=2)
    assert out.price == 2.0 and out.surplus == 2.5


def test_run_auction_rejects_empty():
    with pytest.raises(ValueError):
        run_auction([])


def test_run_auction_tie_break_uniform():
    rng = np.random.default_rng(9)
    wins = [run_auction([1, 7, 7, 7], rng=rng).winner for _ in range(6000)]
    counts = np.bincount(wins, minlength=4)
    assert counts[0] == 0
    assert np.all(np.abs(counts[1:] - 2000) < 200)
    out = run_auction([7, 7], rng=rng)
    assert out.price == 7.0 and out.surplus == 0.0


def test_run_auction_tie_break_reproducible():
    a = [run_auction([2, 2, 2], rng=np.random.default_rng(4)).winner for _ in range(5)]
    b = [run_auction([2, 2, 2], rng=np.random.default_rng(4)).winner for _ in range(5)]
    assert a == b


values = st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=12)
reserves = st.one_of(st.none(), st.floats(0, 1e6))


@given(values, reserves, st.floats(0, 1e3))
def test_truthful_mechanics(vals, reserve, bump):
    out = run_auction(vals, reserve, rng=np.random.default_rng(0))
    assert out.surplus >= 0
    if not out.sold:
        assert out.winner is None and out.price == 0 and out.surplus == 0
        return
    assert out.price <= vals[out.winner]
    assert out.surplus == pytest.approx(vals[out.winner] - out.price)
    raised = list(vals)
    raised[out.winner] += bump + 1.0
    again = run_auction(raised, reserve, rng=np.random.default_rng(0))
    assert again.winner == out.winner and again.price == out.price


def test_chunk_streams_independent_of_order():
    a = chunk_rng(42, 3).random(5)
    chunk_rng(42, 0).random(100)
    assert np.array_equal(chunk_rng(42, 3).random(5), a)
    assert not np.array_equal(chunk_rng(42, 2).random(5), a)
    assert not np.array_equal(chunk_rng(43, 3).random(5), a)


@pytest.mark.parametrize("estimator", ["mean", "mom"])
def test_thread_count_does_not_change_results(estimator):
    reps = 3 * CHUNK + 1234
    kw = dict(replications=reps, seed=2024, estimator=estimator)
    one = estimate_auction(Exponential(1), 5, threads=1, **kw)
    four = estimate_auction(Exponential(1), 5, threads=4, **kw)
    assert one == four
    d1 = estimate_surplus_delta(ParetoI(1, 3), 3, threads=1, **kw)
    d4 = estimate_surplus_delta(ParetoI(1, 3), 3, threads=4, **kw)
    assert d1 == d4


def test_same_seed_same_estimate_and_seed_matters():
    a = estimate_auction(Uniform(0, 1), 3, replications=5000, seed=1)
    b = estimate_auction(Uniform(0, 1), 3, replications=5000, seed=1)
    c = estimate_auction(Uniform(0, 1), 3, replications=5000, seed=2)
    assert a == b
    assert a.seller_revenue.mean != c.seller_revenue.mean


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv("AUCTIONLAB_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("AUCTIONLAB_THREADS", "zero")
    assert default_threads() >= 1


def test_run_replicates_block_assignment():
    def kernel(rng, rows):
        return {"one": np.ones(rows)}

    stats = run_replicates(kernel, 1000, seed=0, blocks=8, threads=1)
    count, mean, m2 = stats["one"]
    assert count.sum() == 1000 and np.all(count == 125)
    assert np.all(mean == 1.0) and np.all(m2 == 0.0)


def test_estimator_selection(caplog):
    assert resolve_estimator(ParetoI(1, 2), "auto") == "mom"
    assert resolve_estimator(ParetoI(1, 2.5), "auto") == "mean"
    assert resolve_estimator(Exponential(1), "auto") == "mean"
    with pytest.raises(DomainError, match="median-of-means"):
        resolve_estimator(ParetoI(1, 1.1), "mean")
    with pytest.raises(DomainError):
        resolve_estimator(ParetoI(1, 1.2), "mean")
    with caplog.at_level(logging.WARNING):
        assert resolve_estimator(ParetoI(1, 1.5), "mean") == "mean"
    assert "mom" in caplog.text
    with pytest.raises(ValueError):
        resolve_estimator(Exponential(1), "trimmed")


def test_replication_floor():
    with pytest.raises(DomainError):
        estimate_auction(Exponential(1), 3, replications=99)


def test_estimate_fields():
    est = estimate_auction(ParetoI(1, 2), 3, replications=1000, seed=8).seller_revenue
    assert est.estimator == "median-of-means" and est.blocks == 32
    assert est.replications == 1000 and est.seed == 8 and est.std_error >= 0
    d = est.to_dict()
    assert set(d) == {"mean", "std_error", "replications", "seed", "estimator", "blocks"}
    plain = estimate_auction(Exponential(1), 3, replications=1000).seller_revenue
    assert plain.estimator == "sample-mean" and plain.blocks is None


def test_estimate_auction_examples():
    est = estimate_auction(Exponential(1), 4, replications=10**6, seed=1)
    assert est.buyer_surplus.covers(1.0)
    assert abs(est.buyer_surplus.mean - 1.0) < 0.004
    est = estimate_auction(Uniform(0, 1), 3, replications=10**6, seed=2)
    assert est.seller_revenue.covers(0.5)
    assert abs(est.seller_revenue.mean - 0.5) < 0.002
    assert est.sold_rate.mean == 1.0


def test_equal_revenue_with_reserve_mom():
    est = estimate_auction(ParetoI(1, 1), 3, reserve=5, replications=10**6, seed=3, estimator="mom")
    assert est.buyer_surplus is None
    assert est.seller_revenue.estimator == "median-of-means"
    assert abs(est.seller_revenue.mean - 3.0) < 0.1


@pytest.mark.parametrize(
    "dist,n,seed", [(Exponential(1), 5, 10), (Uniform(0, 1), 2, 11), (ParetoI(1, 4), 3, 12), (Exponential(0.3), 2, 13)]
)
def test_paired_delta_matches_closed_form(dist, n, seed):
    est = estimate_surplus_delta(dist, n, replications=10**6, seed=seed)
    assert est.covers(A.surplus_delta_closed(dist, n))


def test_paired_delta_pareto_heavy():
    est = estimate_surplus_delta(ParetoI(1, 2), 2, replications=2 * 10**6, seed=14)
    assert est.estimator == "median-of-means"
    assert est.covers(0.8 / 3)


def test_paired_beats_independent_variance():
    reps = 200000
    paired = estimate_surplus_delta(Uniform(0, 1), 3, replications=reps, seed=5)
    a = estimate_auction(Uniform(0, 1), 4, replications=reps, seed=6).buyer_surplus
    b = estimate_auction(Uniform(0, 1), 3, replications=reps, seed=7).buyer_surplus
    assert paired.std_error < np.hypot(a.std_error, b.std_error)


def test_delta_rejects_bad_inputs():
    with pytest.raises(DomainError):
        estimate_surplus_delta(Exponential(1), 1)
    with pytest.raises(DomainError, match="infinite"):
        estimate_surplus_delta(ParetoI(1, 1), 3)


def test_order_stat_examples():
    assert estimate_order_stat(Exponential(1), 3, 3, replications=10**6, seed=1).covers(11 / 6)
    assert estimate_order_stat(Uniform(0, 1), 9, 5, replications=10**6, seed=2).covers(0.5)
    with pytest.raises(DomainError):
        estimate_order_stat(Exponential(1), 3, 4)


FAMILIES = [Exponential(1), Uniform(0, 1), ParetoI(1, 3), ParetoI(1, 1.8)]


@pytest.mark.parametrize("dist", FAMILIES)
def test_per_bidder_and_revenue_monotone(dist):
    reps = 4 * 10**5
    ests = {m: estimate_auction(dist, m, replications=reps, seed=100 + m) for m in range(2, 11)}
    for m in range(2, 10):
        lo, hi = ests[m], ests[m + 1]
        per_lo = lo.buyer_surplus.mean / m
        per_hi = hi.buyer_surplus.mean / (m + 1)
        slack = 4 * np.hypot(lo.buyer_surplus.std_error / m, hi.buyer_surplus.std_error / (m + 1))
        assert per_hi < per_lo + slack
        rslack = 4 * np.hypot(lo.seller_revenue.std_error, hi.seller_revenue.std_error)
        assert hi.seller_revenue.mean > lo.seller_revenue.mean - rslack


@pytest.mark.parametrize("dist", FAMILIES)
@pytest.mark.parametrize("m", [2, 5])
def test_auction_oracle_agreement(dist, m):
    reps = 10**7 if isinstance(dist, ParetoI) and dist.v < 1.5 else 10**6
    est = estimate_auction(dist, m, replications=reps, seed=31 * m)
    assert est.buyer_surplus.covers(A.expected_buyer_surplus(dist, m))
    assert est.seller_revenue.covers(A.expected_seller_revenue(dist, m))
