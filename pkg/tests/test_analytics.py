import math

import pytest
from hypothesis import given, strategies as st

from auctionlab import analytics as A
from auctionlab.analytics import SurplusRevenueTable
from auctionlab.distributions import Exponential, ParetoI, Uniform
from auctionlab.errors import DomainError
from auctionlab.orderstats import order_stat_mean

from oracles import order_stat_mean_quad

FAMILIES = [Exponential(1), Exponential(2.5), ParetoI(1, 2), ParetoI(3, 1.3), ParetoI(1, 6), Uniform(0, 1), Uniform(2, 7)]


def test_buyer_surplus_examples():
    assert A.expected_buyer_surplus(Exponential(2), 5) == 0.5
    assert A.expected_buyer_surplus(ParetoI(1, 2), 3) == pytest.approx(1.6, rel=1e-13)
    assert A.expected_buyer_surplus(Uniform(0, 1), 3) == pytest.approx(0.25, rel=1e-15)


def test_seller_revenue_examples():
    assert A.expected_seller_revenue(Exponential(1), 3) == pytest.approx(5 / 6, rel=1e-15)
    assert A.expected_seller_revenue(ParetoI(1, 2), 2) == pytest.approx(4 / 3, rel=1e-13)
    assert A.expected_seller_revenue(Uniform(0, 1), 2) == pytest.approx(1 / 3, rel=1e-15)


@pytest.mark.parametrize("dist", FAMILIES)
@pytest.mark.parametrize("m", [2, 3, 6])
def test_surplus_and_revenue_vs_order_stat_integrals(dist, m):
    top = order_stat_mean_quad(dist, m, m)
    second = order_stat_mean_quad(dist, m, m - 1)
    assert A.expected_buyer_surplus(dist, m) == pytest.approx(top - second, rel=1e-8)
    assert A.expected_seller_revenue(dist, m) == pytest.approx(second, rel=1e-9)


def test_surplus_rejects_infinite_mean_and_small_m():
    with pytest.raises(DomainError, match="infinite"):
        A.expected_buyer_surplus(ParetoI(1, 1), 3)
    with pytest.raises(DomainError):
        A.expected_buyer_surplus(Exponential(1), 1)


def test_surplus_delta_examples():
    assert A.surplus_delta_closed(Exponential(3.7), 7) == 0.0
    assert A.surplus_delta_closed(ParetoI(1, 2), 2) == pytest.approx(3.2 / 12, rel=1e-13)
    assert A.surplus_delta_closed(Uniform(0, 1), 2) == pytest.approx(-1 / 12, rel=1e-13)


@pytest.mark.parametrize("dist", FAMILIES)
def test_delta_identity_matches_surplus_differences(dist):
    for n in range(2, 51):
        lhs = A.surplus_delta_closed(dist, n)
        rhs = A.expected_buyer_surplus(dist, n + 1) - A.expected_buyer_surplus(dist, n)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-13)


@given(st.integers(2, 200), st.floats(0.1, 10), st.floats(1.01, 30))
def test_pareto_delta_positive(n, a, v):
    d = ParetoI(a, v)
    delta = A.surplus_delta_closed(d, n)
    assert delta > 0
    # independent route: three order-statistic means over n+1 draws
    top, second, third = (order_stat_mean(d, n + 1, i) for i in (n + 1, n, n - 1))
    assert delta == pytest.approx(((top - second) - 2 * (second - third)) / (n + 1), rel=1e-9)


@given(st.integers(2, 500), st.floats(0.05, 20))
def test_exponential_constant_surplus(m, lam):
    d = Exponential(lam)
    assert A.expected_buyer_surplus(d, m) == 1 / lam
    assert A.surplus_delta_closed(d, m) == 0.0


@given(st.integers(2, 60), st.floats(0.1, 20), st.floats(1.05, 10), st.floats(0.1, 10))
def test_scale_equivariance(m, a, v, c):
    p, q = ParetoI(a, v), ParetoI(c * a, v)
    for fn in (A.expected_buyer_surplus, A.expected_seller_revenue, A.marginal_revenue):
        assert fn(q, m) == pytest.approx(c * fn(p, m), rel=1e-11)
    e, f = Exponential(1 / a), Exponential(1 / (c * a))
    for fn in (A.expected_buyer_surplus, A.expected_seller_revenue, A.marginal_revenue):
        assert fn(f, m) == pytest.approx(c * fn(e, m), rel=1e-11)


def test_ratio_examples():
    assert A.revenue_surplus_ratio(ParetoI(7, 2), 10) == pytest.approx(1.0, rel=1e-12)
    assert A.revenue_surplus_ratio(Exponential(1), 3) == pytest.approx(5 / 6, rel=1e-14)
    assert A.revenue_surplus_ratio(ParetoI(1, 1.25), 5) == pytest.approx(0.25, rel=1e-12)


def test_per_bidder_surplus_examples():
    assert A.per_bidder_surplus(Exponential(1), 4) == 0.25
    assert A.per_bidder_surplus(Exponential(1), 5) == 0.2
    assert A.per_bidder_surplus(ParetoI(1, 2), 2) == pytest.approx(2 / 3, rel=1e-13)


@pytest.mark.parametrize("dist", FAMILIES)
def test_per_bidder_strictly_decreasing(dist):
    vals = [A.per_bidder_surplus(dist, m) for m in range(2, 60)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_marginal_revenue_examples():
    assert A.marginal_revenue(Uniform(0, 1), 2) == pytest.approx(2 / 12, rel=1e-15)
    assert A.marginal_revenue(Exponential(1), 4) == pytest.approx(0.2, rel=1e-15)
    assert A.marginal_revenue(ParetoI(1, 2), 2) == pytest.approx(1.6 - 4 / 3, rel=1e-12)
    assert A.pareto_marginal_revenue_approx(2, 1, 2) == pytest.approx(0.2817, abs=1e-4)


@pytest.mark.parametrize("dist", FAMILIES)
def test_marginal_revenue_is_revenue_difference_and_positive(dist):
    for n in range(2, 40):
        mr = A.marginal_revenue(dist, n)
        assert mr > 0
        diff = A.expected_seller_revenue(dist, n + 1) - A.expected_seller_revenue(dist, n)
        assert mr == pytest.approx(diff, rel=1e-9)


def test_rate_classes():
    _, cls = A.marginal_revenue_rate(Uniform(0, 1), 5)
    assert cls.label == "1/n²" and cls.exponent == 2
    _, cls = A.marginal_revenue_rate(Exponential(2), 5)
    assert cls.label == "1/n"
    _, cls = A.marginal_revenue_rate(ParetoI(1, 2), 5)
    assert cls.label == "1/√n"
    exps = [A.marginal_revenue_rate(ParetoI(1, 1 + eps), 5)[1].exponent for eps in (1, 0.1, 0.01, 1e-6)]
    assert all(b < a for a, b in zip(exps, exps[1:])) and exps[-1] < 1e-5
    assert A.marginal_revenue_rate(ParetoI(1, 1 + 1e-12), 5)[1].label == "constant"


@pytest.mark.parametrize("dist", [Uniform(0, 1), Exponential(1), ParetoI(1, 2), ParetoI(1, 4)])
def test_leading_order_rate_approaches_exact(dist):
    ratios = [A.marginal_revenue_rate(dist, n)[0] / A.marginal_revenue(dist, n) for n in (10, 100, 1000, 10000)]
    gaps = [abs(r - 1) for r in ratios]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_build_table():
    t = A.build_table(Exponential(1), 2, 5)
    assert t.column("buyer_surplus") == [1.0] * 4
    assert len(A.build_table(Uniform(0, 1), 2, 2).rows) == 1
    p = A.build_table(ParetoI(1, 2), 2, 10)
    for row in p.rows:
        assert row.seller_revenue / row.buyer_surplus == pytest.approx(1.0, rel=1e-12)
    revs = p.column("seller_revenue")
    assert all(b > a for a, b in zip(revs, revs[1:]))
    with pytest.raises(DomainError):
        A.build_table(ParetoI(1, 1), 2, 5)
    with pytest.raises(DomainError):
        A.build_table(Exponential(1), 5, 4)


def test_table_csv_format_and_round_trip():
    t = A.build_table(Uniform(0, 1), 2, 4)
    text = t.to_csv()
    lines = text.split("\n")
    assert lines[0] == "m,buyer_surplus,seller_revenue,per_bidder_surplus,marginal_revenue"
    assert lines[1] == "2,0.333333333333,0.333333333333,0.166666666667,0.166666666667"
    assert "\r" not in text and text.endswith("\n")
    back = SurplusRevenueTable.from_csv("# comment\n" + text)
    assert [r.m for r in back.rows] == [2, 3, 4]
    for a, b in zip(t.rows, back.rows):
        assert b.buyer_surplus == pytest.approx(a.buyer_surplus, rel=1e-11)


def test_fmt12():
    assert A.fmt12(math.pi) == "3.14159265359"
    assert A.fmt12(1.0) == "1"
