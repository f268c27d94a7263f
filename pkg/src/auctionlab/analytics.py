"""Closed-form buyer surplus and seller revenue for truthful second-price auctions.

Bidder-count convention: every public function takes ``m``, the number of
bidders in the auction. The add-a-bidder delta takes ``n`` and compares an
auction with ``n + 1`` bidders against one with ``n``; internally that is a
sample of ``m = n + 1`` draws.

Buyer surplus with ``m`` bidders is ``X_(m) - X_(m-1)`` and seller revenue is
``X_(m-1)``. Exact expressions are used everywhere; the power-law
approximations for Pareto are exposed separately.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from scipy.special import gamma as gamma_fn

from auctionlab.distributions import Exponential, ParetoI, Uniform, ValuationDistribution
from auctionlab.errors import DomainError
from auctionlab.orderstats import harmonic, order_stat_mean, pareto_g

TABLE_COLUMNS = ("m", "buyer_surplus", "seller_revenue", "per_bidder_surplus", "marginal_revenue")


def _check_m(m: int, least: int = 2) -> int:
    if int(m) != m or m < least:
        raise DomainError(f"bidder count must be an integer >= {least}, got {m}")
    return int(m)


def _check_finite_top(dist: ValuationDistribution) -> None:
    if isinstance(dist, ParetoI) and dist.v <= 1:
        raise DomainError(
            f"ParetoI(v={dist.v}): infinite expected top order statistic "
            "(expected buyer surplus is unbounded)"
        )


def expected_buyer_surplus(dist: ValuationDistribution, m: int) -> float:
    """Mean winner surplus ``E[X_(m) - X_(m-1)]`` with ``m >= 2`` bidders."""
    m = _check_m(m)
    _check_finite_top(dist)
    if isinstance(dist, Exponential):
        return 1.0 / dist.lam
    if isinstance(dist, ParetoI):
        return pareto_g(m - 1, dist.a, dist.v) / dist.v
    if isinstance(dist, Uniform):
        return dist.width / (m + 1.0)
    raise TypeError(f"unsupported distribution {dist!r}")


def expected_seller_revenue(dist: ValuationDistribution, m: int) -> float:
    """Mean price ``E X_(m-1)`` with ``m >= 2`` bidders."""
    m = _check_m(m)
    _check_finite_top(dist)
    if isinstance(dist, Exponential):
        return (harmonic(m) - 1.0) / dist.lam
    if isinstance(dist, ParetoI):
        return pareto_g(m - 1, dist.a, dist.v) * (1.0 - 1.0 / dist.v)
    if isinstance(dist, Uniform):
        return dist.lo + dist.width * (m - 1.0) / (m + 1.0)
    raise TypeError(f"unsupported distribution {dist!r}")


def surplus_delta_closed(dist: ValuationDistribution, n: int) -> float:
    """Change in expected buyer surplus when bidder ``n+1`` joins ``n`` bidders.

    Equals ``(1/(n+1)) * [E(X_(n+1) - X_(n)) - 2 E(X_(n) - X_(n-1))]`` over
    ``n+1`` draws. Zero for exponential, ``g(n,a,v) / (v^2 (n+1))`` for Pareto;
    other families evaluate the order-statistic form directly.
    """
    n = _check_m(n)
    _check_finite_top(dist)
    if isinstance(dist, Exponential):
        return 0.0
    if isinstance(dist, ParetoI):
        return pareto_g(n, dist.a, dist.v) / (dist.v**2 * (n + 1))
    top = order_stat_mean(dist, n + 1, n + 1)
    second = order_stat_mean(dist, n + 1, n)
    third = order_stat_mean(dist, n + 1, n - 1)
    return ((top - second) - 2.0 * (second - third)) / (n + 1)


def revenue_surplus_ratio(dist: ValuationDistribution, m: int) -> float:
    """Seller revenue over buyer surplus with ``m`` bidders.

    Exponential gives ``H_m - 1`` (about ``ln m + gamma - 1``); Pareto gives
    ``v - 1`` regardless of ``m``.
    """
    return expected_seller_revenue(dist, m) / expected_buyer_surplus(dist, m)


def per_bidder_surplus(dist: ValuationDistribution, m: int) -> float:
    return expected_buyer_surplus(dist, m) / m


def marginal_revenue(dist: ValuationDistribution, n: int) -> float:
    """Exact ``s_{n+1} - s_n``: revenue gained by adding a bidder to ``n``."""
    n = _check_m(n)
    if isinstance(dist, Exponential):
        return 1.0 / (dist.lam * (n + 1))
    if isinstance(dist, Uniform):
        return dist.width * 2.0 / (n * n + 3 * n + 2)
    return expected_seller_revenue(dist, n + 1) - expected_seller_revenue(dist, n)


def pareto_marginal_revenue_approx(n: int, a: float, v: float) -> float:
    """``a (1-1/v) Gamma(1-1/v) [(n+1)^(1/v) - n^(1/v)]``, the power-law estimate of
    Pareto marginal revenue."""
    if v <= 1:
        raise DomainError(f"needs v > 1, got {v}")
    return float(a * (1 - 1 / v) * gamma_fn(1 - 1 / v) * ((n + 1) ** (1 / v) - n ** (1 / v)))


@dataclass(frozen=True)
class RateClass:
    """Asymptotic class ``O(n^-exponent)`` of marginal revenue."""

    exponent: float
    label: str


def _rate_label(exponent: float) -> str:
    if exponent < 1e-9:
        return "constant"
    for value, label in ((2.0, "1/n²"), (1.0, "1/n"), (0.5, "1/√n")):
        if math.isclose(exponent, value, rel_tol=1e-12):
            return label
    return f"1/n^{exponent:.6g}"


def marginal_revenue_rate(dist: ValuationDistribution, n: int) -> tuple[float, RateClass]:
    """Leading-order marginal revenue at ``n`` and its rate class.

    Uniform ``2 w / n^2``; exponential ``1 / (lam n)``; Pareto
    ``a (1-1/v) Gamma(1-1/v) / v * n^-(1-1/v)`` (the derivative of the
    power-law revenue estimate).
    """
    n = _check_m(n)
    if isinstance(dist, Uniform):
        exponent = 2.0
        approx = 2.0 * dist.width / n**2
    elif isinstance(dist, Exponential):
        exponent = 1.0
        approx = 1.0 / (dist.lam * n)
    elif isinstance(dist, ParetoI):
        _check_finite_top(dist)
        v = dist.v
        exponent = 1.0 - 1.0 / v
        approx = float(dist.a * exponent * gamma_fn(1 - 1 / v) / v * n ** (-exponent))
    else:
        raise TypeError(f"unsupported distribution {dist!r}")
    return approx, RateClass(exponent, _rate_label(exponent))


@dataclass(frozen=True)
class TableRow:
    m: int
    buyer_surplus: float
    seller_revenue: float
    per_bidder_surplus: float
    marginal_revenue: float


@dataclass(frozen=True)
class SurplusRevenueTable:
    dist: ValuationDistribution | None
    rows: tuple[TableRow, ...] = field(default_factory=tuple)

    def row(self, m: int) -> TableRow:
        for r in self.rows:
            if r.m == m:
                return r
        raise KeyError(m)

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for r in self.rows:
            writer.writerow([r.m] + [fmt12(getattr(r, c)) for c in TABLE_COLUMNS[1:]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, dist: ValuationDistribution | None = None) -> SurplusRevenueTable:
        """Parse the CSV written by :meth:`to_csv`; ``#`` comment lines are skipped."""
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        reader = csv.DictReader(lines)
        missing = set(TABLE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"table CSV is missing columns {sorted(missing)}")
        rows = tuple(
            TableRow(int(rec["m"]), *(float(rec[c]) for c in TABLE_COLUMNS[1:])) for rec in reader
        )
        return cls(dist, rows)


def fmt12(x: float) -> str:
    """12 significant digits, the CSV number format."""
    return f"{x:.12g}"


def build_table(dist: ValuationDistribution, m_min: int, m_max: int) -> SurplusRevenueTable:
    m_min = _check_m(m_min)
    if m_max < m_min:
        raise DomainError(f"empty bidder range {m_min}..{m_max}")
    _check_finite_top(dist)
    rows = []
    for m in range(m_min, int(m_max) + 1):
        surplus = expected_buyer_surplus(dist, m)
        rows.append(
            TableRow(
                m=m,
                buyer_surplus=surplus,
                seller_revenue=expected_seller_revenue(dist, m),
                per_bidder_surplus=surplus / m,
                marginal_revenue=marginal_revenue(dist, m),
            )
        )
    return SurplusRevenueTable(dist, tuple(rows))
