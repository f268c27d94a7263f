"""Reserve prices in second-price auctions.

Revenue with ``n`` bidders and reserve ``r``::

    revenue(r) = n r F(r)^(n-1) [1 - F(r)]
               + n (n-1) * integral_r^inf x F(x)^(n-2) f(x) [1 - F(x)] dx

Buyer surplus with reserve ``r``::

    n F(r)^(n-1) E[(X - r)+]
    + n (n-1) * integral_r^inf F(s)^(n-2) f(s) E[(X - s)+] ds

and ``revenue'(r) = n F(r)^(n-1) [1 - F(r) - r f(r)]``. A bid equal to ``r``
wins and pays ``r``.

Infinite tails are integrated with adaptive Gauss-Kronrod quadrature after
mapping ``x = lower + scale * t / (1 - t)`` onto ``t`` in ``[0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from auctionlab.analytics import expected_buyer_surplus
from auctionlab.distributions import (
    Exponential,
    ParetoI,
    Uniform,
    ValuationDistribution,
    quantile,
)
from auctionlab.errors import DomainError

DEFAULT_EPSABS = 1e-10
DEFAULT_LIMIT = 200
# slowly decaying tails (1 < v <= 1.1) need many more subintervals
HEAVY_TAIL_LIMIT = 2000
HEAVY_TAIL_SHAPE = 1.1


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"bidder count must be an integer >= 1, got {n}")
    return int(n)


def _check_reserve(dist: ValuationDistribution, r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r < dist.infimum:
        raise DomainError(f"reserve {r} is below the support infimum {dist.infimum} of {dist}")
    return r


def _tail_integral(func, dist: ValuationDistribution, lower: float, epsabs: float) -> float:
    """Integrate ``func`` over ``[lower, sup of support)``."""
    if isinstance(dist, Uniform):
        if lower >= dist.hi:
            return 0.0
        val, _ = integrate.quad(func, lower, dist.hi, epsabs=epsabs, epsrel=1e-13, limit=DEFAULT_LIMIT)
        return val
    if isinstance(dist, Exponential):
        scale = 1.0 / dist.lam
        limit = DEFAULT_LIMIT
    else:
        scale = max(lower, dist.a)
        limit = HEAVY_TAIL_LIMIT if dist.v <= HEAVY_TAIL_SHAPE else DEFAULT_LIMIT

    def mapped(t: float) -> float:
        one_minus = 1.0 - t
        if one_minus <= 0.0:
            return 0.0
        x = lower + scale * t / one_minus
        return func(x) * scale / (one_minus * one_minus)

    val, _ = integrate.quad(mapped, 0.0, 1.0, epsabs=epsabs, epsrel=1e-13, limit=limit)
    return val


def excess_mean(dist: ValuationDistribution, s: float) -> float:
    """``E[(X - s)+] = integral_s^inf (1 - F(t)) dt``, closed form per family."""
    if isinstance(dist, Exponential):
        return math.exp(-dist.lam * max(s, 0.0)) / dist.lam + max(-s, 0.0)
    if isinstance(dist, ParetoI):
        if dist.v <= 1:
            raise DomainError("ParetoI with v <= 1 has infinite mean")
        if s <= dist.a:
            return dist.mean() - s
        return dist.a**dist.v * s ** (1.0 - dist.v) / (dist.v - 1.0)
    if isinstance(dist, Uniform):
        if s <= dist.lo:
            return dist.mean() - s
        if s >= dist.hi:
            return 0.0
        return (dist.hi - s) ** 2 / (2.0 * dist.width)
    raise TypeError(f"unsupported distribution {dist!r}")


def myerson_reserve(dist: ValuationDistribution) -> float:
    """Zero of the virtual value, clamped to the support infimum.

    Pareto has no interior root (its virtual value ``x (1 - 1/v)`` is positive
    on the whole support), so the optimum is ``a`` itself.
    """
    if not dist.is_regular():
        raise DomainError(f"{dist} is not regular; the Myerson reserve is undefined")
    if isinstance(dist, Exponential):
        return 1.0 / dist.lam
    if isinstance(dist, Uniform):
        return max(dist.hi / 2.0, dist.lo)
    return dist.a


def revenue_with_reserve(
    dist: ValuationDistribution,
    n: int,
    r: float,
    *,
    method: str = "auto",
    epsabs: float = DEFAULT_EPSABS,
) -> float:
    """Expected seller revenue with ``n`` bidders and reserve ``r``.

    ``method="auto"`` uses the closed forms where they exist (one bidder:
    ``r (1 - F(r))``; equal-revenue Pareto: ``a n`` for every ``r``) and
    quadrature otherwise. ``method="quadrature"`` always integrates.
    """
    n = _check_n(n)
    r = _check_reserve(dist, r)
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    head = n * r * dist.cdf(r) ** (n - 1) * dist.sf(r)
    if method == "auto":
        if isinstance(dist, ParetoI) and dist.v == 1:
            return equal_revenue_revenue(dist.a, n, r)
        if n == 1:
            return head
    if n == 1:
        return head

    def integrand(x: float) -> float:
        return x * dist.cdf(x) ** (n - 2) * dist.pdf(x) * dist.sf(x)

    return head + n * (n - 1) * _tail_integral(integrand, dist, r, epsabs)


def equal_revenue_revenue(a: float, n: int, r: float | None = None) -> float:
    """Revenue ``a n`` of Pareto(a, 1) bidders, the same for every reserve ``r >= a``."""
    n = _check_n(n)
    if r is not None and r < a:
        raise DomainError(f"reserve {r} is below the support infimum {a}")
    return float(a * n)


def surplus_with_reserve(
    dist: ValuationDistribution,
    n: int,
    r: float,
    *,
    method: str = "quadrature",
    epsabs: float = DEFAULT_EPSABS,
    replications: int = 10**6,
    seed: int = 0,
) -> float:
    """Expected buyer surplus with ``n`` bidders and reserve ``r``.

    With ``n = 1`` and ``r`` at the support infimum this is ``mean - infimum``
    (the lone bidder pays the reserve). ``method="mc"`` returns the mean of a
    seeded simulation instead.
    """
    n = _check_n(n)
    r = _check_reserve(dist, r)
    if isinstance(dist, ParetoI) and dist.v <= 1:
        raise DomainError("ParetoI with v <= 1: infinite expected buyer surplus")
    if method == "mc":
        from auctionlab.simulate import estimate_auction

        est = estimate_auction(dist, n, reserve=r, replications=replications, seed=seed)
        return est.buyer_surplus.mean
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    head = n * dist.cdf(r) ** (n - 1) * excess_mean(dist, r)
    if n == 1:
        return head

    def integrand(s: float) -> float:
        return dist.cdf(s) ** (n - 2) * dist.pdf(s) * excess_mean(dist, s)

    return head + n * (n - 1) * _tail_integral(integrand, dist, r, epsabs)


def surplus_with_reserve_exponential(lam: float, n: int) -> float:
    """Buyer surplus under the optimal reserve ``1/lam``: ``(1/lam) [1 - (1 - e^-1)^n]``.

    Increases toward the no-reserve value ``1/lam`` as ``n`` grows.
    """
    n = _check_n(n)
    if not lam > 0:
        raise DomainError(f"rate must be positive, got {lam}")
    return -math.expm1(n * math.log1p(-math.exp(-1.0))) / lam


def surplus_loss_exponential(lam: float, n: int) -> float:
    """Buyer surplus lost to the optimal reserve: ``(1/lam) (1 - e^-1)^n``.

    This is *not* the seller's revenue gain. When every bid is below the
    reserve nothing is sold, so the lost surplus exceeds the extra revenue by
    ``E[top bid; top bid < r]``. See :func:`reserve_revenue_gain`.
    """
    n = _check_n(n)
    return (1.0 - math.exp(-1.0)) ** n / lam


def reserve_revenue_gain(dist: ValuationDistribution, n: int, r: float | None = None) -> float:
    """Revenue at ``r`` minus revenue at the support infimum; ``r`` defaults to the Myerson reserve."""
    if r is None:
        r = myerson_reserve(dist)
    return revenue_with_reserve(dist, n, r) - revenue_with_reserve(dist, n, dist.infimum)


def revenue_derivative(dist: ValuationDistribution, n: int, r: float) -> float:
    """``d revenue / dr = n F(r)^(n-1) [1 - F(r) - r f(r)]``.

    For Pareto this is ``n F^(n-1) (1 - F) (1 - v)``: negative for every
    ``r > a`` when ``v > 1`` and identically zero at ``v = 1``.
    """
    n = _check_n(n)
    r = _check_reserve(dist, r)
    F = dist.cdf(r)
    if isinstance(dist, ParetoI):
        return n * F ** (n - 1) * dist.sf(r) * (1.0 - dist.v)
    return n * F ** (n - 1) * (dist.sf(r) - r * dist.pdf(r))


def derivative_ratio(dist: ValuationDistribution, n: int, r: float) -> float:
    """Revenue derivative with ``n + 1`` bidders over that with ``n``: ``((n+1)/n) F(r)``.

    Above 1, one more bidder makes the reserve's revenue loss (or gain) larger.
    """
    n = _check_n(n)
    r = _check_reserve(dist, r)
    return (n + 1) / n * dist.cdf(r)


def ratio_threshold_reserve(dist: ValuationDistribution, n: int) -> float:
    """Reserve at which :func:`derivative_ratio` equals 1: ``F(r) = n/(n+1)``.

    For Pareto this is ``a (n+1)^(1/v)``; the ratio exceeds 1 above it.
    """
    n = _check_n(n)
    if isinstance(dist, ParetoI):
        return dist.a * (n + 1.0) ** (1.0 / dist.v)
    return quantile(dist, n / (n + 1.0))


def ratio_threshold_bidders(dist: ValuationDistribution, r: float) -> float:
    """Bidder count at which :func:`derivative_ratio` equals 1 for fixed ``r``.

    Solves ``F(r) = n/(n+1)``, i.e. ``n = F/(1-F)``; ``(r/a)^v - 1`` for Pareto.
    The ratio exceeds 1 for ``n`` below this value.
    """
    r = _check_reserve(dist, r)
    if isinstance(dist, ParetoI):
        return (r / dist.a) ** dist.v - 1.0
    sf = dist.sf(r)
    return math.inf if sf == 0 else dist.cdf(r) / sf


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    reserve: float
    bidders_at_reserve: float
    inverted_form: float | None
    note: str


def threshold_report(dist: ValuationDistribution, n: int) -> ThresholdReport:
    """Crossing point of the derivative ratio, with the inverted Pareto form for contrast.

    ``inverted_form`` is ``(n+1)^(1/v) / a``, which coincides with the true
    threshold only when ``a = 1``.
    """
    r = ratio_threshold_reserve(dist, n)
    inverted = None
    note = "ratio ((n+1)/n) F(r) crosses 1 at F(r) = n/(n+1)"
    if isinstance(dist, ParetoI):
        inverted = (n + 1.0) ** (1.0 / dist.v) / dist.a
        note = (
            "ratio exceeds 1 for r >= a (n+1)^(1/v), equivalently n <= (r/a)^v - 1; "
            "the form r <= (n+1)^(1/v)/a with n >= (r/a)^v - 1 has the inequalities "
            "reversed and divides by a instead of multiplying"
        )
    return ThresholdReport(n, r, ratio_threshold_bidders(dist, r), inverted, note)


def reserve_loss(dist: ValuationDistribution, n: int, r: float) -> float:
    """Revenue given up by setting reserve ``r`` instead of the support infimum."""
    return revenue_with_reserve(dist, n, dist.infimum) - revenue_with_reserve(dist, n, r)


def reserve_loss_curve(dist: ValuationDistribution, r: float, ns) -> list[tuple[int, float]]:
    return [(int(n), reserve_loss(dist, n, r)) for n in ns]


@dataclass(frozen=True)
class ReserveAnalysis:
    dist: ValuationDistribution
    n: int
    r: float
    expected_revenue: float
    expected_surplus: float
    revenue_derivative: float
    sale_probability: float


def analyze_reserve(dist: ValuationDistribution, n: int, r: float) -> ReserveAnalysis:
    """All reserve quantities at one ``(n, r)``; surplus is ``inf`` for equal-revenue Pareto."""
    n = _check_n(n)
    r = _check_reserve(dist, r)
    if isinstance(dist, ParetoI) and dist.v <= 1:
        surplus = math.inf
    else:
        surplus = surplus_with_reserve(dist, n, r)
    return ReserveAnalysis(
        dist=dist,
        n=n,
        r=r,
        expected_revenue=revenue_with_reserve(dist, n, r),
        expected_surplus=surplus,
        revenue_derivative=revenue_derivative(dist, n, r),
        sale_probability=1.0 - dist.cdf(r) ** n,
    )


def no_reserve_surplus(dist: ValuationDistribution, n: int) -> float:
    """Surplus at the infimum reserve, which never binds for ``n >= 2``."""
    if n >= 2:
        return expected_buyer_surplus(dist, n)
    return excess_mean(dist, dist.infimum)
