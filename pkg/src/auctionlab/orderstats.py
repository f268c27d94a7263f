"""Closed-form expectations of order statistics.

Ranks follow ``X_(1) <= ... <= X_(m)``: rank 1 is the smallest of ``m``
draws and rank ``m`` the largest.

* Exponential: Renyi representation, ``E X_(i) = (1/lam) * sum_{j=1..i} 1/(m-j+1)``.
* Uniform[lo, hi]: affine image of ``E U_(i) = i/(m+1)``.
* Pareto I: ``a * m!/(m-i)! * Gamma(m+1-i-1/v) / Gamma(m+1-1/v)``, computed
  with log-gamma differences so that large ``m`` does not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from auctionlab.distributions import Exponential, ParetoI, Uniform, ValuationDistribution
from auctionlab.errors import DomainError

EULER_GAMMA = 0.57721566490153286061

# below this, harmonic numbers are summed exactly
HARMONIC_EXACT_LIMIT = 10**6


@dataclass(frozen=True)
class OrderStatQuery:
    dist: ValuationDistribution
    m: int
    i: int

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"sample count m must be an integer >= 1, got {self.m}")
        if int(self.i) != self.i or not 1 <= self.i <= self.m:
            raise DomainError(f"rank i must satisfy 1 <= i <= m={self.m}, got {self.i}")


def harmonic(k: int) -> float:
    """``H_k = 1 + 1/2 + ... + 1/k``; ``H_0 = 0``.

    Exact summation (smallest terms first) below ``HARMONIC_EXACT_LIMIT``,
    Euler-Maclaurin asymptotics above it.
    """
    if k < 0:
        raise DomainError(f"harmonic number needs k >= 0, got {k}")
    k = int(k)
    if k < HARMONIC_EXACT_LIMIT:
        return math.fsum(1.0 / np.arange(k, 0, -1, dtype=float))
    return math.log(k) + EULER_GAMMA + 1.0 / (2 * k) - 1.0 / (12.0 * k * k)


def log_gamma_ratio(m: int, v: float) -> float:
    """``Gamma(m+1) / Gamma(m+1-1/v)``, evaluated as exp of a log-gamma difference."""
    if v <= 1:
        raise DomainError(f"log_gamma_ratio needs v > 1, got {v}")
    if m < 1:
        raise DomainError(f"log_gamma_ratio needs m >= 1, got {m}")
    return math.exp(gammaln(m + 1.0) - gammaln(m + 1.0 - 1.0 / v))


def pareto_g(n: int, a: float, v: float) -> float:
    """``a * Gamma(n+2)/Gamma(n+2-1/v) * Gamma(1-1/v)``.

    For ``n+1`` Pareto draws this is the mean of the maximum; the runner-up
    mean is ``g * (1 - 1/v)`` and the third-highest ``g/2 * (1-1/v) * (2-1/v)``.
    """
    if v <= 1:
        raise DomainError(f"pareto_g needs v > 1, got {v}")
    if n < 1:
        raise DomainError(f"pareto_g needs n >= 1, got {n}")
    return a * math.exp(gammaln(n + 2.0) - gammaln(n + 2.0 - 1.0 / v) + gammaln(1.0 - 1.0 / v))


def gamma_ratio_approx(n: int, v: float) -> float:
    """Power-law stand-in ``(n+1)^(1/v)`` for ``Gamma(n+2)/Gamma(n+2-1/v)``.

    Use :func:`gamma_ratio_approx_error` to see how far off it is.
    """
    return (n + 1.0) ** (1.0 / v)


def gamma_ratio_approx_error(n: int, v: float) -> float:
    """Relative error of :func:`gamma_ratio_approx` against the exact ratio."""
    exact = log_gamma_ratio(n + 1, v)
    return abs(gamma_ratio_approx(n, v) - exact) / exact


def expected_order_stat(q: OrderStatQuery) -> float:
    dist, m, i = q.dist, int(q.m), int(q.i)
    if isinstance(dist, Exponential):
        return math.fsum(1.0 / (m - j + 1) for j in range(i, 0, -1)) / dist.lam
    if isinstance(dist, Uniform):
        return dist.lo + dist.width * i / (m + 1.0)
    if isinstance(dist, ParetoI):
        shift = m + 1 - i - 1.0 / dist.v
        if shift <= 0:
            raise DomainError(
                f"ParetoI(v={dist.v}): order statistic {i} of {m} has infinite expectation"
                + (" (infinite expected top order statistic)" if i == m else "")
            )
        log_val = (
            gammaln(m + 1.0)
            - gammaln(m - i + 1.0)
            + gammaln(shift)
            - gammaln(m + 1.0 - 1.0 / dist.v)
        )
        return dist.a * math.exp(log_val)
    raise TypeError(f"unsupported distribution {dist!r}")


def order_stat_mean(dist: ValuationDistribution, m: int, i: int) -> float:
    """Shorthand for ``expected_order_stat(OrderStatQuery(dist, m, i))``."""
    return expected_order_stat(OrderStatQuery(dist, m, i))
