"""Valuation distributions: Uniform, Exponential and Pareto Type I.

Every distribution is an immutable dataclass validated at construction.
Sampling is inverse-transform only, so each draw is a pure function of
one uniform variate; the simulation engine relies on this for paired
coupling and reproducibility.

Functions accept scalars or numpy arrays and return the same shape
(scalars come back as plain ``float``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from auctionlab.errors import DomainError

ArrayLike = Union[float, np.ndarray]


def _out(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1.0

    family = "uniform"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise DomainError(f"Uniform requires finite lo < hi, got lo={self.lo}, hi={self.hi}")

    @property
    def infimum(self) -> float:
        return self.lo

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def cdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return _out(np.clip((x - self.lo) / self.width, 0.0, 1.0))

    def pdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return _out(np.where(inside, 1.0 / self.width, 0.0))

    def sf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return _out(np.clip((self.hi - x) / self.width, 0.0, 1.0))

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        return self.lo + self.width * u

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def virtual_value(self, x: ArrayLike) -> ArrayLike:
        _check_support(self, x)
        return _out(2.0 * np.asarray(x, dtype=float) - self.hi)

    def is_regular(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"family": self.family, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Exponential:
    """Exponential valuations with rate ``lam`` (mean ``1/lam``)."""

    lam: float = 1.0

    family = "exponential"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"Exponential requires rate lam > 0, got {self.lam}")

    @property
    def infimum(self) -> float:
        return 0.0

    @property
    def scale(self) -> float:
        return 1.0 / self.lam

    def cdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return _out(np.where(x >= 0, -np.expm1(-self.lam * np.maximum(x, 0.0)), 0.0))

    def pdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return _out(np.where(x >= 0, self.lam * np.exp(-self.lam * np.maximum(x, 0.0)), 0.0))

    def sf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return _out(np.exp(-self.lam * np.maximum(x, 0.0)))

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        return -np.log1p(-u) / self.lam

    def mean(self) -> float:
        return 1.0 / self.lam

    def virtual_value(self, x: ArrayLike) -> ArrayLike:
        _check_support(self, x)
        return _out(np.asarray(x, dtype=float) - 1.0 / self.lam)

    def is_regular(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"family": self.family, "lam": self.lam}


@dataclass(frozen=True)
class ParetoI:
    """Pareto Type I with scale ``a`` (support infimum) and shape ``v``.

    ``v = 1`` is the equal-revenue distribution. It is representable, but
    anything that needs a finite mean of the top order statistic rejects it.
    """

    a: float = 1.0
    v: float = 2.0

    family = "pareto1"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"ParetoI requires scale a > 0, got {self.a}")
        if not math.isfinite(self.v) or self.v < 1:
            raise DomainError(
                f"ParetoI shape v={self.v} < 1: infinite expected top order statistic"
            )

    @property
    def infimum(self) -> float:
        return self.a

    @property
    def equal_revenue(self) -> bool:
        return self.v == 1

    def cdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        safe = np.maximum(x, self.a)
        return _out(np.where(x >= self.a, -np.expm1(self.v * np.log(self.a / safe)), 0.0))

    def pdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        safe = np.maximum(x, self.a)
        return _out(np.where(x >= self.a, self.v * (self.a / safe) ** self.v / safe, 0.0))

    def sf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return _out((self.a / np.maximum(x, self.a)) ** self.v)

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        return self.a * (1.0 - u) ** (-1.0 / self.v)

    def mean(self) -> float:
        if self.v <= 1:
            raise DomainError("ParetoI with v <= 1 has infinite mean")
        return self.v * self.a / (self.v - 1.0)

    def virtual_value(self, x: ArrayLike) -> ArrayLike:
        _check_support(self, x)
        return _out(np.asarray(x, dtype=float) * (1.0 - 1.0 / self.v))

    def is_regular(self) -> bool:
        # virtual value slope is 1 - 1/v; flat (not strictly increasing) at v = 1
        return self.v > 1

    def to_dict(self) -> dict:
        return {"family": self.family, "a": self.a, "v": self.v}


ValuationDistribution = Union[Uniform, Exponential, ParetoI]

_FAMILIES = {cls.family: cls for cls in (Uniform, Exponential, ParetoI)}
_ALIASES = {"pareto": "pareto1", "paretoi": "pareto1", "exp": "exponential"}


def _check_support(dist: ValuationDistribution, x: ArrayLike) -> None:
    x = np.asarray(x, dtype=float)
    upper = dist.hi if isinstance(dist, Uniform) else math.inf
    if np.any(x < dist.infimum) or np.any(x > upper) or np.any(~np.isfinite(x)):
        raise DomainError(f"x outside the support of {dist}")


def cdf(dist: ValuationDistribution, x: ArrayLike) -> ArrayLike:
    return dist.cdf(x)


def pdf(dist: ValuationDistribution, x: ArrayLike) -> ArrayLike:
    return dist.pdf(x)


def quantile(dist: ValuationDistribution, u: ArrayLike) -> ArrayLike:
    """Inverse CDF on the open interval (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("quantile requires u strictly inside (0, 1)")
    return _out(dist._ppf(u))


def sample(dist: ValuationDistribution, rng: np.random.Generator, size=None) -> ArrayLike:
    """Inverse-transform draw(s). ``rng.random`` lies in [0, 1), which every ppf accepts."""
    u = rng.random(size)
    return _out(dist._ppf(np.asarray(u)))


def virtual_value(dist: ValuationDistribution, x: ArrayLike) -> ArrayLike:
    """Myerson virtual value ``x - (1 - F(x)) / f(x)``; raises outside the support."""
    return dist.virtual_value(x)


def is_regular(dist: ValuationDistribution) -> bool:
    return dist.is_regular()


def from_dict(obj: dict) -> ValuationDistribution:
    """Build a distribution from its JSON object, e.g. ``{"family": "pareto1", "a": 1, "v": 2}``."""
    if not isinstance(obj, dict) or "family" not in obj:
        raise ValueError(f"distribution must be an object with a 'family' key, got {obj!r}")
    name = str(obj["family"]).lower()
    name = _ALIASES.get(name, name)
    if name not in _FAMILIES:
        raise ValueError(f"unknown family {obj['family']!r}; expected one of {sorted(_FAMILIES)}")
    params = {k: float(val) for k, val in obj.items() if k != "family"}
    if name == "exponential" and "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return _FAMILIES[name](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from None


def to_dict(dist: ValuationDistribution) -> dict:
    return dist.to_dict()
