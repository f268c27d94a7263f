"""Multi-auction participation arrangements and Pareto improvement in expectation.

``I[i, j] = 1`` when bidder ``i`` may bid in auction ``j``; ``b_j`` is the
column sum. By symmetry each participant in auction ``j`` expects
``E p_j(b_j) / b_j``, so bidder ``i`` expects ``sum_j I[i, j] E p_j(b_j) / b_j``.

Surplus and revenue curves ``E p_j(b)`` / ``E r_j(b)`` come from a pluggable
source: :class:`ClosedFormSource` (default), :class:`MonteCarloSource` or
:class:`TableSource`.

Auctions with ``b_j = 0`` contribute nothing. With ``b_j = 1`` there is no
runner-up and no reserve, so the lone bidder pays 0: revenue 0 and surplus
equal to the distribution mean.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np

from auctionlab import analytics
from auctionlab.analytics import SurplusRevenueTable
from auctionlab.distributions import ValuationDistribution, from_dict
from auctionlab.errors import DomainError

SELLER_MODES = ("single-seller", "per-auction-seller")
STRICT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ParticipationMatrix:
    inclusion: np.ndarray
    dists: tuple[ValuationDistribution, ...]
    seller_mode: str = "single-seller"

    def __post_init__(self) -> None:
        inc = np.asarray(self.inclusion)
        if inc.ndim != 2:
            raise ValueError(f"inclusion matrix must be 2-D (bidders x auctions), got shape {inc.shape}")
        if inc.size and not np.isin(inc, (0, 1)).all():
            raise ValueError("inclusion matrix entries must be 0 or 1")
        inc = inc.astype(bool)
        inc.setflags(write=False)
        object.__setattr__(self, "inclusion", inc)
        object.__setattr__(self, "dists", tuple(self.dists))
        if len(self.dists) != inc.shape[1]:
            raise ValueError(f"{inc.shape[1]} auctions but {len(self.dists)} distributions")
        if self.seller_mode not in SELLER_MODES:
            raise ValueError(f"seller_mode must be one of {SELLER_MODES}, got {self.seller_mode!r}")

    @property
    def num_bidders(self) -> int:
        return self.inclusion.shape[0]

    @property
    def num_auctions(self) -> int:
        return self.inclusion.shape[1]

    @property
    def bidder_counts(self) -> np.ndarray:
        return self.inclusion.sum(axis=0)


class SurplusSource(Protocol):
    def surplus(self, auction: int, dist: ValuationDistribution, b: int) -> float: ...

    def revenue(self, auction: int, dist: ValuationDistribution, b: int) -> float: ...


class ClosedFormSource:
    """Exact curves from :mod:`auctionlab.analytics`."""

    def surplus(self, auction: int, dist: ValuationDistribution, b: int) -> float:
        if b == 0:
            return 0.0
        if b == 1:
            return dist.mean()
        return analytics.expected_buyer_surplus(dist, b)

    def revenue(self, auction: int, dist: ValuationDistribution, b: int) -> float:
        if b < 2:
            return 0.0
        return analytics.expected_seller_revenue(dist, b)


class MonteCarloSource:
    """Curves estimated by simulation (means only), cached per ``(dist, b)``."""

    def __init__(self, replications: int = 10**6, seed: int = 0, estimator: str = "auto"):
        self.replications = replications
        self.seed = seed
        self.estimator = estimator
        self._cache: dict = {}

    def _run(self, dist, b):
        from auctionlab.simulate import estimate_auction

        key = (dist, b)
        if key not in self._cache:
            est = estimate_auction(
                dist, b, replications=self.replications, seed=self.seed, estimator=self.estimator
            )
            if est.buyer_surplus is None:
                raise DomainError(f"{dist}: expected buyer surplus is infinite")
            self._cache[key] = (est.buyer_surplus.mean, est.seller_revenue.mean)
        return self._cache[key]

    def surplus(self, auction, dist, b):
        return 0.0 if b == 0 else self._run(dist, b)[0]

    def revenue(self, auction, dist, b):
        return 0.0 if b < 2 else self._run(dist, b)[1]


class TableSource:
    """User-supplied curves: one :class:`SurplusRevenueTable` per auction index.

    A table under key ``None`` serves every auction without its own entry.
    """

    def __init__(self, tables: Mapping[Optional[int], SurplusRevenueTable]):
        self.tables = dict(tables)

    def _row(self, auction, b):
        table = self.tables.get(auction, self.tables.get(None))
        if table is None:
            raise KeyError(f"no surplus table for auction {auction}")
        try:
            return table.row(b)
        except KeyError:
            raise DomainError(f"surplus table for auction {auction} has no row m={b}") from None

    def surplus(self, auction, dist, b):
        return 0.0 if b == 0 else self._row(auction, b).buyer_surplus

    def revenue(self, auction, dist, b):
        return 0.0 if b == 0 else self._row(auction, b).seller_revenue


def bidder_surplus_vector(pm: ParticipationMatrix, source: SurplusSource | None = None) -> np.ndarray:
    source = source or ClosedFormSource()
    counts = pm.bidder_counts
    share = np.zeros(pm.num_auctions)
    for j, (dist, b) in enumerate(zip(pm.dists, counts)):
        if b > 0:
            share[j] = source.surplus(j, dist, int(b)) / b
    # each bidder sums the per-participant share of the auctions it joins
    return np.array([np.sum(share[row]) for row in pm.inclusion])


def seller_revenue_total(pm: ParticipationMatrix, source: SurplusSource | None = None):
    """Total expected revenue (single seller) or the per-auction vector."""
    source = source or ClosedFormSource()
    per_auction = np.array(
        [source.revenue(j, dist, int(b)) for j, (dist, b) in enumerate(zip(pm.dists, pm.bidder_counts))]
    )
    if pm.seller_mode == "single-seller":
        return float(per_auction.sum())
    return per_auction


@dataclass(frozen=True, eq=False)
class ParetoVerdict:
    verdict: bool
    strict_parties: tuple[str, ...]
    worse_parties: tuple[str, ...]
    bidder_deltas: np.ndarray
    seller_deltas: np.ndarray
    bidder_old: np.ndarray = field(repr=False)
    bidder_new: np.ndarray = field(repr=False)
    seller_old: np.ndarray = field(repr=False)
    seller_new: np.ndarray = field(repr=False)

    @property
    def strict_party(self) -> Optional[str]:
        return self.strict_parties[0] if self.strict_parties else None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "strict_party": self.strict_party,
            "strict_parties": list(self.strict_parties),
            "worse_parties": list(self.worse_parties),
            "bidders": [
                {"bidder": i, "old": float(o), "new": float(n), "delta": float(d)}
                for i, (o, n, d) in enumerate(zip(self.bidder_old, self.bidder_new, self.bidder_deltas))
            ],
            "sellers": [
                {"seller": name, "old": float(o), "new": float(n), "delta": float(d)}
                for name, o, n, d in zip(
                    _seller_names(len(self.seller_deltas)), self.seller_old, self.seller_new, self.seller_deltas
                )
            ],
        }


def _seller_names(k: int) -> list[str]:
    return ["seller"] if k == 1 else [f"seller:{j}" for j in range(k)]


def _classify(old: float, new: float, rtol: float) -> int:
    tol = rtol * max(abs(old), abs(new))
    if new - old > tol:
        return 1
    if old - new > tol:
        return -1
    return 0


def compare_expectations(
    bidder_old: Sequence[float],
    bidder_new: Sequence[float],
    seller_old: Sequence[float],
    seller_new: Sequence[float],
    rtol: float = STRICT_RTOL,
) -> ParetoVerdict:
    """Pareto improvement in expectation: nobody worse off, someone strictly better.

    Differences within ``rtol`` (relative) count as ties.
    """
    bo, bn = np.asarray(bidder_old, float), np.asarray(bidder_new, float)
    so, sn = np.atleast_1d(np.asarray(seller_old, float)), np.atleast_1d(np.asarray(seller_new, float))
    names = [f"bidder:{i}" for i in range(len(bo))] + _seller_names(len(so))
    signs = [_classify(o, n, rtol) for o, n in zip(np.r_[bo, so], np.r_[bn, sn])]
    strict = tuple(nm for nm, s in zip(names, signs) if s > 0)
    worse = tuple(nm for nm, s in zip(names, signs) if s < 0)
    # seller listed first so a single strict party names the seller when it gains
    strict = tuple(sorted(strict, key=lambda nm: not nm.startswith("seller")))
    return ParetoVerdict(
        verdict=bool(strict) and not worse,
        strict_parties=strict,
        worse_parties=worse,
        bidder_deltas=bn - bo,
        seller_deltas=sn - so,
        bidder_old=bo,
        bidder_new=bn,
        seller_old=so,
        seller_new=sn,
    )


def is_pareto_improvement(
    old: ParticipationMatrix,
    new: ParticipationMatrix,
    source: SurplusSource | None = None,
    rtol: float = STRICT_RTOL,
) -> ParetoVerdict:
    if old.inclusion.shape != new.inclusion.shape:
        raise ValueError(f"matrix shapes differ: {old.inclusion.shape} vs {new.inclusion.shape}")
    if old.dists != new.dists:
        raise ValueError("old and new arrangements must use the same per-auction distributions")
    if old.seller_mode != new.seller_mode:
        raise ValueError(f"seller mode mismatch: {old.seller_mode} vs {new.seller_mode}")
    source = source or ClosedFormSource()
    return compare_expectations(
        bidder_surplus_vector(old, source),
        bidder_surplus_vector(new, source),
        seller_revenue_total(old, source),
        seller_revenue_total(new, source),
        rtol,
    )


def round_robin_exclusion(
    m: int, dist: ValuationDistribution, seller_mode: str = "single-seller"
) -> tuple[ParticipationMatrix, ParticipationMatrix]:
    """``m`` bidders and ``m`` auctions; bidder ``i`` sits out auction ``i`` (old) vs all-in (new).

    Each bidder's gain from the switch is ``E p_m - E p_{m-1}``.
    """
    if int(m) != m or m < 3:
        raise DomainError(f"round-robin exclusion needs m >= 3 bidders, got {m}")
    m = int(m)
    old = ParticipationMatrix(1 - np.eye(m, dtype=int), (dist,) * m, seller_mode)
    new = ParticipationMatrix(np.ones((m, m), dtype=int), (dist,) * m, seller_mode)
    return old, new


def random_exclusion(
    m: int, dist: ValuationDistribution, source: SurplusSource | None = None, rtol: float = STRICT_RTOL
) -> ParetoVerdict:
    """One auction, ``m`` potential bidders; old: one of them chosen at random sits out.

    Evaluated in expectation over the exclusion: each bidder participates with
    probability ``(m-1)/m`` and then expects ``E p_{m-1} / (m-1)``, i.e.
    ``E p_{m-1} / m`` overall. New: everyone bids, ``E p_m / m`` each.
    """
    if int(m) != m or m < 3:
        raise DomainError(f"random exclusion needs m >= 3 potential bidders, got {m}")
    m = int(m)
    source = source or ClosedFormSource()
    old_each = source.surplus(0, dist, m - 1) / m
    new_each = source.surplus(0, dist, m) / m
    return compare_expectations(
        [old_each] * m,
        [new_each] * m,
        [source.revenue(0, dist, m - 1)],
        [source.revenue(0, dist, m)],
        rtol,
    )


def read_matrix_csv(text: str) -> np.ndarray:
    """Rows are bidders, columns auctions, entries 0/1; ``#`` lines and a non-numeric header are skipped."""
    rows = []
    for rec in csv.reader(ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")):
        try:
            rows.append([int(float(c)) for c in rec])
        except ValueError:
            if rows:
                raise ValueError(f"non-numeric matrix row {rec!r}") from None
    if not rows:
        return np.zeros((0, 0), dtype=int)
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(rows, dtype=int)


def matrix_to_csv(pm: ParticipationMatrix) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(pm.inclusion.astype(int).tolist())
    return buf.getvalue()


def sidecar_to_json(pm: ParticipationMatrix) -> str:
    return json.dumps(
        {"distributions": [d.to_dict() for d in pm.dists], "seller_mode": pm.seller_mode}, indent=2
    )


def parse_sidecar(obj: dict, num_auctions: int) -> tuple[tuple[ValuationDistribution, ...], str]:
    """Per-auction ``distributions`` list, or one ``distribution`` for every auction."""
    if "distributions" in obj:
        dists = tuple(from_dict(d) for d in obj["distributions"])
    elif "distribution" in obj:
        dists = (from_dict(obj["distribution"]),) * num_auctions
    else:
        raise ValueError("sidecar needs 'distributions' (list) or 'distribution' (object)")
    return dists, obj.get("seller_mode", "single-seller")


def load_matrix(csv_path: str | Path, sidecar_path: str | Path) -> ParticipationMatrix:
    inc = read_matrix_csv(Path(csv_path).read_text())
    dists, mode = parse_sidecar(json.loads(Path(sidecar_path).read_text()), inc.shape[1])
    return ParticipationMatrix(inc, dists, mode)
