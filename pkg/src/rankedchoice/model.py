"""Core data model: transactions, consumer types and the deterministic choice rule.

Products are 1-based integers. The no-purchase sentinel 0 appears only in
serialized preference lists (it marks where a ranking stops being meaningful)
and is stripped on load; in-memory rankings never contain it. The passive
consumer, who never buys anything, is the canonical type ``(sigma=(), eta=0)``.

All types here are immutable after construction and every operation is a pure
function, so they are safe to share across workers.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

PROB_TOL = 1e-9


def _sorted_products(values: Iterable[int], what: str) -> tuple[int, ...]:
    out = tuple(sorted(set(int(v) for v in values)))
    if any(v < 1 for v in out):
        raise ValueError(f"{what} must contain positive product ids, got {out}")
    return out


@dataclass(frozen=True)
class Transaction:
    """One arrival: a non-empty offered assortment and the purchased bundle.

    ``offer`` and ``bundle`` are canonicalized to strictly increasing tuples,
    and ``bundle`` must be a subset of ``offer``. An empty bundle records a
    no-purchase arrival.
    """

    offer: tuple[int, ...]
    bundle: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        offer = _sorted_products(self.offer, "offer")
        bundle = _sorted_products(self.bundle, "bundle")
        if not offer:
            raise ValueError("offer set must be non-empty")
        if not set(bundle) <= set(offer):
            raise ValueError(f"bundle {bundle} not contained in offer {offer}")
        object.__setattr__(self, "offer", offer)
        object.__setattr__(self, "bundle", bundle)

    @property
    def rejected(self) -> tuple[int, ...]:
        """Products offered but not purchased."""
        b = set(self.bundle)
        return tuple(j for j in self.offer if j not in b)


@dataclass(frozen=True)
class TransactionLog:
    """An ordered list of transactions, one per arrival period, plus the
    count of periods in which no consumer arrived."""

    transactions: tuple[Transaction, ...]
    no_arrival_periods: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "transactions", tuple(self.transactions))
        if self.no_arrival_periods < 0:
            raise ValueError("no_arrival_periods must be non-negative")

    def __len__(self) -> int:
        return len(self.transactions)

    @property
    def num_purchase_periods(self) -> int:
        return sum(1 for t in self.transactions if t.bundle)

    @property
    def num_no_purchase_periods(self) -> int:
        return sum(1 for t in self.transactions if not t.bundle)

    def max_product(self) -> int:
        """Largest product id appearing in any offer (0 for an empty log)."""
        return max((t.offer[-1] for t in self.transactions), default=0)


@dataclass(frozen=True, order=True)
class ConsumerType:
    """A ranked preference list plus a purchase capacity.

    ``sigma`` is order-significant and duplicate-free; ``eta`` is the maximum
    number of products this consumer is willing to buy. The passive consumer
    is ``ConsumerType((), 0)``.
    """

    eta: int
    sigma: tuple[int, ...]

    def __init__(self, sigma: Iterable[int] = (), eta: int = 0):
        sigma = tuple(int(j) for j in sigma)
        if len(set(sigma)) != len(sigma):
            raise ValueError(f"preference list has repeated products: {sigma}")
        if any(j < 1 for j in sigma):
            raise ValueError(f"preference list must use positive ids: {sigma}")
        if sigma and eta < 1:
            raise ValueError("capacity must be at least 1 for a non-empty list")
        if not sigma and eta != 0:
            raise ValueError("the empty list must carry capacity 0 (passive consumer)")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "eta", int(eta))

    @property
    def is_passive(self) -> bool:
        return not self.sigma


PASSIVE = ConsumerType((), 0)


def purchase_outcome(consumer: ConsumerType, offer: Iterable[int]) -> frozenset[int]:
    """Deterministic choice: the top ``eta`` products of the consumer's list
    restricted to ``offer``. Empty if nothing acceptable is offered."""
    available = set(offer)
    if not available:
        raise ValueError("offer set must be non-empty")
    picked = []
    for j in consumer.sigma:
        if j in available:
            picked.append(j)
            if len(picked) == consumer.eta:
                break
    return frozenset(picked)


def is_compatible(consumer: ConsumerType, transaction: Transaction) -> bool:
    """True iff the consumer, facing the transaction's offer, would buy
    exactly the recorded bundle."""
    return purchase_outcome(consumer, transaction.offer) == frozenset(transaction.bundle)


@dataclass(frozen=True)
class ChoiceModel:
    """A probability mass function over consumer types plus an arrival rate."""

    types: tuple[ConsumerType, ...]
    probs: tuple[float, ...]
    lam: float = 1.0

    def __post_init__(self) -> None:
        types = tuple(self.types)
        probs = tuple(float(p) for p in self.probs)
        if len(types) != len(probs):
            raise ValueError("types and probs must have equal length")
        if len(set(types)) != len(types):
            raise ValueError("duplicate consumer types in model")
        if any(p < -PROB_TOL for p in probs):
            raise ValueError("negative type probability")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"type probabilities sum to {sum(probs)}, expected 1")
        if not (0.0 < self.lam <= 1.0):
            raise ValueError(f"arrival rate must lie in (0, 1], got {self.lam}")
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "probs", probs)

    def max_eta(self) -> int:
        return max((c.eta for c in self.types), default=0)

    def max_product(self) -> int:
        return max((max(c.sigma) for c in self.types if c.sigma), default=0)


def predicted_probability(model: ChoiceModel, bundle: Iterable[int], offer: Iterable[int]) -> float:
    """Probability that a random consumer of the model buys exactly ``bundle``
    when facing ``offer``."""
    target = frozenset(bundle)
    offer = tuple(offer)
    if not target <= set(offer):
        raise ValueError("bundle must be contained in the offer")
    return sum(
        p for c, p in zip(model.types, model.probs)
        if purchase_outcome(c, offer) == target
    )


def bundle_distribution(model: ChoiceModel, offer: Iterable[int]) -> dict[frozenset[int], float]:
    """Full predicted bundle distribution for one offer (sums to 1)."""
    offer = tuple(offer)
    dist: dict[frozenset[int], float] = defaultdict(float)
    for c, p in zip(model.types, model.probs):
        dist[purchase_outcome(c, offer)] += p
    return dict(dist)


@dataclass(frozen=True)
class DistinctMarket:
    """Empirical purchase probabilities for the distinct (offer, bundle) pairs
    of a log. Rows with zero count are absent; for each offer the stored
    probabilities sum to 1."""

    entries: Mapping[tuple[tuple[int, ...], tuple[int, ...]], float]

    def __post_init__(self) -> None:
        entries = dict(self.entries)
        per_offer: dict[tuple[int, ...], float] = defaultdict(float)
        for (offer, bundle), v in entries.items():
            if v <= 0:
                raise ValueError(f"non-positive empirical probability for {(offer, bundle)}")
            per_offer[offer] += v
        for offer, total in per_offer.items():
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(f"probabilities for offer {offer} sum to {total}")
        object.__setattr__(self, "entries", entries)

    def rows(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Deterministic row order: lexicographic on (offer, bundle)."""
        return sorted(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def empirical_probabilities(log: TransactionLog) -> DistinctMarket:
    """Relative frequency of each observed bundle within its offer set."""
    if not log.transactions:
        raise ValueError("cannot build a market from an empty log")
    offer_counts: dict[tuple[int, ...], int] = defaultdict(int)
    pair_counts: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = defaultdict(int)
    for t in log.transactions:
        offer_counts[t.offer] += 1
        pair_counts[(t.offer, t.bundle)] += 1
    return DistinctMarket({
        key: count / offer_counts[key[0]] for key, count in pair_counts.items()
    })


def estimate_arrival_rate(log: TransactionLog) -> float:
    """Closed-form maximum-likelihood arrival probability: the fraction of
    periods with an arrival."""
    arrivals = len(log.transactions)
    if arrivals == 0:
        raise ValueError("cannot estimate an arrival rate from a log with no arrivals")
    return arrivals / (arrivals + log.no_arrival_periods)
