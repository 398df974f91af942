"""Expected revenue, exact assortment optimization, and the Monte Carlo
revenue evaluator.

The optimizer enumerates all non-empty assortments, which is exact because
for a fixed assortment each consumer type's purchase set is pinned down by
the deterministic choice rule; no integer program is needed at this scale.

The evaluator replays a persisted population of synthetic consumers (full
utility rankings with the outside option embedded, plus an intended purchase
quantity) against a candidate assortment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .datagen import PROBIT_QMAX, probit_quantity_pmf
from .model import ChoiceModel, purchase_outcome

OPTIMIZE_MAX_N = 20
_POPULATION_STREAM = 99


def expected_revenue(model: ChoiceModel, offer: Iterable[int], revenues: Sequence[float]) -> float:
    """Probability-weighted revenue of an assortment: each type contributes
    the revenue of its purchase set. Zero on the empty assortment."""
    offer = tuple(sorted(set(offer)))
    if not offer:
        return 0.0
    total = 0.0
    for c, p in zip(model.types, model.probs):
        if p == 0.0:
            continue
        total += p * sum(revenues[j - 1] for j in purchase_outcome(c, offer))
    return total


def optimize_assortment(
    model: ChoiceModel,
    revenues: Sequence[float],
    n: int,
) -> tuple[tuple[int, ...], float]:
    """Exhaustive assortment optimization over all non-empty subsets of
    {1..n}; ties broken toward the smallest, then lexicographically first,
    assortment."""
    if n < 1:
        raise ValueError("need at least one product")
    if n > OPTIMIZE_MAX_N:
        raise ValueError(f"enumeration over n={n} products refused (cap {OPTIMIZE_MAX_N})")
    if len(revenues) < n:
        raise ValueError("revenue vector shorter than the universe")
    best: tuple[int, ...] = ()
    best_value = 0.0
    for size in range(1, n + 1):
        for offer in combinations(range(1, n + 1), size):
            value = expected_revenue(model, offer, revenues)
            if value > best_value + 1e-12:
                best, best_value = offer, value
    if not best:
        best = (1,)
        best_value = expected_revenue(model, best, revenues)
    return best, best_value


@dataclass(frozen=True)
class Consumer:
    """One synthetic consumer: a full preference ranking over products with
    the outside option embedded as 0, and an intended purchase quantity."""

    ranking: tuple[int, ...]
    quantity: int


@dataclass(frozen=True)
class ProbitPopulation:
    consumers: tuple[Consumer, ...]

    def __len__(self) -> int:
        return len(self.consumers)


def build_probit_population(
    params: dict[str, Sequence[float]],
    m: int,
    seed: int = 0,
) -> ProbitPopulation:
    """Draw ``m`` consumers from the probit law: utilities V_j - beta_j r_j
    plus standard normal noise per product, a standard normal outside option,
    rankings by decreasing utility (ties toward the lower product index), and
    quantities in {0..2} with probability proportional to exp(0.6 q)."""
    V = np.asarray(params["V"], dtype=np.float64)
    beta = np.asarray(params["beta"], dtype=np.float64)
    r = np.asarray(params["r"], dtype=np.float64)
    n = len(V)
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, _POPULATION_STREAM], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    qp = probit_quantity_pmf()
    consumers = []
    for _ in range(m):
        u0 = rng.normal()
        u = V - beta * r + rng.normal(size=n)
        merged = np.concatenate([[u0], u])
        order = np.argsort(-merged, kind="stable")  # 0 is the outside option
        quantity = int(rng.choice(PROBIT_QMAX + 1, p=qp))
        consumers.append(Consumer(tuple(int(i) for i in order), quantity))
    return ProbitPopulation(tuple(consumers))


def population_from_choice_model(model: ChoiceModel, m: int, seed: int = 0) -> ProbitPopulation:
    """Sample ``m`` consumers from a ranked-list model: each consumer is one
    type, its ranking ends at the outside option, and its quantity is the
    type's capacity."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, _POPULATION_STREAM + 1], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    probs = np.array(model.probs)
    picks = rng.choice(len(model.types), size=m, p=probs)
    consumers = []
    for idx in picks:
        c = model.types[int(idx)]
        consumers.append(Consumer(c.sigma + (0,), c.eta))
    return ProbitPopulation(tuple(consumers))


def simulate_consumer(consumer: Consumer, offer: set[int], revenues: Sequence[float]) -> float:
    """Revenue collected from one consumer: scan the ranking, buying offered
    products until the quantity is reached, the outside option appears, or
    the ranking is exhausted."""
    bought = 0
    revenue = 0.0
    for j in consumer.ranking:
        if bought >= consumer.quantity:
            break
        if j == 0:
            break
        if j in offer:
            revenue += revenues[j - 1]
            bought += 1
    return revenue


def simulate_revenue(pop: ProbitPopulation, offer: Iterable[int], revenues: Sequence[float]) -> float:
    """Mean per-consumer revenue of an assortment over the population."""
    if not len(pop):
        raise ValueError("empty population")
    offered = set(offer)
    return sum(simulate_consumer(c, offered, revenues) for c in pop.consumers) / len(pop)


def aao_ratio(
    truth: ChoiceModel,
    estimated: ChoiceModel,
    revenues: Sequence[float],
    n: int,
) -> float:
    """Revenue captured by the estimated model's optimal assortment when
    evaluated under the truth, relative to the truth's own optimum."""
    est_offer, _ = optimize_assortment(estimated, revenues, n)
    _, best = optimize_assortment(truth, revenues, n)
    if best <= 0.0:
        return 1.0
    return expected_revenue(truth, est_offer, revenues) / best


def dump_population(pop: ProbitPopulation, path: str | Path) -> None:
    with open(path, "w") as fh:
        for c in pop.consumers:
            fh.write(json.dumps({"ranking": list(c.ranking), "q": c.quantity}) + "\n")


def load_population(path: str | Path) -> ProbitPopulation:
    consumers = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            consumers.append(Consumer(tuple(int(j) for j in rec["ranking"]), int(rec["q"])))
    return ProbitPopulation(tuple(consumers))
