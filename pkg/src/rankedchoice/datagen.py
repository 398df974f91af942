"""Seeded synthetic instance generators.

Five families: random and structured single-purchase markets, multi-purchase
ranked-list markets, limited-consideration-set markets, and a probit-utility
multi-purchase family whose ground truth is a parameter set rather than a
finite type distribution.

Reproducibility: every random draw comes from numpy's Philox4x64-10
counter-based generator, keyed by (family, seed, stream). Train, test, truth,
revenue and parameter draws live on separate streams, so regenerating any one
artifact never perturbs the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import io as rcio
from .model import (
    PASSIVE,
    ChoiceModel,
    ConsumerType,
    Transaction,
    TransactionLog,
    purchase_outcome,
)

FAMILIES = (
    "single_random",
    "single_structured",
    "multipurchase_rankedlist",
    "limited_list",
    "multipurchase_probit",
)

_STREAMS = {"truth": 0, "train": 1, "test": 2, "revenues": 3, "params": 4}

TEST_FRACTION = 0.3
PROBIT_QUANTITY_RATE = 0.6
PROBIT_QMAX = 2


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one synthetic instance. Fields not used by a family are
    ignored; values are sanity-checked, not pinned to the published grids."""

    family: str
    n: int = 10
    k: int = 10                    # ground-truth type count (incl. passive)
    p1: float = 0.5                # passive-consumer probability
    eta: int = 1                   # capacity cap for sampled ground-truth types
    periods: int = 30
    arrivals_per_period: int | None = None
    pd: float = 0.0                # limited_list: per-product deletion probability
    swaps: int = 0                 # limited_list: adjacent-swap event count
    strong: bool = False           # limited_list: keep only intervals of size >= 8
    num_transactions: int | None = None   # limited_list / probit: direct count
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not (0.0 < self.p1 < 1.0):
            raise ValueError("p1 must lie strictly between 0 and 1")
        if self.eta < 1:
            raise ValueError("eta must be at least 1")
        if self.periods < 1:
            raise ValueError("periods must be positive")
        if not (0.0 <= self.pd < 1.0):
            raise ValueError("pd must lie in [0, 1)")
        if self.swaps < 0:
            raise ValueError("swaps must be non-negative")


@dataclass
class GenResult:
    n: int
    truth: ChoiceModel | None
    train: TransactionLog
    test: TransactionLog
    revenues: list[float] | None = None
    probit_params: dict[str, list[float]] | None = None
    train_types: tuple[ConsumerType, ...] = ()
    header_extra: dict[str, Any] = field(default_factory=dict)


def _rng(spec: GenSpec, stream: str) -> np.random.Generator:
    family_id = FAMILIES.index(spec.family) + 1
    key = np.array(
        [spec.seed & 0xFFFFFFFFFFFFFFFF, (family_id << 32) | _STREAMS[stream]],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def _merge_types(types: list[ConsumerType], probs: list[float]) -> ChoiceModel:
    agg: dict[ConsumerType, float] = {}
    for c, p in zip(types, probs):
        agg[c] = agg.get(c, 0.0) + p
    items = list(agg.items())
    total = sum(p for _, p in items)
    return ChoiceModel(
        tuple(c for c, _ in items),
        tuple(p / total for _, p in items),
    )


def _random_ranked_type(rng: np.random.Generator, n: int, eta_cap: int) -> ConsumerType:
    """A uniformly random permutation of {0..n} truncated at the no-purchase
    sentinel, with capacity drawn in [1, eta_cap] but never above the list
    length."""
    perm = rng.permutation(n + 1)
    cut = int(np.flatnonzero(perm == 0)[0])
    sigma = tuple(int(j) for j in perm[:cut])
    if not sigma:
        return PASSIVE
    eta = min(int(rng.integers(1, eta_cap + 1)), len(sigma))
    return ConsumerType(sigma, eta)


def _ranked_truth(spec: GenSpec, rng: np.random.Generator, eta_cap: int) -> ChoiceModel:
    types: list[ConsumerType] = [PASSIVE]
    probs: list[float] = [spec.p1]
    raw = rng.random(spec.k - 1) if spec.k > 1 else np.empty(0)
    z = float(raw.sum()) or 1.0
    for w in raw:
        types.append(_random_ranked_type(rng, spec.n, eta_cap))
        probs.append((1.0 - spec.p1) * float(w) / z)
    return _merge_types(types, probs)


def _sample_offer(rng: np.random.Generator, n: int, lo: int, hi: int) -> tuple[int, ...]:
    lo = max(1, min(lo, n))
    hi = max(lo, min(hi, n))
    size = int(rng.integers(lo, hi + 1))
    products = rng.choice(n, size=size, replace=False) + 1
    return tuple(sorted(int(j) for j in products))


def _sample_log(
    truth: ChoiceModel,
    rng: np.random.Generator,
    n: int,
    periods: int,
    arrivals: int,
    offer_lo: int,
    offer_hi: int,
) -> tuple[TransactionLog, tuple[ConsumerType, ...]]:
    transactions: list[Transaction] = []
    sampled: list[ConsumerType] = []
    probs = np.array(truth.probs)
    for _ in range(periods):
        offer = _sample_offer(rng, n, offer_lo, offer_hi)
        picks = rng.choice(len(truth.types), size=arrivals, p=probs)
        for idx in picks:
            c = truth.types[int(idx)]
            bundle = tuple(sorted(purchase_outcome(c, offer)))
            transactions.append(Transaction(offer, bundle))
            sampled.append(c)
    return TransactionLog(tuple(transactions)), tuple(sampled)


def _test_periods(spec: GenSpec, arrivals: int) -> tuple[int, int]:
    """Number of test periods and the exact test-transaction target
    (ceil of the fraction of the training count)."""
    target = math.ceil(TEST_FRACTION * spec.periods * arrivals)
    return math.ceil(target / arrivals), target


def _trim(log: TransactionLog, count: int) -> TransactionLog:
    return TransactionLog(log.transactions[:count], log.no_arrival_periods)


def gen_single_random(spec: GenSpec) -> GenResult:
    """Single-purchase market over random rankings: a passive consumer with
    probability p1 plus k-1 random permutation types, small offer sets."""
    arrivals = spec.arrivals_per_period or 10
    truth = _ranked_truth(spec, _rng(spec, "truth"), eta_cap=1)
    train, sampled = _sample_log(
        truth, _rng(spec, "train"), spec.n, spec.periods, arrivals, 3, 6)
    test_periods, target = _test_periods(spec, arrivals)
    test, _ = _sample_log(
        truth, _rng(spec, "test"), spec.n, test_periods, arrivals, 3, 6)
    return GenResult(spec.n, truth, train, _trim(test, target), train_types=sampled)


def _structured_type(rng: np.random.Generator, bases: int, levels: int) -> ConsumerType:
    """Random permutation of bases*levels products in which every base's
    cheaper level precedes its pricier ones, truncated at a uniform length."""
    n = bases * levels
    perm = list(rng.permutation(n) + 1)
    for base in range(1, bases + 1):
        ids = [base + bases * lvl for lvl in range(levels)]
        pos = sorted(perm.index(p) for p in ids)
        for where, what in zip(pos, ids):
            perm[where] = what
    cut = int(rng.integers(1, n + 1))
    sigma = tuple(int(j) for j in perm[:cut])
    return ConsumerType(sigma, 1)


def gen_single_structured(spec: GenSpec) -> GenResult:
    """Single-purchase market over 5 base items at 3 price levels (15
    products); rankings always prefer a base item's cheaper level; offers pick
    3..5 base items with one sampled price level each."""
    bases, levels = 5, 3
    n = bases * levels
    arrivals = spec.arrivals_per_period or 10
    rng_truth = _rng(spec, "truth")
    types: list[ConsumerType] = [PASSIVE]
    probs: list[float] = [spec.p1]
    raw = rng_truth.random(spec.k - 1) if spec.k > 1 else np.empty(0)
    z = float(raw.sum()) or 1.0
    for w in raw:
        types.append(_structured_type(rng_truth, bases, levels))
        probs.append((1.0 - spec.p1) * float(w) / z)
    truth = _merge_types(types, probs)

    def sample_block(rng, periods):
        transactions, sampled = [], []
        pvec = np.array(truth.probs)
        for _ in range(periods):
            nbases = int(rng.integers(3, 6))
            chosen = rng.choice(bases, size=nbases, replace=False) + 1
            offer = tuple(sorted(
                int(b + bases * rng.integers(0, levels)) for b in chosen))
            picks = rng.choice(len(truth.types), size=arrivals, p=pvec)
            for idx in picks:
                c = truth.types[int(idx)]
                bundle = tuple(sorted(purchase_outcome(c, offer)))
                transactions.append(Transaction(offer, bundle))
                sampled.append(c)
        return TransactionLog(tuple(transactions)), tuple(sampled)

    train, sampled = sample_block(_rng(spec, "train"), spec.periods)
    test_periods, target = _test_periods(spec, arrivals)
    test, _ = sample_block(_rng(spec, "test"), test_periods)
    return GenResult(n, truth, train, _trim(test, target), train_types=sampled,
                     header_extra={"bases": bases, "levels": levels})


def gen_multipurchase_rankedlist(spec: GenSpec) -> GenResult:
    """Multi-purchase ranked-list market: per-type capacity drawn in
    [1, eta] capped by list length; offers of 5..10 products, 50 arrivals per
    period; unit revenues uniform in [1, 5]."""
    arrivals = spec.arrivals_per_period or 50
    truth = _ranked_truth(spec, _rng(spec, "truth"), eta_cap=spec.eta)
    train, sampled = _sample_log(
        truth, _rng(spec, "train"), spec.n, spec.periods, arrivals, 5, 10)
    test_periods, target = _test_periods(spec, arrivals)
    test, _ = _sample_log(
        truth, _rng(spec, "test"), spec.n, test_periods, arrivals, 5, 10)
    revenues = [float(r) for r in _rng(spec, "revenues").uniform(1.0, 5.0, size=spec.n)]
    return GenResult(spec.n, truth, train, _trim(test, target),
                     revenues=revenues, train_types=sampled)


def _limited_type(rng: np.random.Generator, n: int, pd: float, swaps: int,
                  strong: bool) -> ConsumerType:
    """Quality-interval consideration set: draw [i, j], optionally requiring
    at least 8 products, delete each product with probability pd, then apply
    up to ``swaps`` adjacent-swap events (each firing with probability 0.5)."""
    while True:
        i = int(rng.integers(1, n + 1))
        j = int(rng.integers(i, n + 1))
        if not strong or j - i + 1 >= 8:
            break
    sigma = [p for p in range(i, j + 1) if pd == 0.0 or rng.random() >= pd]
    for _ in range(swaps):
        if rng.random() < 0.5 and len(sigma) >= 2:
            pos = int(rng.integers(1, len(sigma)))
            sigma[pos - 1], sigma[pos] = sigma[pos], sigma[pos - 1]
    if not sigma:
        return PASSIVE
    return ConsumerType(tuple(sigma), 1)


def gen_limited_list(spec: GenSpec) -> GenResult:
    """Limited-consideration-set market: single-purchase types built from
    quality intervals with deletions and local swaps; every product enters
    each offer independently with probability 0.5."""
    T = spec.num_transactions or 5000
    rng_truth = _rng(spec, "truth")
    types = [_limited_type(rng_truth, spec.n, spec.pd, spec.swaps, spec.strong)
             for _ in range(spec.k)]
    raw = rng_truth.random(spec.k)
    truth = _merge_types(types, [float(w) for w in raw])

    def sample_block(rng, count):
        transactions, sampled = [], []
        pvec = np.array(truth.probs)
        picks = rng.choice(len(truth.types), size=count, p=pvec)
        made = 0
        while made < count:
            mask = rng.random(spec.n) < 0.5
            if not mask.any():
                continue
            offer = tuple(int(j) for j in np.flatnonzero(mask) + 1)
            c = truth.types[int(picks[made])]
            bundle = tuple(sorted(purchase_outcome(c, offer)))
            transactions.append(Transaction(offer, bundle))
            sampled.append(c)
            made += 1
        return TransactionLog(tuple(transactions)), tuple(sampled)

    train, sampled = sample_block(_rng(spec, "train"), T)
    test, _ = sample_block(_rng(spec, "test"), math.ceil(TEST_FRACTION * T))
    revenues = [float(r) for r in _rng(spec, "revenues").uniform(1.0, 5.0, size=spec.n)]
    return GenResult(spec.n, truth, train, test, revenues=revenues, train_types=sampled)


def probit_quantity_pmf() -> np.ndarray:
    w = np.exp(PROBIT_QUANTITY_RATE * np.arange(PROBIT_QMAX + 1))
    return w / w.sum()


def gen_multipurchase_probit(spec: GenSpec) -> GenResult:
    """Probit-utility multi-purchase market. Per product: deterministic
    utility V ~ N(3,1), revenue r ~ U(1,5), price sensitivity beta = -|N(0,1)|.
    Per consumer: utility V_j - beta_j r_j + noise for each product, N(0,1)
    for the outside option, an intended quantity in {0..2} with probability
    proportional to exp(0.6 q); the bundle takes offered products in utility
    order until the quantity is hit or the outside option comes first."""
    T = spec.num_transactions or 1000
    n = spec.n
    prng = _rng(spec, "params")
    V = prng.normal(3.0, 1.0, size=n)
    r = prng.uniform(1.0, 5.0, size=n)
    beta = -np.abs(prng.normal(0.0, 1.0, size=n))
    qp = probit_quantity_pmf()
    lo = max(1, math.ceil(n / 3))
    hi = max(lo, n * 2 // 3)
    if n == 5:
        lo = max(lo, 2)

    def sample_block(rng, count):
        transactions = []
        for _ in range(count):
            offer = _sample_offer(rng, n, lo, hi)
            quantity = int(rng.choice(PROBIT_QMAX + 1, p=qp))
            u0 = rng.normal()
            u = V - beta * r + rng.normal(size=n)
            order = np.argsort(-u, kind="stable") + 1  # ties broken by product index
            bundle: list[int] = []
            offered = set(offer)
            for j in order:
                if len(bundle) >= quantity:
                    break
                if u[int(j) - 1] <= u0:
                    break
                if int(j) in offered:
                    bundle.append(int(j))
            transactions.append(Transaction(offer, tuple(sorted(bundle))))
        return TransactionLog(tuple(transactions))

    n_train = math.ceil(0.8 * T)
    train = sample_block(_rng(spec, "train"), n_train)
    test = sample_block(_rng(spec, "test"), T - n_train)
    params = {"V": [float(v) for v in V],
              "beta": [float(b) for b in beta],
              "r": [float(x) for x in r]}
    return GenResult(n, None, train, test,
                     revenues=[float(x) for x in r], probit_params=params)


_GENERATORS = {
    "single_random": gen_single_random,
    "single_structured": gen_single_structured,
    "multipurchase_rankedlist": gen_multipurchase_rankedlist,
    "limited_list": gen_limited_list,
    "multipurchase_probit": gen_multipurchase_probit,
}


def generate(spec: GenSpec) -> GenResult:
    return _GENERATORS[spec.family](spec)


def write_instance_dir(result: GenResult, directory: str | Path, spec: GenSpec) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rcio.dump_header(
        directory / rcio.HEADER_FILE,
        n=result.n,
        no_arrival_periods=result.train.no_arrival_periods,
        family=spec.family,
        seed=spec.seed,
        **result.header_extra,
    )
    rcio.dump_log(result.train, directory / rcio.TRAIN_FILE)
    rcio.dump_log(result.test, directory / rcio.TEST_FILE)
    if result.truth is not None:
        rcio.dump_model(result.truth, directory / rcio.TRUTH_FILE)
    if result.revenues is not None:
        rcio.dump_revenues(result.revenues, directory / rcio.REVENUES_FILE)
    if result.probit_params is not None:
        import json

        with open(directory / rcio.PROBIT_PARAMS_FILE, "w") as fh:
            json.dump(result.probit_params, fh, indent=1)
            fh.write("\n")
