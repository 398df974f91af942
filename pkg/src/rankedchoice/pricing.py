"""Exact labeling dynamic program for the column-generation subproblem.

The subproblem asks for the ranked list (and purchase capacity) collecting the
maximum total reward over signed per-transaction rewards, where a reward is
collected exactly when the encoded consumer type is compatible with the
transaction. States are partial rankings; each label tracks, per transaction,
how far the ranking has progressed toward (or away from) compatibility.

Status codes per transaction: -1 means the transaction is closed (its reward
can no longer be gained or lost); values 0..eta-1 count bundle coincidences so
far. A transaction whose status has reached the bundle size currently
contributes its reward; appending an offered-but-not-purchased product while
in that range withdraws it and closes the transaction.

Supported accelerations, each individually removable without changing the
optimum: pairwise dominance, completion bounds against the incumbent,
frozen ("unreachable") products, and a bucket-pruned heuristic mode that caps
labels per (last product, length, capacity) state.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .model import PASSIVE, ConsumerType, Transaction, is_compatible

FLOAT_TOL = 1e-9

MAX_UNIVERSE = 62  # product sets are stored as int64 bitmasks


@dataclass(frozen=True)
class PricingRow:
    """One transaction of a pricing instance: offer, bundle, signed reward."""

    offer: tuple[int, ...]
    bundle: tuple[int, ...]
    mu: float


class PricingInstance:
    """Immutable pricing problem: rewarded transactions plus search limits.

    Rows with zero reward are dropped on construction (they cannot affect any
    ranking's total). ``eta_max`` caps the capacity of generated types,
    ``q`` (optional) caps the ranking length, and ``bucket_cap`` selects the
    heuristic mode when set.
    """

    def __init__(
        self,
        n: int,
        transactions: Iterable[tuple[Iterable[int], Iterable[int], float] | PricingRow],
        eta_max: int | None = None,
        q: int | None = None,
        bucket_cap: int | None = None,
    ):
        if not (1 <= n <= MAX_UNIVERSE):
            raise ValueError(f"universe size must be within 1..{MAX_UNIVERSE}, got {n}")
        rows: list[PricingRow] = []
        for item in transactions:
            if not isinstance(item, PricingRow):
                offer, bundle, mu = item
                item = PricingRow(tuple(sorted(offer)), tuple(sorted(bundle)), float(mu))
            if item.mu == 0.0:
                continue
            if not set(item.bundle) <= set(item.offer):
                raise ValueError("bundle must be contained in its offer")
            if not item.offer or max(item.offer) > n:
                raise ValueError("offers must be non-empty subsets of 1..n")
            rows.append(item)
        self.n = n
        self.rows = tuple(rows)
        self.eta_max = n if eta_max is None else min(int(eta_max), n)
        if self.eta_max < 1:
            raise ValueError("eta_max must be at least 1")
        self.q = None if q is None or q >= n else int(q)
        if self.q is not None and self.q < 1:
            raise ValueError("list-length cap must be at least 1")
        self.bucket_cap = bucket_cap
        self._build_arrays()

    def _build_arrays(self) -> None:
        T = len(self.rows)
        n = self.n
        self.mu = np.array([r.mu for r in self.rows], dtype=np.float64)
        self.bsize = np.array([len(r.bundle) for r in self.rows], dtype=np.int16)
        self.in_bundle = np.zeros((n, T), dtype=bool)
        self.in_rejected = np.zeros((n, T), dtype=bool)
        for t, row in enumerate(self.rows):
            bundle = set(row.bundle)
            for j in row.offer:
                (self.in_bundle if j in bundle else self.in_rejected)[j - 1, t] = True
        self.is_neg = self.mu < 0.0
        self.is_pos = self.mu > 0.0
        self.mu_neg = np.where(self.is_neg, self.mu, 0.0)
        self.mu_pos = np.where(self.is_pos, self.mu, 0.0)
        # blocker matrix for the frozen-product rule: a product stays live
        # while any transaction bundling it, or any negatively rewarded
        # transaction offering-but-not-bundling it, is still open
        self.blockers = self.in_bundle | (self.in_rejected & self.is_neg)
        self.blockers_t = self.blockers.T.astype(np.uint8)
        self._bits = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
        self.empty_bundle_profit = float(self.mu[self.bsize == 0].sum())

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "eta_max": self.eta_max,
            "q": self.q,
            "transactions": [
                {"offer": list(r.offer), "bundle": list(r.bundle), "mu": r.mu}
                for r in self.rows
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PricingInstance":
        return cls(
            int(data["n"]),
            [(r["offer"], r.get("bundle", ()), r["mu"]) for r in data["transactions"]],
            eta_max=data.get("eta_max"),
            q=data.get("q"),
        )


class Label:
    """A partial ranking state: last product, used-product mask, capacity,
    accumulated profit, per-transaction status vector, length, frozen-product
    mask and a parent pointer for reconstructing the ranking."""

    __slots__ = ("last", "used", "eta", "profit", "status", "length",
                 "frozen", "parent", "ub", "pruned")

    def __init__(self, last, used, eta, profit, status, length, frozen, parent):
        self.last = last
        self.used = used
        self.eta = eta
        self.profit = profit
        self.status = status
        self.length = length
        self.frozen = frozen
        self.parent = parent
        self.ub = 0.0
        self.pruned = False

    def ranking(self) -> tuple[int, ...]:
        out: list[int] = []
        node: Label | None = self
        while node is not None and node.last:
            out.append(node.last)
            node = node.parent
        return tuple(reversed(out))

    def consumer_type(self) -> ConsumerType:
        sigma = self.ranking()
        return ConsumerType(sigma, self.eta) if sigma else PASSIVE

    def __repr__(self) -> str:
        return (f"Label(sigma={self.ranking()}, eta={self.eta}, "
                f"profit={self.profit:.6g})")


def _frozen_mask(inst: PricingInstance, status: np.ndarray, used: int) -> int:
    open_rows = status >= 0
    live = (inst.blockers & open_rows).any(axis=1)
    frozen = int(inst._bits[~live].sum())
    return frozen & ~used


def _extend_core(inst: PricingInstance, status: np.ndarray, profit: float,
                 eta: int, J: np.ndarray):
    """Vectorized status/profit/bound updates for extending one label by every
    product in ``J`` (zero-based) at once. Returns per-child status rows,
    profits and completion bounds."""
    open_mask = status >= 0
    hit_rej = inst.in_rejected[J] & open_mask
    hit_bun = inst.in_bundle[J] & open_mask
    withdrawn = hit_rej & (status >= inst.bsize)
    stepped = status + hit_bun
    collected = hit_bun & (stepped == inst.bsize)
    closing = hit_bun & (stepped == eta)
    new_status = np.where(hit_rej | closing, np.int8(-1), stepped).astype(np.int8)
    profits = profit - withdrawn @ inst.mu + collected @ inst.mu
    open2 = new_status >= 0
    coll2 = new_status >= inst.bsize
    ubs = profits + (open2 & ~coll2) @ inst.mu_pos - coll2 @ inst.mu_neg
    return new_status, profits, ubs


def completion_bound(label: Label, inst: PricingInstance) -> float:
    """Optimistic bound on any completion: current profit plus all open
    positive rewards plus recovery of all currently collected negatives."""
    st = label.status
    gain = inst.mu_pos[(st >= 0) & (st < inst.bsize)].sum()
    recover = inst.mu_neg[st >= inst.bsize].sum()
    return label.profit + float(gain) - float(recover)


def completion_bound_prune(label: Label, lb: float, inst: PricingInstance) -> bool:
    """True when no completion of ``label`` can beat the incumbent ``lb``."""
    return completion_bound(label, inst) <= lb


def init_labels(inst: PricingInstance, use_unreachable: bool = True) -> list[Label]:
    """One empty-ranking root per capacity 1..eta_max. Rewards of empty-bundle
    transactions are collected upfront; bundles larger than the capacity are
    closed immediately."""
    roots = []
    for eta in range(1, inst.eta_max + 1):
        status = np.where(inst.bsize <= eta, 0, -1).astype(np.int8)
        frozen = _frozen_mask(inst, status, 0) if use_unreachable else 0
        root = Label(0, 0, eta, inst.empty_bundle_profit, status, 0, frozen, None)
        root.ub = completion_bound(root, inst)
        roots.append(root)
    return roots


def extend(label: Label, j: int, inst: PricingInstance,
           use_unreachable: bool = True) -> Label:
    """Append product ``j`` to the ranking encoded by ``label``.

    Status/profit updates: appending an offered-but-rejected product withdraws
    the reward if currently collected and closes the transaction; appending a
    bundled product advances the coincidence count, collecting the reward when
    the bundle completes and closing once the capacity is exhausted.
    """
    bit = 1 << (j - 1)
    if bit & (label.used | label.frozen):
        raise ValueError(f"product {j} is not extendable from this label")
    if inst.q is not None and label.length >= inst.q:
        raise ValueError("ranking length cap reached")
    status, profits, ubs = _extend_core(
        inst, label.status, label.profit, label.eta,
        np.array([j - 1], dtype=np.intp))
    used = label.used | bit
    frozen = _frozen_mask(inst, status[0], used) if use_unreachable else 0
    out = Label(j, used, label.eta, float(profits[0]), status[0],
                label.length + 1, frozen, label)
    out.ub = float(ubs[0])
    return out


def extend_all(label: Label, inst: PricingInstance,
               use_unreachable: bool = True) -> list[Label]:
    """All legal one-product extensions of ``label``, in product order."""
    if inst.q is not None and label.length >= inst.q:
        return []
    blocked = label.used | (label.frozen if use_unreachable else 0)
    products = [j for j in range(1, inst.n + 1) if not blocked >> (j - 1) & 1]
    if not products:
        return []
    J = np.array(products, dtype=np.intp) - 1
    status, profits, ubs = _extend_core(inst, label.status, label.profit, label.eta, J)
    if use_unreachable:
        alive = (status >= 0).astype(np.uint8) @ inst.blockers_t
        frozen_rows = [int(inst._bits[row == 0].sum()) for row in alive]
    else:
        frozen_rows = [0] * len(products)
    out = []
    for i, j in enumerate(products):
        used = label.used | (1 << (j - 1))
        child = Label(j, used, label.eta, float(profits[i]), status[i],
                      label.length + 1, frozen_rows[i] & ~used, label)
        child.ub = float(ubs[i])
        out.append(child)
    return out


def unreachable_update(label: Label, inst: PricingInstance) -> int:
    """Bitmask of products that can never again improve this label's profit
    (bit j-1 set for product j). Monotone along extension chains."""
    return _frozen_mask(inst, label.status, label.used)


def _delta(inst: PricingInstance, k_gain: np.ndarray, k_lose: np.ndarray,
           eta_lose: np.ndarray | int, mu_signed: np.ndarray):
    """Worst-case reward swing in favour of discarding: rewards that future
    common extensions may add to the gaining label and/or subtract from the
    losing one. ``k_gain``/``k_lose`` may be a vector (one label) or a matrix
    (a stored batch); shapes broadcast."""
    b = inst.bsize
    gain_open = (k_gain >= 0) & (k_gain < b)
    lose_coll = k_lose >= b
    both = gain_open & lose_coll & ((eta_lose - k_lose + k_gain) > b)
    one_a = gain_open & ((k_lose == -1) | lose_coll) & ~both
    one_b = lose_coll & (k_gain < b) & ~both
    # strictly-ahead open progress: the lagging side can never catch up (its
    # missing coincidences are locked inside the leading side's used set), so
    # the reward is reachable by the leading side alone
    ahead = gain_open & (k_lose >= 0) & (k_lose < k_gain)
    single = one_a | one_b | ahead
    return 2.0 * (both * mu_signed).sum(axis=-1) + (single * mu_signed).sum(axis=-1)


def dominates(label: Label, other: Label, inst: PricingInstance,
              use_unreachable: bool = True, profit_only: bool = False) -> bool:
    """True when every completion of ``other`` applied to ``label`` yields at
    least the same total profit, so ``other`` may be discarded.

    Only labels of equal capacity are comparable: with unequal capacities a
    transaction whose bundle size matches the smaller capacity closes for
    good when collected, while it stays exposed to future withdrawal for the
    larger one, an asymmetry the status vectors cannot express. The profit
    test charges ``label`` for every reward a common completion could add
    only to ``other`` or subtract only from ``label``, in the worst case.
    ``profit_only`` drops the used-product containment test (valid for
    capacity-1 search); a finite length cap additionally requires the
    dominating label to be no longer than the dominated one.
    """
    if label.eta != other.eta:
        return False
    if inst.q is not None and label.length > other.length:
        return False
    if not profit_only:
        lhs = label.used | (label.frozen if use_unreachable else 0)
        rhs = other.used | (other.frozen if use_unreachable else 0)
        if lhs & ~rhs:
            return False
    ka = label.status.astype(np.int16)
    kb = other.status.astype(np.int16)
    d_minus = float(_delta(inst, ka, kb, other.eta, inst.mu_neg))
    d_plus = float(_delta(inst, kb, ka, label.eta, inst.mu_pos))
    return label.profit + d_minus - d_plus >= other.profit - FLOAT_TOL


@dataclass
class PricingResult:
    """Outcome of one pricing solve."""

    best_type: ConsumerType
    best_profit: float
    labels_generated: int = 0
    labels_dominated: int = 0
    labels_bound_pruned: int = 0
    labels_bucket_pruned: int = 0
    wall_time: float = 0.0
    exact: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "sigma": list(self.best_type.sigma),
            "eta": self.best_type.eta,
            "profit": self.best_profit,
            "labels_generated": self.labels_generated,
            "labels_dominated": self.labels_dominated,
            "labels_bound_pruned": self.labels_bound_pruned,
            "labels_bucket_pruned": self.labels_bucket_pruned,
            "wall_time": self.wall_time,
            "exact": self.exact,
        }


def profit_of_type(inst: PricingInstance, consumer: ConsumerType) -> float:
    """Total reward of a concrete consumer type, by direct compatibility."""
    return sum(
        row.mu for row in inst.rows
        if is_compatible(consumer, Transaction(row.offer, row.bundle))
    )


class _EtaStore:
    """Flat store of processed labels of one capacity: status rows plus the
    profit/length/signature columns needed to batch the dominance test."""

    __slots__ = ("statuses", "profits", "lengths", "sigs", "count")

    def __init__(self, width: int):
        cap = 64
        self.statuses = np.empty((cap, width), dtype=np.int8)
        self.profits = np.empty(cap, dtype=np.float64)
        self.lengths = np.empty(cap, dtype=np.int32)
        self.sigs = np.empty(cap, dtype=np.int64)
        self.count = 0

    def add(self, label: Label, sig: int) -> None:
        if self.count == len(self.profits):
            grow = 2 * len(self.profits)
            self.statuses = np.resize(self.statuses, (grow, self.statuses.shape[1]))
            self.profits = np.resize(self.profits, grow)
            self.lengths = np.resize(self.lengths, grow)
            self.sigs = np.resize(self.sigs, grow)
        i = self.count
        self.statuses[i] = label.status
        self.profits[i] = label.profit
        self.lengths[i] = label.length
        self.sigs[i] = sig
        self.count += 1

    def any_dominates(self, inst: PricingInstance, label: Label, sig: int,
                      profit_only: bool) -> bool:
        m = self.count
        if m == 0:
            return False
        # dominating labels need at least the incoming profit (the delta
        # terms can only work against them) and a contained signature
        mask = self.profits[:m] >= label.profit - FLOAT_TOL
        if not profit_only:
            mask &= (self.sigs[:m] & ~np.int64(sig)) == 0
        if inst.q is not None:
            mask &= self.lengths[:m] <= label.length
        if not mask.any():
            return False
        idx = np.flatnonzero(mask)
        K = self.statuses[idx].astype(np.int16)
        kn = label.status.astype(np.int16)
        d_minus = _delta(inst, K, kn, label.eta, inst.mu_neg)
        d_plus = _delta(inst, kn, K, label.eta, inst.mu_pos)
        return bool((self.profits[idx] + d_minus - d_plus
                     >= label.profit - FLOAT_TOL).any())


class _DominanceStore:
    """Processed labels partitioned by capacity; an incoming label is tested
    against stored labels of its own capacity whose used|frozen signature is
    contained in its own (signature test dropped in profit-only mode)."""

    def __init__(self, width: int, profit_only: bool):
        self.width = width
        self.profit_only = profit_only
        self.by_eta: dict[int, _EtaStore] = {}

    def add(self, label: Label, sig: int) -> None:
        store = self.by_eta.get(label.eta)
        if store is None:
            store = self.by_eta[label.eta] = _EtaStore(self.width)
        store.add(label, sig)

    def is_dominated(self, inst: PricingInstance, label: Label, sig: int) -> bool:
        store = self.by_eta.get(label.eta)
        if store is None:
            return False
        return store.any_dominates(inst, label, sig, self.profit_only)


def solve_pricing(
    inst: PricingInstance,
    lb_seed: float | None = None,
    seed_type: ConsumerType | None = None,
    *,
    bucket_cap: int | None = None,
    use_completion_bounds: bool = True,
    use_unreachable: bool = True,
    use_dominance: bool = True,
    single_purchase_dominance: bool = False,
    queue_discipline: str = "best",
) -> PricingResult:
    """Run the labeling search and return the best consumer type found.

    In exact mode (``bucket_cap`` None) the returned profit is the maximum
    over all types with capacity <= eta_max and ranking length <= q. A
    ``lb_seed`` initializes the incumbent bound for completion pruning; pass
    ``seed_type`` alongside when the seeding type is in hand, otherwise the
    seed is slackened by a tolerance so optimal ties survive pruning.
    """
    start = time.perf_counter()
    if not inst.rows:
        raise ValueError("pricing requires at least one transaction with a non-zero reward")
    if single_purchase_dominance and inst.eta_max != 1:
        raise ValueError("the simplified dominance applies only when eta_max is 1")
    if queue_discipline not in ("best", "fifo", "lifo"):
        raise ValueError(f"unknown queue discipline {queue_discipline!r}")
    if bucket_cap is None:
        bucket_cap = inst.bucket_cap
    if bucket_cap is not None and bucket_cap < 1:
        raise ValueError("bucket_cap must be at least 1")

    best_type = PASSIVE
    best_profit = inst.empty_bundle_profit
    lb = best_profit
    if seed_type is not None:
        seed_profit = profit_of_type(inst, seed_type)
        if seed_profit > best_profit:
            best_type, best_profit = seed_type, seed_profit
            lb = seed_profit
    if lb_seed is not None and seed_type is None:
        # no type in hand: keep equal-valued completions alive
        lb = max(lb, lb_seed - FLOAT_TOL)
    elif lb_seed is not None:
        lb = max(lb, lb_seed)

    store = _DominanceStore(inst.num_rows, single_purchase_dominance)
    buckets: dict[tuple[int, int, int], list[Label]] = {}
    result = PricingResult(best_type, best_profit, exact=bucket_cap is None)

    heap: list[tuple[float, int, Label]] = []
    seq = 0

    def priority(label: Label) -> float:
        if queue_discipline == "best":
            return -label.ub
        return float(seq if queue_discipline == "fifo" else -seq)

    def bucket_admit(label: Label) -> bool:
        if bucket_cap is None:
            return True
        key = (label.last, label.length, label.eta)
        kept = buckets.setdefault(key, [])
        if len(kept) < bucket_cap:
            kept.append(label)
            return True
        worst = min(range(len(kept)), key=lambda i: kept[i].ub)
        if label.ub <= kept[worst].ub:
            result.labels_bucket_pruned += 1
            return False
        kept[worst].pruned = True
        kept[worst] = label
        result.labels_bucket_pruned += 1
        return True

    for root in init_labels(inst, use_unreachable):
        result.labels_generated += 1
        if root.profit > best_profit:
            best_type, best_profit = root.consumer_type(), root.profit
            lb = max(lb, best_profit)
        if bucket_admit(root):
            heapq.heappush(heap, (priority(root), seq, root))
            seq += 1

    while heap:
        _, _, label = heapq.heappop(heap)
        if label.pruned:
            continue
        if use_completion_bounds and label.ub <= lb:
            result.labels_bound_pruned += 1
            continue
        sig = label.used | (label.frozen if use_unreachable else 0)
        if use_dominance:
            if store.is_dominated(inst, label, sig):
                result.labels_dominated += 1
                continue
            store.add(label, sig)
        for child in extend_all(label, inst, use_unreachable):
            result.labels_generated += 1
            if child.profit > best_profit:
                best_type, best_profit = child.consumer_type(), child.profit
                lb = max(lb, best_profit)
            if use_completion_bounds and child.ub <= lb:
                result.labels_bound_pruned += 1
                continue
            if bucket_admit(child):
                heapq.heappush(heap, (priority(child), seq, child))
                seq += 1

    result.best_type = best_type
    result.best_profit = best_profit
    result.wall_time = time.perf_counter() - start
    return result


def solve_pricing_heuristic(inst: PricingInstance, bucket_cap: int, **kwargs) -> PricingResult:
    """Bucket-pruned labeling: identical loop to the exact solver but at most
    ``bucket_cap`` labels survive per (last product, length, capacity) state.
    Returns a feasible type whose profit is a lower bound on the optimum."""
    if bucket_cap < 1:
        raise ValueError("bucket_cap must be at least 1")
    return solve_pricing(inst, bucket_cap=bucket_cap, **kwargs)
