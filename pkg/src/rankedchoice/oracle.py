"""Exhaustive ground-truth solver for the pricing subproblem.

Enumerates every duplicate-free ranking (up to the length cap) and every
capacity, scoring each candidate type by the deterministic choice rule alone.
Kept deliberately independent of the labeling solver's bookkeeping so the two
can certify each other: compatibility is decided by counting, along the
ranking prefix, how many offered products fall inside the purchase window and
whether any of them lies outside the transaction's bundle.

Never intended for universes beyond a handful of products; the enumeration
count grows as sum_k n!/(n-k)!.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PASSIVE, ConsumerType
from .pricing import PricingInstance, PricingResult, profit_of_type

TIE_TOL = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    """Guard rails for the enumeration: refuse universes above ``n_limit``;
    optionally override the instance's capacity and length caps."""

    n_limit: int = 8
    eta_max: int | None = None
    q: int | None = None

    def __post_init__(self) -> None:
        if self.n_limit > 9:
            raise ValueError("enumeration beyond 9 products is not supported")


def brute_force_glop(inst: PricingInstance, cfg: OracleConfig | None = None) -> PricingResult:
    """Maximize total reward over all consumer types by depth-first
    enumeration of ranking prefixes.

    Per transaction the walk maintains ``count`` (offered products seen so
    far along the prefix) and, per capacity, ``bad`` (products inside the
    first min(capacity, count) positions that are not in the bundle); the
    type is compatible exactly when bad == 0 and the window size equals the
    bundle size. Ties are broken toward the lexicographically smallest
    (capacity, ranking), the passive type counting as (0, ()). The returned
    profit is recomputed from the winning type by direct compatibility.
    """
    if cfg is None:
        cfg = OracleConfig()
    if inst.n > cfg.n_limit:
        raise ValueError(f"universe size {inst.n} exceeds the oracle limit {cfg.n_limit}")
    if not inst.rows:
        raise ValueError("pricing requires at least one transaction with a non-zero reward")

    n = inst.n
    E = min(cfg.eta_max or inst.eta_max, n)
    q = cfg.q if cfg.q is not None else inst.q
    max_len = n if q is None or q >= n else q

    rows = inst.rows
    T = len(rows)
    bsize_all = np.array([len(r.bundle) for r in rows], dtype=np.int16)
    mu_all = np.array([r.mu for r in rows], dtype=np.float64)

    touch: list[np.ndarray] = [np.empty(0, dtype=np.intp)] * (n + 1)
    good: list[np.ndarray] = [np.empty(0, dtype=bool)] * (n + 1)
    bsz: list[np.ndarray] = [np.empty(0, dtype=np.int16)] * (n + 1)
    mu_sel: list[np.ndarray] = [np.empty(0, dtype=np.float64)] * (n + 1)
    for j in range(1, n + 1):
        idx = [t for t, r in enumerate(rows) if j in r.offer]
        arr = np.array(idx, dtype=np.intp)
        touch[j] = arr
        good[j] = np.array([j in rows[t].bundle for t in idx], dtype=bool)
        bsz[j] = bsize_all[arr]
        mu_sel[j] = mu_all[arr]

    count = np.zeros(T, dtype=np.int16)
    bad = np.zeros((E, T), dtype=np.int16)
    etas_col = np.arange(1, E + 1, dtype=np.int16).reshape(-1, 1)
    profit = np.full(E, inst.empty_bundle_profit, dtype=np.float64)

    best_profit = inst.empty_bundle_profit
    best_key: tuple[int, tuple[int, ...]] = (0, ())

    prefix: list[int] = []
    in_prefix = [False] * (n + 1)

    def apply(j: int, add: bool) -> None:
        idx = touch[j]
        if idx.size == 0:
            return
        g, b, m = good[j], bsz[j], mu_sel[j]
        if add:
            pos = count[idx]
            count[idx] = pos + 1
        else:
            pos = count[idx] - 1
            count[idx] = pos
        before = pos if add else pos + 1
        after = pos + 1 if add else pos
        old_bad = bad[:, idx]
        moved = ~g & (pos < etas_col)  # the appended/removed product sits in the window
        new_bad = old_bad + moved if add else old_bad - moved
        was = (old_bad == 0) & (np.minimum(etas_col, before) == b)
        now = (new_bad == 0) & (np.minimum(etas_col, after) == b)
        flips = was != now
        if flips.any():
            profit[:] += ((now & flips) * m).sum(axis=1) - ((was & flips) * m).sum(axis=1)
        bad[:, idx] = new_bad

    def consider() -> None:
        nonlocal best_profit, best_key
        for e in range(E):
            p = float(profit[e])
            if p > best_profit + TIE_TOL:
                best_profit = p
                best_key = (e + 1, tuple(prefix))
            elif p >= best_profit - TIE_TOL:
                key = (e + 1, tuple(prefix))
                if key < best_key:
                    best_profit = p
                    best_key = key

    def descend() -> None:
        if len(prefix) >= max_len:
            return
        for j in range(1, n + 1):
            if in_prefix[j]:
                continue
            apply(j, True)
            in_prefix[j] = True
            prefix.append(j)
            consider()
            descend()
            prefix.pop()
            in_prefix[j] = False
            apply(j, False)

    descend()
    best_type = ConsumerType(best_key[1], best_key[0]) if best_key[1] else PASSIVE
    return PricingResult(best_type, profit_of_type(inst, best_type), exact=True)
