"""Early perf probe: EM-style pricing instance at n=15, |T|=1500, eta_max=3."""
import random
import time
from collections import defaultdict

from rankedchoice.model import ConsumerType, PASSIVE, Transaction, purchase_outcome, is_compatible
from rankedchoice.pricing import PricingInstance, solve_pricing, solve_pricing_heuristic


def gen(seed):
    rng = random.Random(seed)
    n, k, eta, periods, arrivals = 15, 25, 3, 30, 50
    types = [PASSIVE]
    probs = [0.2]
    raw = [rng.random() for _ in range(k - 1)]
    z = sum(raw)
    for w in raw:
        perm = list(range(0, n + 1))
        rng.shuffle(perm)
        cut = perm.index(0)
        sigma = tuple(perm[:cut])
        if not sigma:
            types.append(PASSIVE)
        else:
            e = min(rng.randint(1, eta), len(sigma))
            types.append(ConsumerType(sigma, e))
        probs.append(0.8 * w / z)
    # merge duplicates
    agg = defaultdict(float)
    for c, p in zip(types, probs):
        agg[c] += p
    types, probs = zip(*agg.items())
    transactions = []
    for _ in range(periods):
        size = rng.randint(5, 10)
        offer = tuple(sorted(rng.sample(range(1, n + 1), size)))
        for _ in range(arrivals):
            c = rng.choices(types, probs)[0]
            bundle = tuple(sorted(purchase_outcome(c, offer)))
            transactions.append(Transaction(offer, bundle))
    return n, transactions


def main():
    n, transactions = gen(42)
    T = len(transactions)
    # EM initial columns: singletons + passive + coverage
    cols = [PASSIVE] + [ConsumerType((j,), 1) for j in range(1, n + 1)]
    seen = set()
    for t in transactions:
        if t.bundle and t.bundle not in seen:
            seen.add(t.bundle)
            c = ConsumerType(t.bundle, len(t.bundle))
            if c not in cols:
                cols.append(c)
    x = [1.0 / len(cols)] * len(cols)
    # aggregate distinct rows
    counts = defaultdict(int)
    for t in transactions:
        counts[(t.offer, t.bundle)] += 1
    print(f"T={T}, distinct rows={len(counts)}, columns={len(cols)}")
    rows = []
    for (offer, bundle), cnt in sorted(counts.items()):
        tr = Transaction(offer, bundle)
        y = sum(xi for c, xi in zip(cols, x) if is_compatible(c, tr))
        assert y > 0
        rows.append((offer, bundle, cnt / y))
    inst = PricingInstance(n, rows, eta_max=3)
    t0 = time.perf_counter()
    h2 = solve_pricing_heuristic(inst, 2)
    t1 = time.perf_counter()
    print(f"heuristic cap2: profit={h2.best_profit:.3f} gen={h2.labels_generated} in {t1-t0:.2f}s")
    ex = solve_pricing(inst, lb_seed=h2.best_profit, seed_type=h2.best_type)
    t2 = time.perf_counter()
    print(f"exact: profit={ex.best_profit:.3f} gen={ex.labels_generated} "
          f"dom={ex.labels_dominated} cb={ex.labels_bound_pruned} in {t2-t1:.2f}s")
    print(f"threshold |T|={T}, improving={ex.best_profit > T}")


if __name__ == "__main__":
    main()
