"""Scratch cross-check: DP vs oracle on random signed instances."""
import random
import time

from rankedchoice.oracle import OracleConfig, brute_force_glop
from rankedchoice.pricing import PricingInstance, solve_pricing, profit_of_type


def random_instance(rng, n_max=7, t_max=30, eta_max=3):
    n = rng.randint(2, n_max)
    T = rng.randint(1, t_max)
    rows = []
    for _ in range(T):
        size = rng.randint(1, n)
        offer = rng.sample(range(1, n + 1), size)
        bsize = rng.randint(0, size)
        bundle = rng.sample(offer, bsize)
        rows.append((offer, bundle, rng.uniform(-1, 1)))
    eta = rng.randint(1, eta_max)
    q = rng.choice([2, n])
    return PricingInstance(n, rows, eta_max=eta, q=q)


def main():
    rng = random.Random(12345)
    t0 = time.perf_counter()
    bad = 0
    for i in range(200):
        inst = random_instance(rng)
        ora = brute_force_glop(inst)
        dp = solve_pricing(inst)
        ok = abs(ora.best_profit - dp.best_profit) <= 1e-9
        replay = abs(profit_of_type(inst, dp.best_type) - dp.best_profit) <= 1e-9
        if not (ok and replay):
            bad += 1
            print(f"[{i}] MISMATCH n={inst.n} T={inst.num_rows} eta={inst.eta_max} q={inst.q}")
            print(f"    oracle {ora.best_profit:.12f} {ora.best_type}")
            print(f"    dp     {dp.best_profit:.12f} {dp.best_type} replay_ok={replay}")
            if bad > 3:
                break
    print(f"done in {time.perf_counter()-t0:.2f}s, mismatches={bad}")


if __name__ == "__main__":
    main()
