import random
import time
from itertools import product

from rankedchoice.oracle import brute_force_glop
from rankedchoice.pricing import PricingInstance, solve_pricing, profit_of_type
from scratch_check import random_instance


def main():
    rng = random.Random(777)
    t0 = time.perf_counter()
    bad = 0
    n_combo_checked = 0
    for i in range(400):
        inst = random_instance(rng)
        ora = brute_force_glop(inst)
        dp = solve_pricing(inst)
        if abs(ora.best_profit - dp.best_profit) > 1e-9:
            print(f"[{i}] exact mismatch {ora.best_profit} vs {dp.best_profit}")
            bad += 1
        if abs(profit_of_type(inst, dp.best_type) - dp.best_profit) > 1e-9:
            print(f"[{i}] replay mismatch")
            bad += 1
        # toggles
        if i % 4 == 0:
            n_combo_checked += 1
            for cb, un in product([True, False], repeat=2):
                r = solve_pricing(inst, use_completion_bounds=cb, use_unreachable=un)
                if abs(r.best_profit - ora.best_profit) > 1e-9:
                    print(f"[{i}] toggle cb={cb} un={un} mismatch")
                    bad += 1
            r = solve_pricing(inst, use_dominance=False)
            if abs(r.best_profit - ora.best_profit) > 1e-9:
                print(f"[{i}] no-dominance mismatch")
                bad += 1
        # heuristic lower bound property
        for cap in (1, 2, 5):
            h = solve_pricing(inst, bucket_cap=cap)
            if h.best_profit > ora.best_profit + 1e-9:
                print(f"[{i}] heuristic cap={cap} EXCEEDS exact")
                bad += 1
            if abs(profit_of_type(inst, h.best_type) - h.best_profit) > 1e-9:
                print(f"[{i}] heuristic replay mismatch")
                bad += 1
        # single-purchase simplified dominance
        if inst.eta_max == 1 or i % 3 == 0:
            inst1 = PricingInstance(inst.n, [(r.offer, r.bundle, r.mu) for r in inst.rows],
                                    eta_max=1, q=inst.q)
            o1 = brute_force_glop(inst1)
            s1 = solve_pricing(inst1, single_purchase_dominance=True)
            if abs(o1.best_profit - s1.best_profit) > 1e-9:
                print(f"[{i}] single-purchase simplified mismatch {o1.best_profit} vs {s1.best_profit}")
                bad += 1
    print(f"done in {time.perf_counter()-t0:.2f}s, failures={bad}, combos_checked={n_combo_checked}")


if __name__ == "__main__":
    main()
