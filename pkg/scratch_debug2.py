import random
from itertools import product

from rankedchoice.oracle import brute_force_glop
from rankedchoice.pricing import PricingInstance, solve_pricing
from scratch_check import random_instance


def main():
    rng = random.Random(12345)
    insts = [random_instance(rng) for _ in range(59)]
    inst = insts[58]
    print("rows:")
    for r in inst.rows:
        print("   ", r)
    print("eta_max", inst.eta_max, "q", inst.q)
    ora = brute_force_glop(inst)
    print("oracle", ora.best_profit, ora.best_type)
    for cb, un, dom in product([True, False], repeat=3):
        dp = solve_pricing(inst, use_completion_bounds=cb, use_unreachable=un,
                           use_dominance=dom)
        flag = "OK " if abs(dp.best_profit - ora.best_profit) <= 1e-9 else "BAD"
        print(f"cb={cb} unreach={un} dom={dom}: {flag} {dp.best_profit:.12f} "
              f"{dp.best_type} gen={dp.labels_generated}")


if __name__ == "__main__":
    main()
