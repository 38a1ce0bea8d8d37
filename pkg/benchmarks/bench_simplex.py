"""Compare the GMP tableau with the pure-Python one.

Times three workloads per backend: random SELL programs, whole divisible
auctions, and improvement programs on engine outputs.  Every workload is
also checked for identical results across backends.

    python3 benchmarks/bench_simplex.py [--instances 40] [--repeat 3]
"""

import argparse
import random
import statistics
import time
from fractions import Fraction as F

from clinch import _kernel
from clinch.divisible import run_divisible
from clinch.lp import SellLP, solve_improvement_lp, solve_sell_lp
from clinch.model import make_instance


def sell_programs(rng, count, n, m):
    out = []
    for _ in range(count):
        kappa = [1] * n
        for _ in range(m - n):
            kappa[rng.randrange(n)] += 1
        alpha = tuple(sorted(F(rng.randint(0, 9), rng.randint(1, 4)) for _ in range(m)))
        # loose demands keep every program feasible; c = 0 lets the LP choose freely
        d = tuple(F(rng.randint(m, 3 * m)) for _ in range(n))
        out.append(SellLP(alpha, tuple(kappa), (F(0),) * n, d, rng.randrange(n)))
    return out


def auctions(rng, count):
    out = []
    for _ in range(count):
        n = rng.randint(3, 4)
        out.append(make_instance([rng.randint(2, 8) for _ in range(n)],
                                 [rng.randint(2, 10) for _ in range(n)],
                                 [F(rng.randint(0, 8), rng.randint(1, 3)) for _ in range(5)],
                                 kappas=[rng.randint(1, 2) for _ in range(n)]))
    return out


def timed(fn, repeat):
    best, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best.append(time.perf_counter() - t0)
    return min(best), statistics.median(best), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    lps = sell_programs(rng, args.instances, 4, 8)
    insts = auctions(rng, max(1, args.instances // 4))
    outputs = [run_divisible(inst)[0] for inst in insts]

    workloads = {
        "SELL programs (4x8)": lambda b: [solve_sell_lp(lp, backend=b).values for lp in lps],
        "divisible auctions": lambda b: [run_divisible(i, backend=b)[0] for i in insts],
        "improvement programs": lambda b: [solve_improvement_lp(i, a, backend=b)
                                           for i, a in zip(insts, outputs)],
    }
    backends = sorted(_kernel.BACKENDS)
    print(f"backends: {', '.join(backends)}   (import default: {_kernel.BACKEND})")
    print(f"{'workload':<24}" + "".join(f"{b + ' best':>14}{b + ' median':>16}" for b in backends)
          + f"{'speedup':>10}")
    for name, work in workloads.items():
        row = f"{name:<24}"
        results, best = {}, {}
        for b in backends:
            lo, med, results[b] = timed(lambda: work(b), args.repeat)
            best[b] = lo
            row += f"{lo:>13.3f}s{med:>15.3f}s"
        if len({repr(r) for r in results.values()}) != 1:
            raise SystemExit(f"backends disagree on {name}")
        if "gmp" in best and "python" in best:
            row += f"{best['python'] / best['gmp']:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
