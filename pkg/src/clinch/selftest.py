"""A quick battery of exact checks, runnable without the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from . import _kernel
from .combinatorial import run_combinatorial
from .divisible import run_divisible
from .lp import SellLP, solve_sell_lp
from .marginal import run_counterexample
from .model import CombinatorialAllocation, Mode, check_legal, make_instance
from .verify import pareto_verdict

F = Fraction


def _one_item(v, b, winner, price):
    inst = make_instance(v, b, [1], interests=[{1}, {1}], mode=Mode.COMBINATORIAL)
    H = [frozenset(), frozenset()]
    p = [F(0), F(0)]
    if winner is not None:
        H[winner] = frozenset({1})
        p[winner] = F(price)
    b_star = tuple(F(b[i]) - p[i] for i in range(2))
    return inst, CombinatorialAllocation(tuple(H), tuple(p), b_star, 1, 1)


def run_selftest():
    out = []

    def check(name, ok, detail=""):
        out.append((name, bool(ok), detail))

    rep = run_counterexample()
    check("misreport demo", rep.branch_a.p == (F(2), F(3, 2)) and rep.gain == F(1, 2),
          f"gain {rep.gain}")

    inst, alloc = _one_item([1, 2], [1, 1], 1, 1)
    check("one item to the high bidder", pareto_verdict(inst, alloc).optimal)
    inst, alloc = _one_item([1, 2], [1, F(1, 2)], 0, 1)
    check("one item to the low bidder, rival short of budget", pareto_verdict(inst, alloc).optimal)
    inst, alloc = _one_item([1, 2], [1, 1], None, 0)
    check("unsold item", not pareto_verdict(inst, alloc).optimal)

    alloc, _ = run_divisible(make_instance([3, 2], [10, 10], [1, 0]))
    check("second-price outcome", alloc.p == (F(2), F(0)) and alloc.capacities == [1, 0])

    lp = SellLP((F(1), F(0)), (1, 1), (F(0), F(0)), (F(100), F(0)), 0)
    values = {name: solve_sell_lp(lp, backend=name).values for name in _kernel.BACKENDS}
    check("tableau backends agree", len(set(values.values())) == 1, ", ".join(sorted(values)))

    rng = random.Random(0)
    ok = True
    for _ in range(20):
        n, m = rng.randint(1, 3), rng.randint(1, 4)
        inst = make_instance([rng.randint(1, 6) for _ in range(n)],
                             [rng.randint(1, 8) for _ in range(n)],
                             [rng.randint(0, 4) for _ in range(m)])
        alloc, _ = run_divisible(inst)
        ok &= bool(check_legal(inst, alloc)) and pareto_verdict(inst, alloc).optimal
    check("random divisible runs legal and optimal", ok)

    inst = make_instance([5, 2], [3, 11], [1], interests=[{1, 2}, {1, 2}], rounds=2,
                         mode=Mode.COMBINATORIAL)
    alloc, _ = run_combinatorial(inst)
    check("two-unit clinching", alloc.p == (F(2), F(3, 2)))
    return out
