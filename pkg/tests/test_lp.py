import random
from fractions import Fraction as F

import pytest

from clinch import _kernel
from clinch.errors import EngineInvariantError
from clinch.lp import (LPInfeasible, LPUnbounded, SellLP, simplex,
                       solve_improvement_lp, solve_sell_lp)
from clinch.model import (CombinatorialAllocation, DivisibleAllocation, Mode,
                          make_instance)
from oracles import lp_minimum, rank, vertices

BACKENDS = sorted(_kernel.BACKENDS)


def residuals(A, b, x):
    return [sum(a * xi for a, xi in zip(row, x)) - bv for row, bv in zip(A, b)]


def random_sell_lp(rng, n, m):
    """Feasible by construction: (c, d) are read off a random legal point."""
    kappa = [1] * n
    extra = m - n
    for _ in range(max(0, extra)):
        kappa[rng.randrange(n)] += 1
    m = sum(kappa)
    alpha = tuple(sorted(F(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(m)))
    rows = [i for i in range(n) for _ in range(kappa[i])]
    X = [[F(0)] * m for _ in range(n)]
    for w in (F(1, 3), F(2, 3)):
        perm = list(range(m))
        rng.shuffle(perm)
        for r, j in zip(rows, perm):
            X[r][j] += w
    caps = [sum(a * x for a, x in zip(alpha, row)) for row in X]
    gamma = [cap * F(rng.randint(0, 3), 3) for cap in caps]
    c = tuple(cap - g for cap, g in zip(caps, gamma))
    d = tuple(g + F(rng.randint(0, 2)) for g in gamma)
    return SellLP(alpha, tuple(kappa), c, d, rng.randrange(n))


def test_slack_demands_let_target_avoid():
    sol = solve_sell_lp(SellLP((F(1), F(0)), (1, 1), (F(0), F(0)), (F(100), F(100)), 0))
    assert sol.gamma[0] == 0 and sol.X[0] == (0, 1)


def test_zero_demand_forces_target_onto_real_slot():
    lp = SellLP((F(1), F(0)), (1, 1), (F(0), F(0)), (F(100), F(0)), 0)
    sol = solve_sell_lp(lp)
    assert sol.gamma[0] == 1 and sol.X == ((1, 0), (0, 1))
    # the two integral assignments: only the one giving bidder 2 the dummy fits d_2 = 0
    feasible = [g1 for g1, g2 in ((1, 0), (0, 1)) if g2 <= lp.d[1]]
    assert feasible == [1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_sell_lp_matches_vertex_enumeration(backend):
    rng = random.Random(11)
    checked = 0
    for _ in range(40):
        lp = random_sell_lp(rng, 2, rng.randint(2, 4))
        A, b, cost = lp.standard_form()
        assert len(cost) <= 12
        sol = solve_sell_lp(lp, backend=backend)
        assert sol.objective == lp_minimum(A, b, cost)
        assert all(r == 0 for r in residuals(A, b, sol.values))
        assert min(sol.values) >= 0
        assert sol.values in vertices(A, b)
        checked += 1
    assert checked == 40


def test_backends_agree_on_every_pivot_choice():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    rng = random.Random(5)
    for _ in range(40):
        lp = random_sell_lp(rng, 3, rng.randint(3, 5))
        sols = [solve_sell_lp(lp, backend=b) for b in BACKENDS]
        assert len({(s.values, s.basis) for s in sols}) == 1


@pytest.mark.parametrize("backend", BACKENDS)
def test_generic_simplex_against_enumeration(backend):
    rng = random.Random(8)
    for _ in range(80):
        rows, cols = rng.randint(1, 3), rng.randint(2, 5)
        A = [[F(rng.randint(-2, 3)) for _ in range(cols)] for _ in range(rows)]
        b = [F(rng.randint(0, 4)) for _ in range(rows)]
        # bound the region so the oracle's minimum is the true one
        A.append([F(1)] * cols + [F(1)])
        for row in A[:-1]:
            row.append(F(0))
        b.append(F(5))
        cost = [F(rng.randint(-3, 3)) for _ in range(cols + 1)]
        expect = lp_minimum(A, b, cost)
        if expect is None:
            with pytest.raises(LPInfeasible):
                simplex(A, b, cost, backend=backend)
            continue
        sol = simplex(A, b, cost, backend=backend)
        assert sol.objective == expect
        assert all(r == 0 for r in residuals(A, b, sol.x))


def test_unbounded_program():
    with pytest.raises(LPUnbounded):
        simplex([[F(1), F(-1)]], [F(1)], [F(0), F(-1)])


def test_redundant_rows_are_tolerated():
    A = [[1, 1, 0], [1, 1, 0], [0, 1, 1]]
    b = [2, 2, 1]
    sol = simplex(A, b, [1, 0, 0])
    assert rank(A) == 2 and sol.objective == 1 and residuals(A, b, sol.x) == [0, 0, 0]


def test_sell_lp_infeasible_is_engine_error():
    with pytest.raises(EngineInvariantError, match="SELL program"):
        solve_sell_lp(SellLP((F(1), F(0)), (1, 1), (F(2), F(0)), (F(0), F(0)), 0))


def _one_item(b, winner, price):
    inst = make_instance([1, 2], b, [1], interests=[{1}, {1}], mode=Mode.COMBINATORIAL)
    H = [frozenset(), frozenset()]
    p = [F(0), F(0)]
    if winner is not None:
        H[winner] = frozenset({1})
        p[winner] = F(price)
    return inst, CombinatorialAllocation(tuple(H), tuple(p),
                                         tuple(F(b[i]) - p[i] for i in range(2)), 1, 1)


def test_improvement_item_to_high_bidder():
    assert solve_improvement_lp(*_one_item([1, 1], 1, 1)) == 0


def test_improvement_item_to_low_bidder_blocked_by_budget():
    assert solve_improvement_lp(*_one_item([1, F(1, 2)], 0, 1)) == 0


def test_improvement_unsold_item():
    assert solve_improvement_lp(*_one_item([1, 1], None, 0)) > 0


def test_divisible_relaxation_of_low_bidder_example():
    # as a divisible allocation the same outcome is not optimal: bidder 2 can
    # buy half the item from bidder 1 at any unit price in (1, 2)
    inst = make_instance([1, 2], [1, F(1, 2)], [1])
    alloc = DivisibleAllocation(((F(1),), (F(0),)), (F(1), F(0)), (F(1),))
    assert solve_improvement_lp(inst, alloc) == F(1, 2)


def test_divisible_gain_of_swapped_slots():
    inst = make_instance([3, 1], [10, 10], [1, 0])
    bad = DivisibleAllocation(((F(0), F(1)), (F(1), F(0))), (F(0), F(0)), (F(1), F(0)))
    good = DivisibleAllocation(((F(1), F(0)), (F(0), F(1))), (F(0), F(0)), (F(1), F(0)))
    assert solve_improvement_lp(inst, bad) == 2
    assert solve_improvement_lp(inst, good) == 0
