import random
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from clinch.combinatorial import (demand, demand_plus, init_comb_state,
                                  next_price, run_combinatorial, sell_to_set)
from clinch.flow import assigned_excluding
from clinch.model import Mode, check_legal, make_instance
from clinch.trace import AuctionTrace, DemandUpdated, PriceRaised
from clinch.verify import find_trading_path, simple_trading_paths
from corpus import combinatorial_corpus, random_combinatorial


def test_demand_formula():
    assert demand(3, 2, F(2), 3, F(5)) == 2
    assert demand(3, 2, F(4), 3, F(5)) == 0
    assert demand(3, 2, F(0), 3, F(5)) == 2
    assert demand(3, 5, F(0), 3, F(1)) == 3


def test_demand_right_limit():
    assert demand(3, 5, F(2), 5, F(4)) == 2
    assert demand_plus(3, 5, F(2), 5, F(4)) == 1
    assert demand_plus(3, 5, F(2), 5, F(5)) == demand(3, 5, F(2), 5, F(5)) == 2
    assert demand_plus(3, 5, F(3), 5, F(100)) == 0


def _state(v, b, rounds, interests, price):
    inst = make_instance(v, b, [1], interests=interests, rounds=rounds, mode=Mode.COMBINATORIAL)
    st_ = init_comb_state(inst)
    st_.price = F(price)
    return st_


def test_next_price_budget_breakpoints():
    st_ = _state([9, 9], [4, 6], 3, [{1, 2, 3}, {1, 2, 3}], 1)
    pi = next_price(st_)
    assert pi == F(4, 3)
    assert any(st_.D(i, pi) != st_.D_plus(i, pi) for i in range(2))
    # no demand change strictly between the current price and the breakpoint
    grid = [F(1) + (pi - 1) * F(k, 50) for k in range(1, 50)]
    for q in grid:
        assert all(st_.D(i, q) == st_.D_plus(i, q) == st_.D(i, grid[0]) for i in range(2))


def test_next_price_scan_random():
    rng = random.Random(3)
    for _ in range(100):
        n, R = rng.randint(1, 3), rng.randint(1, 3)
        st_ = _state([rng.randint(1, 6) for _ in range(n)], [rng.randint(1, 8) for _ in range(n)],
                     R, [set(range(1, R + 1))] * n, F(rng.randint(0, 8), rng.randint(1, 3)))
        pi = next_price(st_)
        if pi is None:
            assert all(st_.D_plus(i) == 0 for i in range(n))
            continue
        assert pi > st_.price
        assert any(st_.D(i, pi) != st_.D_plus(i, pi) for i in range(n))
        for k in range(1, 20):
            q = st_.price + (pi - st_.price) * F(k, 20)
            assert all(st_.D(i, q) == st_.D_plus(i, q) for i in range(n))


def test_next_price_single_valuation_left():
    st_ = _state([3], [100], 1, [{1}], 2)
    assert next_price(st_) == 3


def test_sell_to_set_no_forced_sale():
    st_ = _state([3, 3], [5, 5], 1, [{1}, {1}], 1)
    assert sell_to_set(st_, {0}, AuctionTrace()) == 0


def test_sell_to_set_lone_bidder():
    st_ = _state([3, 3], [5, 5], 1, [{1}, {1}], 1)
    st_.gone.add(1)
    trace = AuctionTrace()
    assert sell_to_set(st_, {0}, trace) == 1
    assert st_.won[0] == {1} and st_.budget[0] == 4


def test_sell_to_set_postcondition_in_runs(monkeypatch):
    # checked on every call the auction makes, where its precondition holds
    from clinch import combinatorial
    original = combinatorial.sell_to_set
    calls = []

    def checked(state, S, trace):
        sold = original(state, S, trace)
        if S and state.t_bar:
            assert assigned_excluding(state.graph(), set(S)) >= state.t_bar
        calls.append(sold)
        return sold

    monkeypatch.setattr(combinatorial, "sell_to_set", checked)
    for inst in combinatorial_corpus(60, seed=21):
        combinatorial.run_combinatorial(inst)
    assert calls and any(calls)


def test_single_bidder_wins_everything_free():
    inst = make_instance([4], [3], [1], interests=[{1, 2, 3}], rounds=3, mode=Mode.COMBINATORIAL)
    alloc, _ = run_combinatorial(inst)
    assert alloc.H == (frozenset({1, 2, 3}),) and alloc.p == (0,)


def test_two_rounds_reduce_to_multi_unit_clinching():
    inst = make_instance([5, 2], [3, 11], [1], interests=[{1, 2}, {1, 2}], rounds=2,
                         mode=Mode.COMBINATORIAL)
    alloc, _ = run_combinatorial(inst)
    assert [len(h) for h in alloc.H] == [1, 1]
    assert alloc.p == (2, F(3, 2))


def test_random_outputs_sell_everything_without_trading_paths():
    for inst in combinatorial_corpus(80, seed=31):
        alloc, trace = run_combinatorial(inst)
        assert check_legal(inst, alloc)
        assert alloc.sold_count() == inst.m * inst.rounds
        assert find_trading_path(inst, alloc) is None
        assert simple_trading_paths(inst, alloc) == []
        won, paid = trace.replay_combinatorial(inst.n)
        assert tuple(won) == alloc.H and tuple(paid) == alloc.p


def test_downgrades_only_lower_demand():
    for inst in combinatorial_corpus(80, seed=32):
        _, trace = run_combinatorial(inst)
        last = {}
        for e in trace:
            if isinstance(e, PriceRaised):
                last = {}
            elif isinstance(e, DemandUpdated):
                if e.bidder in last:
                    assert e.demand <= last[e.bidder]
                last[e.bidder] = e.demand


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_payments_within_budget_and_value(seed):
    inst = random_combinatorial(random.Random(seed))
    alloc, _ = run_combinatorial(inst)
    for b, h, p in zip(inst.bidders, alloc.H, alloc.p):
        assert 0 <= p <= b.budget
        assert p <= len(h) * b.valuation
