"""Clinching auction for rounds of identical slots with single-valued bidders.

Each round is an item with ``m`` identical instances; a bidder wants at most
one instance per round, only from its interest set.  The price only moves
between breakpoints (valuations and budget fractions ``b_i / k``) where some
bidder's demand changes, so the ascending auction runs in exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EngineInvariantError
from .flow import InterestGraph, assigned_excluding, s_avoid_matching
from .model import CombinatorialAllocation, validate_instance
from .trace import AuctionTrace, DemandUpdated, Exited, ItemSold, PriceRaised, Started

ZERO = Fraction(0)


def demand(v, size, price, rbar, budget) -> int:
    """Instances a bidder can afford and use at ``price``."""
    if price > v:
        return 0
    if price == 0:
        return min(rbar, size)
    return min(rbar, size, math.floor(Fraction(budget) / price))


def demand_plus(v, size, price, rbar, budget) -> int:
    """Right limit of :func:`demand` at ``price``."""
    if price >= v:
        return 0
    if price == 0:
        return min(rbar, size)
    ratio = Fraction(budget) / price
    q = ratio - 1 if ratio.denominator == 1 else math.floor(ratio)
    return min(rbar, size, int(q))


@dataclass
class CombState:
    valuation: tuple
    budget: list            # remaining budgets
    interest: list          # per bidder: set of rounds still wanted
    supply: dict            # round -> unsold instances
    price: Fraction = ZERO
    downgraded: list = field(default_factory=list)
    gone: set = field(default_factory=set)   # exited at the current price
    won: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.valuation)

    def unsold(self) -> list:
        return [r for r in sorted(self.supply) if self.supply[r] > 0]

    @property
    def rbar(self) -> int:
        return len(self.unsold())

    @property
    def t_bar(self) -> int:
        return sum(self.supply.values())

    def usable(self, i) -> int:
        return sum(1 for r in self.interest[i] if self.supply.get(r, 0) > 0)

    def D(self, i, price=None) -> int:
        price = self.price if price is None else price
        return demand(self.valuation[i], self.usable(i), price, self.rbar, self.budget[i])

    def D_plus(self, i, price=None) -> int:
        price = self.price if price is None else price
        return demand_plus(self.valuation[i], self.usable(i), price, self.rbar, self.budget[i])

    def d(self, i) -> int:
        if i in self.gone:
            return 0
        return self.D_plus(i) if self.downgraded[i] else self.D(i)

    def active(self) -> list:
        return [i for i in range(self.n) if i not in self.gone and self.D(i) > 0]

    def graph(self) -> InterestGraph:
        bidders = [i for i in self.active() if self.d(i) > 0]
        return InterestGraph.build(
            bidders, {i: self.d(i) for i in bidders}, self.unsold(), self.supply,
            {i: self.interest[i] for i in bidders})


def next_price(state: CombState):
    """Smallest breakpoint above the current price where some ``D != D+``;
    ``None`` when no bidder can ever demand again."""
    cands = set()
    rbar = state.rbar
    for i in range(state.n):
        v = state.valuation[i]
        if v > state.price:
            cands.add(Fraction(v))
        for k in range(1, min(rbar, state.usable(i)) + 1):
            q = Fraction(state.budget[i]) / k
            if q > state.price:
                cands.add(q)
    for pi in sorted(cands):
        if any(state.D(i, pi) != state.D_plus(i, pi) for i in range(state.n)):
            return pi
    return None


def _sell_once(state: CombState, S, trace: AuctionTrace):
    match = s_avoid_matching(state.graph(), S)
    for (a, r), x in sorted(match.load.items()):
        if x and a in S:
            state.supply[r] -= 1
            state.interest[a].discard(r)
            state.won[a].add(r)
            state.budget[a] -= state.price
            trace.add(ItemSold(a + 1, r, state.price))
            return
    raise EngineInvariantError(
        f"bidders {sorted(x + 1 for x in S)} must clinch but hold nothing in the avoid matching")


def sell_to_set(state: CombState, S, trace: AuctionTrace) -> int:
    """Sell to bidders in ``S`` until the others can absorb every unsold
    instance.  Returns the number of instances sold."""
    S = set(S)
    sold = 0
    while S and assigned_excluding(state.graph(), S) < state.t_bar:
        _sell_once(state, S, trace)
        sold += 1
    return sold


def init_comb_state(inst) -> CombState:
    n = inst.n
    return CombState(
        valuation=tuple(b.valuation for b in inst.bidders),
        budget=[b.budget for b in inst.bidders],
        interest=[set(b.interest) for b in inst.bidders],
        supply={r: inst.m for r in range(1, inst.rounds + 1)},
        downgraded=[False] * n,
        won=[set() for _ in range(n)])


def run_combinatorial(inst, validate=True):
    """Run the auction; return ``(CombinatorialAllocation, AuctionTrace)``."""
    if validate:
        validate_instance(inst)
    st = init_comb_state(inst)
    n = st.n
    initial = st.t_bar
    trace = AuctionTrace()
    trace.add(Started(st.price, None, tuple(ZERO for _ in range(n))))
    guard = 0
    while st.active():
        guard += 1
        if guard > 10 * (initial + 1) * (n + 1) * (max(st.valuation) + 2) ** 2:
            raise EngineInvariantError("combinatorial auction did not terminate")
        exiting = [i for i in st.active() if st.valuation[i] == st.price]
        sell_to_set(st, exiting, trace)
        for i in exiting:
            st.gone.add(i)
            trace.add(Exited(i + 1))
        while True:
            g = st.graph()
            clincher = None
            for i in st.active():
                if assigned_excluding(g, {i}) < st.t_bar:
                    clincher = i
                    break
            if clincher is not None:
                sell_to_set(st, {clincher}, trace)
                continue
            lagging = [i for i in st.active() if st.d(i) > st.D_plus(i)]
            if not lagging:
                break
            i = lagging[0]
            st.downgraded[i] = True
            trace.add(DemandUpdated(i + 1, Fraction(st.d(i))))
        pi = next_price(st)
        if pi is None:
            break
        st.price = pi
        st.downgraded = [False] * n
        st.gone = set()
        trace.add(PriceRaised(pi))
    budgets = tuple(b.budget for b in inst.bidders)
    p = tuple(budgets[i] - st.budget[i] for i in range(n))
    H = tuple(frozenset(w) for w in st.won)
    alloc = CombinatorialAllocation(H, p, tuple(st.budget), inst.m, inst.rounds)
    return alloc, trace
