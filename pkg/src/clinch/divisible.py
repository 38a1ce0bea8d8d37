"""Multi-price clinching auction for divisible slots.

Prices rise in unit steps.  Before any bidder's price goes up, every active
bidder is offered whatever capacity the others provably cannot absorb at
their current demand (the SELL program in :mod:`clinch.lp`).  Bidders whose
valuation is below the next price take a last SELL and leave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import EngineInvariantError
from .lp import SellLP, solve_sell_lp
from .model import DivisibleAllocation, Slot, validate_instance
from .trace import (AuctionTrace, Clinched, DemandUpdated, Exited, PriceRaised,
                    SellCalled, Started)

ZERO = Fraction(0)


def preprocess_slots(inst) -> tuple:
    """Pad with zero-quality dummies or drop the weakest slots so that the
    slot count equals the total demand cap.

    The result is sorted by ascending quality (ties by id), which is the
    column order used by every divisible allocation.
    """
    total = sum(b.kappa for b in inst.bidders)
    slots = sorted(inst.slots, key=lambda s: (s.alpha, s.id))
    if total < len(slots):
        slots = slots[len(slots) - total:]
    elif total > len(slots):
        next_id = max((s.id for s in inst.slots), default=0) + 1
        dummies = [Slot(next_id + k, ZERO, dummy=True) for k in range(total - len(slots))]
        slots = dummies + slots
    return tuple(sorted(slots, key=lambda s: (s.alpha, s.id)))


def spread(alphas) -> Fraction:
    """Largest gap between the k best and the k worst qualities, over all k."""
    a = sorted(alphas)
    best = ZERO
    for k in range(1, len(a) + 1):
        best = max(best, sum(a[-k:], ZERO) - sum(a[:k], ZERO))
    return best


@dataclass
class DivisibleState:
    alpha: tuple
    kappa: tuple
    budget: tuple
    valuation: tuple
    active: list
    price: Fraction
    next_price: Fraction
    c: list
    p: list
    d: list
    d_plus: list
    e: Fraction
    X: tuple | None = None
    sells: int = field(default=0)

    @property
    def n(self) -> int:
        return len(self.kappa)


def init_state(inst, slots=None) -> DivisibleState:
    if slots is None:
        slots = preprocess_slots(inst)
    alpha = tuple(s.alpha for s in slots)
    asc = sorted(alpha)
    kappa = tuple(b.kappa for b in inst.bidders)
    budget = tuple(b.budget for b in inst.bidders)
    c = [sum(asc[:k], ZERO) for k in kappa]
    e = spread(alpha)
    price = Fraction(1) / max(Fraction(1), e)
    next_price = Fraction(math.floor(price) + 1)
    return DivisibleState(
        alpha=alpha, kappa=kappa, budget=budget,
        valuation=tuple(b.valuation for b in inst.bidders),
        active=[True] * inst.n, price=price, next_price=next_price,
        c=c, p=[ZERO] * inst.n, d=[b / price for b in budget],
        d_plus=[(b / next_price) for b in budget], e=e)


def sell_step(state: DivisibleState, bidder: int, backend=None):
    """Solve SELL for ``bidder`` (0-based) against the current state.

    Returns ``(X, s)``; the caller applies the capacity and payment update.
    """
    lp = SellLP(state.alpha, state.kappa, tuple(state.c), tuple(state.d), bidder)
    sol = solve_sell_lp(lp, backend=backend)
    state.sells += 1
    return sol.X, sol.objective


def run_divisible(inst, backend=None, validate=True):
    """Run the auction; return ``(DivisibleAllocation, AuctionTrace)``."""
    if validate:
        validate_instance(inst)
    slots = preprocess_slots(inst)
    st = init_state(inst, slots)
    n = st.n
    total = sum(st.alpha, ZERO)
    trace = AuctionTrace()
    trace.add(Started(st.price, st.next_price, tuple(st.c)))

    def sell(i, unit_price):
        trace.add(SellCalled(i + 1, unit_price, tuple(st.c), tuple(st.d)))
        X, s = sell_step(st, i, backend)
        st.X = X
        if s:
            trace.add(Clinched(i + 1, s, unit_price))
        return s

    limit = max(st.valuation) + 2
    rounds = 0
    while sum(st.c, ZERO) < total:
        rounds += 1
        if rounds > limit or not any(st.active):
            raise EngineInvariantError(
                f"auction did not terminate (iteration {rounds}, capacity "
                f"{sum(st.c, ZERO)} of {total})")
        exiting = [i for i in range(n) if st.active[i] and st.next_price > st.valuation[i]]
        for i in exiting:
            s = sell(i, st.price)
            st.c[i] += s
            st.p[i] += s * st.price
            st.d[i] = ZERO
        for i in exiting:
            st.active[i] = False
            trace.add(Exited(i + 1))
        for i in range(n):
            if st.active[i]:
                st.d_plus[i] = (st.budget[i] - st.p[i]) / st.next_price
        while True:
            pending = [i for i in range(n) if st.active[i] and st.d[i] != st.d_plus[i]]
            if not pending:
                break
            top = pending[0]
            for i in range(n):
                if not st.active[i] or i == top:
                    continue
                raised = st.d[i] == st.d_plus[i]
                unit = st.next_price if raised else st.price
                s = sell(i, unit)
                st.p[i] += s * unit
                st.c[i] += s
                st.d[i] -= s
                st.d_plus[i] = (st.budget[i] - st.p[i]) / st.next_price
            s = sell(top, st.price)
            st.c[top] += s
            st.p[top] += s * st.price
            st.d_plus[top] = (st.budget[top] - st.p[top]) / st.next_price
            st.d[top] = st.d_plus[top]
            trace.add(DemandUpdated(top + 1, st.d[top]))
        st.price, st.next_price = st.next_price, st.next_price + 1
        trace.add(PriceRaised(st.price, st.next_price))

    if st.X is None:
        # capacity was fully determined up front; any full assignment works
        idle = replace(st, d=[ZERO] * n)
        st.X, _ = sell_step(idle, 0, backend)
    X = st.X
    for i in range(n):
        got = sum((a * x for a, x in zip(st.alpha, X[i])), ZERO)
        if got != st.c[i]:
            raise EngineInvariantError(
                f"final assignment gives bidder {i + 1} capacity {got}, clinched {st.c[i]}")
    alloc = DivisibleAllocation(X, tuple(st.p), st.alpha, tuple(s.id for s in slots))
    return alloc, trace


def preprocessed(inst):
    """Copy of ``inst`` whose slots are the preprocessed, sorted sequence."""
    from .model import AuctionInstance
    return AuctionInstance(inst.bidders, preprocess_slots(inst), inst.rounds, inst.mode)
