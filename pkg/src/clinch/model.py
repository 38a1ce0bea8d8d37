"""Domain types, instance validation and legality checks.

All quantities are exact: integers for valuations and demand caps,
:class:`fractions.Fraction` for budgets, qualities, allocations and payments.
Bidder and slot ids are dense and start at 1; internally everything is
indexed by position, which is also the fixed tie-break order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .errors import DimensionError, ValidationError

Rational = Fraction


class Mode(str, enum.Enum):
    DIVISIBLE = "divisible"
    ROUNDS = "indivisible-rounds"
    COMBINATORIAL = "combinatorial"
    MARGINAL = "multi-unit-marginal"


@dataclass(frozen=True)
class Bidder:
    id: int
    valuation: Union[int, tuple]
    budget: Fraction
    kappa: int = 1
    interest: frozenset | None = None

    def value_of(self, units: int) -> int:
        """Total value of ``units`` units (handles marginal sequences)."""
        if isinstance(self.valuation, tuple):
            return sum(self.valuation[:units])
        return self.valuation * units


@dataclass(frozen=True)
class Slot:
    id: int
    alpha: Fraction
    dummy: bool = False


@dataclass(frozen=True)
class AuctionInstance:
    bidders: tuple
    slots: tuple
    rounds: int = 1
    mode: Mode = Mode.DIVISIBLE

    @property
    def n(self) -> int:
        return len(self.bidders)

    @property
    def m(self) -> int:
        return len(self.slots)

    def valuations(self) -> list:
        return [b.valuation for b in self.bidders]

    def with_valuation(self, index: int, value) -> "AuctionInstance":
        """Copy of the instance with bidder ``index`` reporting ``value``."""
        bidders = list(self.bidders)
        old = bidders[index]
        bidders[index] = Bidder(old.id, value, old.budget, old.kappa, old.interest)
        return AuctionInstance(tuple(bidders), self.slots, self.rounds, self.mode)


def make_instance(valuations, budgets, alphas, kappas=None, interests=None,
                  rounds=1, mode=Mode.DIVISIBLE) -> AuctionInstance:
    """Convenience constructor from plain sequences."""
    n = len(valuations)
    kappas = kappas or [1] * n
    bidders = []
    for i in range(n):
        v = valuations[i]
        if isinstance(v, (list, tuple)):
            v = tuple(v)
        interest = None
        if interests is not None:
            interest = frozenset(interests[i])
        bidders.append(Bidder(i + 1, v, Fraction(budgets[i]), kappas[i], interest))
    slots = tuple(Slot(j + 1, Fraction(a)) for j, a in enumerate(alphas))
    return AuctionInstance(tuple(bidders), slots, rounds, Mode(mode))


def validate_instance(inst: AuctionInstance) -> AuctionInstance:
    """Return ``inst`` unchanged or raise :class:`ValidationError`.

    Every violation is collected before raising.
    """
    errors = []
    mode = Mode(inst.mode)
    if not inst.bidders:
        errors.append("no bidders")
    if not isinstance(inst.rounds, int) or inst.rounds < 1:
        errors.append("rounds must be a positive integer")
    for pos, b in enumerate(inst.bidders):
        tag = f"bidder {pos + 1}"
        if b.id != pos + 1:
            errors.append(f"{tag}: id {b.id} breaks the dense 1..n numbering")
        if mode is Mode.MARGINAL:
            seq = b.valuation
            if not isinstance(seq, tuple) or not seq:
                errors.append(f"{tag}: marginal valuation must be a non-empty sequence")
            else:
                for q in seq:
                    if not _is_int(q):
                        errors.append(f"{tag}: non-integer valuation {q!r}")
                    elif q < 1:
                        errors.append(f"{tag}: valuation below 1")
                if all(_is_int(q) for q in seq) and any(
                        seq[k] < seq[k + 1] for k in range(len(seq) - 1)):
                    errors.append(f"{tag}: marginal valuations must be non-increasing")
        else:
            if not _is_int(b.valuation):
                errors.append(f"{tag}: non-integer valuation {b.valuation!r}")
            elif b.valuation < 1:
                errors.append(f"{tag}: valuation below 1")
        if not isinstance(b.budget, Fraction):
            errors.append(f"{tag}: budget must be an exact rational")
        elif b.budget < 1:
            errors.append(f"{tag}: budget below 1")
        if not _is_int(b.kappa) or b.kappa < 1:
            errors.append(f"{tag}: demand cap must be a positive integer")
        if mode is Mode.COMBINATORIAL:
            if b.kappa != 1:
                errors.append(f"{tag}: combinatorial mode requires demand cap 1")
            if not b.interest:
                errors.append(f"{tag}: empty interest set")
            elif any(not _is_int(r) or r < 1 or r > inst.rounds for r in b.interest):
                errors.append(f"{tag}: interest set names an unknown round")
    if not inst.slots:
        errors.append("no slots")
    for pos, s in enumerate(inst.slots):
        if s.id != pos + 1:
            errors.append(f"slot {pos + 1}: id {s.id} breaks the dense 1..m numbering")
        if not isinstance(s.alpha, Fraction):
            errors.append(f"slot {pos + 1}: quality must be an exact rational")
        elif s.alpha < 0:
            errors.append(f"slot {pos + 1}: negative quality")
    if mode is Mode.COMBINATORIAL and inst.slots and isinstance(inst.rounds, int):
        if len({s.alpha for s in inst.slots}) > 1:
            errors.append("combinatorial mode requires identical slot qualities")
        for r in range(1, inst.rounds + 1):
            interested = sum(1 for b in inst.bidders if b.interest and r in b.interest)
            if interested < inst.m:
                errors.append(
                    f"coverage: round {r} has {interested} interested bidders, "
                    f"needs at least {inst.m}")
    if errors:
        raise ValidationError(errors)
    return inst


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


# -- allocations --------------------------------------------------------------

@dataclass(frozen=True)
class DivisibleAllocation:
    """Fractional assignment ``X[i][j]`` over the slots in ``alpha`` order."""
    X: tuple
    p: tuple
    alpha: tuple
    slot_ids: tuple = ()

    @property
    def capacities(self) -> list:
        return [sum((a * x for a, x in zip(self.alpha, row)), Fraction(0)) for row in self.X]


@dataclass(frozen=True)
class IndivisibleAllocation:
    """``N[j][r]`` is the bidder (1-based id) holding slot ``j`` in round ``r``."""
    N: tuple
    p: tuple
    alpha: tuple
    seed: int | None = None
    slot_ids: tuple = ()
    lam: int | None = None

    @property
    def rounds(self) -> int:
        return len(self.N[0]) if self.N else 0

    @property
    def capacities(self) -> list:
        n = len(self.p)
        c = [Fraction(0)] * n
        R = self.rounds
        for j, row in enumerate(self.N):
            for who in row:
                c[who - 1] += self.alpha[j] / R
        return c


@dataclass(frozen=True)
class CombinatorialAllocation:
    """``H[i]`` is the set of rounds bidder ``i`` won one slot instance in."""
    H: tuple
    p: tuple
    b_star: tuple
    slots_per_round: int = 1
    rounds: int = 1

    @property
    def capacities(self) -> list:
        return [Fraction(len(h)) for h in self.H]

    def sold_count(self) -> int:
        return sum(len(h) for h in self.H)


@dataclass
class LegalityReport:
    legal: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.legal


def check_legal(inst: AuctionInstance, alloc) -> LegalityReport:
    """Check the three legality conditions exactly.

    (1) demand caps, (2) every slot fully assigned, (3) payments within budget.
    Raises :class:`DimensionError` on shape mismatch.
    """
    n = inst.n
    if len(alloc.p) != n:
        raise DimensionError(f"payment vector has {len(alloc.p)} entries, instance has {n} bidders")
    v = []
    if isinstance(alloc, DivisibleAllocation):
        if len(alloc.X) != n or any(len(row) != len(alloc.alpha) for row in alloc.X):
            raise DimensionError("assignment matrix does not match bidders x slots")
        for i, row in enumerate(alloc.X):
            for j, x in enumerate(row):
                if x < 0:
                    v.append(f"negative share x[{i + 1}][{j + 1}]")
            if sum(row) > inst.bidders[i].kappa:
                v.append(f"(1) demand cap exceeded for bidder {i + 1}")
        for j in range(len(alloc.alpha)):
            if sum(alloc.X[i][j] for i in range(n)) != 1:
                v.append(f"(2) slot {j + 1} not fully assigned")
    elif isinstance(alloc, IndivisibleAllocation):
        if len(alloc.N) != len(alloc.alpha):
            raise DimensionError("round matrix does not match slot count")
        R = alloc.rounds
        for j, row in enumerate(alloc.N):
            if len(row) != R:
                raise DimensionError("ragged round matrix")
            for who in row:
                if not (isinstance(who, int) and 1 <= who <= n):
                    v.append(f"(2) slot {j + 1} assigned to unknown bidder {who!r}")
        for r in range(R):
            counts = [0] * (n + 1)
            for j in range(len(alloc.N)):
                who = alloc.N[j][r]
                if isinstance(who, int) and 1 <= who <= n:
                    counts[who] += 1
            for i in range(n):
                if counts[i + 1] > inst.bidders[i].kappa:
                    v.append(f"(1) bidder {i + 1} exceeds demand cap in round {r + 1}")
    elif isinstance(alloc, CombinatorialAllocation):
        if len(alloc.H) != n:
            raise DimensionError("won-set tuple does not match bidder count")
        per_round = {}
        for i, h in enumerate(alloc.H):
            interest = inst.bidders[i].interest or frozenset()
            if not set(h) <= interest:
                v.append(f"bidder {i + 1} holds rounds outside the interest set")
            for r in h:
                per_round[r] = per_round.get(r, 0) + 1
        for r, k in sorted(per_round.items()):
            if k > alloc.slots_per_round:
                v.append(f"round {r} oversold ({k} > {alloc.slots_per_round})")
    else:
        raise TypeError(f"unsupported allocation type {type(alloc).__name__}")
    for i, b in enumerate(inst.bidders):
        if alloc.p[i] > b.budget:
            v.append(f"(3) budget exceeded by bidder {i + 1}")
    return LegalityReport(not v, v)


def utilities(inst: AuctionInstance, alloc):
    """Per-bidder utilities ``c_i * v_i - p_i`` and auctioneer revenue."""
    caps = alloc.capacities
    u = []
    for i, b in enumerate(inst.bidders):
        if isinstance(b.valuation, tuple):
            # marginal valuations only make sense for whole units
            value = Fraction(b.value_of(int(caps[i])))
        else:
            value = caps[i] * b.valuation
        u.append(value - alloc.p[i])
    return u, sum(alloc.p, Fraction(0))


def lcm_denominator(values: Sequence[Fraction]) -> int:
    from math import lcm
    out = 1
    for x in values:
        out = lcm(out, Fraction(x).denominator)
    return out
