"""Audit log of price steps, demand updates and clinch events."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction


@dataclass(frozen=True)
class Started:
    price: Fraction
    next_price: Fraction | None
    capacities: tuple


@dataclass(frozen=True)
class PriceRaised:
    price: Fraction
    next_price: Fraction | None = None


@dataclass(frozen=True)
class DemandUpdated:
    bidder: int
    demand: Fraction


@dataclass(frozen=True)
class SellCalled:
    """Snapshot of the clinching state handed to one LP solve."""
    bidder: int
    price: Fraction
    capacities: tuple
    demands: tuple


@dataclass(frozen=True)
class Clinched:
    bidder: int
    amount: Fraction
    unit_price: Fraction


@dataclass(frozen=True)
class ItemSold:
    bidder: int
    round: int
    unit_price: Fraction


@dataclass(frozen=True)
class Exited:
    bidder: int


EVENT_TYPES = {cls.__name__: cls for cls in
               (Started, PriceRaised, DemandUpdated, SellCalled, Clinched, ItemSold, Exited)}


@dataclass
class AuctionTrace:
    events: list = field(default_factory=list)

    def add(self, event):
        self.events.append(event)

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def of_type(self, cls):
        return [e for e in self.events if isinstance(e, cls)]

    def prices(self) -> list:
        out = []
        for e in self.events:
            if isinstance(e, (Started, PriceRaised)):
                out.append(e.price)
        return out

    def replay_divisible(self, n: int):
        """Rebuild ``(capacities, payments)`` from the event log alone."""
        caps = [Fraction(0)] * n
        pay = [Fraction(0)] * n
        for e in self.events:
            if isinstance(e, Started):
                caps = list(e.capacities)
            elif isinstance(e, Clinched):
                caps[e.bidder - 1] += e.amount
                pay[e.bidder - 1] += e.amount * e.unit_price
        return caps, pay

    def replay_combinatorial(self, n: int):
        """Rebuild ``(won rounds, payments)`` from the event log alone."""
        won = [set() for _ in range(n)]
        pay = [Fraction(0)] * n
        for e in self.events:
            if isinstance(e, ItemSold):
                won[e.bidder - 1].add(e.round)
                pay[e.bidder - 1] += e.unit_price
        return [frozenset(w) for w in won], pay

    def to_records(self) -> list:
        from .io import encode_value
        return [{"event": type(e).__name__, **encode_value(asdict(e))} for e in self.events]

    @classmethod
    def from_records(cls, records) -> "AuctionTrace":
        from .io import decode_rational
        trace = cls()
        for rec in records:
            kind = EVENT_TYPES[rec["event"]]
            kwargs = {}
            for f in fields(kind):
                raw = rec.get(f.name)
                if f.name in ("bidder", "round"):
                    kwargs[f.name] = raw
                elif isinstance(raw, list):
                    kwargs[f.name] = tuple(decode_rational(x) for x in raw)
                elif raw is None:
                    kwargs[f.name] = None
                else:
                    kwargs[f.name] = decode_rational(raw)
            trace.add(kind(**kwargs))
        return trace
