"""Two bidders, two identical items, diminishing marginal values: a profitable lie.

With the misreport ``v_2 = (2, 2)`` both bidders have constant marginals, so
the outcome is the multi-unit clinching auction.  Under the truth
``v_2 = (2, 1)`` any incentive compatible, Pareto optimal and rational
mechanism must hand both items to bidder 1 and charge bidder 2 nothing.  No
mechanism is simulated for that branch; the forced outcome is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .combinatorial import run_combinatorial
from .errors import ClinchError
from .model import (AuctionInstance, Bidder, CombinatorialAllocation, Mode,
                    Slot, make_instance)

ZERO = Fraction(0)


def load_counterexample() -> AuctionInstance:
    from .io import parse_instance
    text = resources.files("clinch").joinpath("data/marginal_counterexample.json").read_text()
    return parse_instance(json.loads(text))


@dataclass(frozen=True)
class Inequality:
    label: str
    lhs: Fraction
    rhs: Fraction
    relation: str
    holds: bool


@dataclass(frozen=True)
class LemmaCheck:
    favored: int | None         # 1-based bidder who must win everything, if any
    inequalities: tuple


def _as_marginals(b):
    return b.valuation if isinstance(b.valuation, tuple) else (b.valuation,)


def check_lemma_conditions(inst) -> LemmaCheck:
    """Does one bidder's last marginal beat the other's first, with enough
    budget to cover the other's whole schedule?  Both orientations are
    evaluated; the first that holds is reported."""
    if inst.n != 2:
        raise ClinchError("the forced-allocation test needs exactly two bidders")
    R = inst.rounds
    rows = []
    favored = None
    for f, o in ((0, 1), (1, 0)):
        vf = _as_marginals(inst.bidders[f])
        vo = _as_marginals(inst.bidders[o])
        last = Fraction(vf[min(R, len(vf)) - 1])
        first = Fraction(vo[0])
        total = Fraction(sum(vo[:R]))
        strict = Inequality(f"v_{f + 1}({R}) > v_{o + 1}(1)", last, first, ">", last > first)
        cover = Inequality(f"sum v_{o + 1} <= b_{f + 1}", total, inst.bidders[f].budget, "<=",
                           total <= inst.bidders[f].budget)
        rows.extend([strict, cover])
        if favored is None and strict.holds and cover.holds:
            favored = f + 1
    return LemmaCheck(favored, tuple(rows))


def multi_unit_instance(inst) -> AuctionInstance:
    """Constant-marginal profile as a combinatorial instance: one slot per
    round, every bidder interested in every round."""
    rounds = frozenset(range(1, inst.rounds + 1))
    bidders = []
    for b in inst.bidders:
        seq = _as_marginals(b)
        if len(set(seq)) != 1:
            raise ClinchError(f"bidder {b.id} has non-constant marginals {seq}")
        bidders.append(Bidder(b.id, seq[0], b.budget, 1, rounds))
    return AuctionInstance(tuple(bidders), (Slot(1, Fraction(1)),), inst.rounds, Mode.COMBINATORIAL)


def forced_outcome(inst):
    """``(units, payments)`` that the impossibility argument pins down.

    If the forced-allocation conditions hold, the favoured bidder gets every
    item and the other pays nothing.  The favoured bidder's own payment is
    not pinned; it is set to 0, the value most generous to that bidder, so
    its misreports are never spuriously profitable.  Constant-marginal
    profiles fall back to the multi-unit clinching outcome.
    """
    check = check_lemma_conditions(inst)
    if check.favored is not None:
        f = check.favored - 1
        units = [ZERO] * inst.n
        units[f] = Fraction(inst.rounds)
        return units, tuple(ZERO for _ in range(inst.n))
    alloc, _ = run_combinatorial(multi_unit_instance(inst))
    return alloc.capacities, alloc.p


@dataclass
class CounterexampleReport:
    truth: tuple
    lie: tuple
    lemma: LemmaCheck
    branch_a: CombinatorialAllocation
    branch_a_utilities: tuple
    branch_b_units: tuple
    branch_b_payments: tuple
    branch_b_utility_2: Fraction
    gain: Fraction
    divisible_capacities: tuple
    divisible_payments: tuple
    findings: list = field(default_factory=list)


def _value(seq, units):
    return Fraction(sum(seq[:int(units)]))


def run_counterexample(inst=None) -> CounterexampleReport:
    inst = inst or load_counterexample()
    truth = tuple(_as_marginals(b) for b in inst.bidders)
    lie = (truth[0], (truth[1][0],) * len(truth[1]))
    reported = inst.with_valuation(1, lie[1])

    alloc_a, _ = run_combinatorial(multi_unit_instance(reported))
    caps_a = alloc_a.capacities
    # bidder 1 reports truthfully; bidder 2 is scored on its true schedule
    u_a = (_value(truth[0], caps_a[0]) - alloc_a.p[0],
           _value(truth[1], caps_a[1]) - alloc_a.p[1])

    lemma = check_lemma_conditions(inst)
    units_b, pays_b = forced_outcome(inst)
    u2_b = _value(truth[1], units_b[1]) - pays_b[1]

    from .divisible import run_divisible
    div_inst = make_instance([lie[0][0], lie[1][0]], [b.budget for b in inst.bidders],
                             [Fraction(1)] * inst.rounds, kappas=[inst.rounds] * 2)
    div_alloc, _ = run_divisible(div_inst)

    report = CounterexampleReport(
        truth=truth, lie=lie, lemma=lemma, branch_a=alloc_a, branch_a_utilities=u_a,
        branch_b_units=tuple(units_b), branch_b_payments=tuple(pays_b),
        branch_b_utility_2=u2_b, gain=u_a[1] - u2_b,
        divisible_capacities=tuple(div_alloc.capacities),
        divisible_payments=tuple(div_alloc.p))
    if (report.divisible_capacities, report.divisible_payments) != (tuple(caps_a), alloc_a.p):
        report.findings.append(
            "divisible engine on unit-quality slots differs from the multi-unit clinching "
            f"outcome: capacities {list(map(str, report.divisible_capacities))}, payments "
            f"{list(map(str, report.divisible_payments))}")
    return report


def branch_b_allocation(inst, p1=ZERO) -> CombinatorialAllocation:
    """Forced outcome as a combinatorial allocation, with bidder 1 paying ``p1``."""
    rounds = frozenset(range(1, inst.rounds + 1))
    budgets = [b.budget for b in inst.bidders]
    p = (Fraction(p1), ZERO)
    return CombinatorialAllocation((rounds, frozenset()), p,
                                   (budgets[0] - p[0], budgets[1]), 1, inst.rounds)


def with_full_interest(inst) -> AuctionInstance:
    rounds = frozenset(range(1, inst.rounds + 1))
    bidders = tuple(Bidder(b.id, b.valuation, b.budget, b.kappa, rounds) for b in inst.bidders)
    return AuctionInstance(bidders, inst.slots, inst.rounds, inst.mode)


def branch_b_gain(inst, p1=ZERO) -> Fraction:
    """Improvement left in the forced outcome, by enumerating every integral
    reassignment of the items (marginal values included)."""
    from .lp import solve_improvement_lp
    return solve_improvement_lp(with_full_interest(inst), branch_b_allocation(inst, p1))
