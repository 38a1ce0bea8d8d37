"""Pareto and incentive checks, each with an independent second route.

Divisible allocations: the swap-closure condition, the constructive trading
swap, and the improvement LP.  Combinatorial allocations: unsold instances
and alternating trading paths, plus enumeration of integral reassignments.
Incentives: exhaustive misreport grids with exact utility comparisons.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EngineInvariantError
from .lp import solve_improvement_lp
from .model import (CombinatorialAllocation, DivisibleAllocation,
                    IndivisibleAllocation, check_legal)

ZERO = Fraction(0)


# -- divisible: swap closure -----------------------------------------------------

def _sorted_view(alloc):
    """Column order by ascending quality (stable), as the closure assumes."""
    order = sorted(range(len(alloc.alpha)), key=lambda j: (alloc.alpha[j], j))
    alpha = tuple(alloc.alpha[j] for j in order)
    X = tuple(tuple(row[j] for j in order) for row in alloc.X)
    return order, alpha, X


@dataclass(frozen=True)
class SwapClosure:
    top: tuple          # h'(i): highest held column, None if nothing held
    top_class: tuple    # h(i): first column with the same quality as h'(i)
    low: tuple          # l(i): lowest held column
    N: tuple            # N[i]: bidders holding something strictly better than i's worst
    N_tilde: tuple
    v_tilde: tuple      # None stands for infinity
    B: frozenset        # bidders with budget left
    alpha: tuple
    X: tuple
    order: tuple

    def layers(self, i) -> list:
        """``[N^1_i, ..., N^n_i]``."""
        out = [set(self.N[i])]
        for _ in range(1, len(self.N)):
            nxt = set()
            for a in out[-1]:
                nxt |= self.N[a]
            out.append(nxt)
        return out


def swap_closure(inst, alloc) -> SwapClosure:
    order, alpha, X = _sorted_view(alloc)
    n, m = inst.n, len(alpha)
    top, cls, low = [], [], []
    for i in range(n):
        held = [j for j in range(m) if X[i][j] > 0]
        if not held:
            top.append(None); cls.append(None); low.append(None)
            continue
        h = max(held)
        top.append(h)
        cls.append(min(j for j in range(m) if alpha[j] == alpha[h]))
        low.append(min(held))
    N = []
    for i in range(n):
        if low[i] is None:
            N.append(frozenset())
        else:
            N.append(frozenset(a for a in range(n) if cls[a] is not None and cls[a] > low[i]))
    closure = SwapClosure(tuple(top), tuple(cls), tuple(low), tuple(N), (), (), frozenset(),
                          alpha, X, tuple(order))
    Nt, vt = [], []
    vals = [inst.bidders[a].valuation for a in range(n)]
    for i in range(n):
        reach = set().union(*closure.layers(i)) - {i}
        Nt.append(frozenset(reach))
        vt.append(min(vals[a] for a in reach) if reach else None)
    B = frozenset(i for i in range(n) if inst.bidders[i].budget > alloc.p[i])
    return SwapClosure(tuple(top), tuple(cls), tuple(low), tuple(N), tuple(Nt), tuple(vt), B,
                       alpha, X, tuple(order))


def closure_condition(inst, alloc):
    """``(holds, closure)``: every bidder with budget left values the
    cheapest bidder it could trade with at least as much as itself.
    Holding is sufficient for Pareto optimality."""
    cl = swap_closure(inst, alloc)
    ok = all(cl.v_tilde[i] is None or cl.v_tilde[i] >= inst.bidders[i].valuation for i in cl.B)
    return ok, cl


@dataclass(frozen=True)
class TradingSwap:
    u: int
    w: int
    chain: tuple
    delta: Fraction
    X: tuple            # improved assignment, columns in the allocation's own order
    p: tuple

    def allocation(self, alloc) -> DivisibleAllocation:
        return DivisibleAllocation(self.X, self.p, alloc.alpha, alloc.slot_ids)


def find_trading_swap(inst, alloc):
    """Constructive improvement for the first bidder violating the closure
    condition, or ``None``.  The result is checked against all five swap
    clauses and legality before it is returned."""
    cl = swap_closure(inst, alloc)
    v = [inst.bidders[i].valuation for i in range(inst.n)]
    bad = [i for i in sorted(cl.B) if cl.v_tilde[i] is not None and cl.v_tilde[i] < v[i]]
    if not bad:
        return None
    u = bad[0]
    target = cl.v_tilde[u]
    layers = cl.layers(u)
    k = next(idx for idx, layer in enumerate(layers, start=1)
             if any(v[a] == target and a != u for a in layer))
    chain = [None] * (k + 1)
    chain[0] = u
    chain[k] = min(a for a in layers[k - 1] if v[a] == target and a != u)
    for p in range(k - 1, 0, -1):
        chain[p] = min(a for a in layers[p - 1] if chain[p + 1] in cl.N[a])
    if len(set(chain)) != len(chain):
        raise EngineInvariantError(f"swap chain {chain} repeats a bidder")

    alpha, X = cl.alpha, cl.X
    # step p moves tau_p of column hi_p from chain[p] to chain[p-1] and
    # tau_p of column lo_p the other way; tau_p = delta / (alpha[hi] - alpha[lo])
    steps = []
    for p in range(k):
        lo = cl.low[chain[p]]
        hi = cl.top[chain[p + 1]]
        steps.append((chain[p], chain[p + 1], lo, hi, alpha[hi] - alpha[lo]))
    w = chain[k]
    bounds = [(inst.bidders[u].budget - alloc.p[u]) / v[w]]
    take = {}
    for a, b, lo, hi, gap in steps:
        take[(a, lo)] = take.get((a, lo), ZERO) + 1 / gap
        take[(b, hi)] = take.get((b, hi), ZERO) + 1 / gap
    for (who, col), rate in take.items():
        bounds.append(X[who][col] / rate)
    delta = min(bounds)
    newX = [list(row) for row in X]
    for a, b, lo, hi, gap in steps:
        tau = delta / gap
        newX[a][hi] += tau
        newX[a][lo] -= tau
        newX[b][hi] -= tau
        newX[b][lo] += tau
    p_new = list(alloc.p)
    p_new[w] -= v[w] * delta
    p_new[u] += v[w] * delta
    # back to the caller's column order
    back = [[ZERO] * len(alpha) for _ in range(inst.n)]
    for pos, j in enumerate(cl.order):
        for i in range(inst.n):
            back[i][j] = newX[i][pos]
    witness = TradingSwap(u, w, tuple(chain), delta,
                          tuple(tuple(r) for r in back), tuple(p_new))
    problems = swap_clause_violations(inst, alloc, witness, cl)
    if problems:
        raise EngineInvariantError("constructed trading swap is invalid: " + "; ".join(problems))
    return witness


def swap_clause_violations(inst, alloc, sw: TradingSwap, closure=None) -> list:
    """Re-check a swap witness independently; empty list means valid."""
    cl = closure or swap_closure(inst, alloc)
    new = sw.allocation(alloc)
    out = []
    if not check_legal(inst, new):
        out.append("result is not legal: " + ", ".join(check_legal(inst, new).violations))
    if any(x < 0 for row in new.X for x in row):
        out.append("negative share")
    if sw.w not in cl.N_tilde[sw.u]:
        out.append("w not reachable from u")
    before, after = alloc.capacities, new.capacities
    for i in range(inst.n):
        if i in (sw.u, sw.w):
            continue
        if before[i] != after[i] or alloc.p[i] != new.p[i]:
            out.append(f"bidder {i + 1} changed")
    gain_u = after[sw.u] - before[sw.u]
    loss_w = before[sw.w] - after[sw.w]
    if not (gain_u == loss_w == sw.delta and sw.delta > 0):
        out.append("capacity transfer mismatch")
    vu, vw = inst.bidders[sw.u].valuation, inst.bidders[sw.w].valuation
    paid = new.p[sw.u] - alloc.p[sw.u]
    if not (vu * sw.delta > paid == alloc.p[sw.w] - new.p[sw.w] == vw * sw.delta):
        out.append("payment transfer mismatch")
    if new.p[sw.u] > inst.bidders[sw.u].budget:
        out.append("u over budget")
    return out


# -- combinatorial: trading paths ----------------------------------------------

@dataclass(frozen=True)
class TradingPath:
    bidders: tuple      # a_1 .. a_j (0-based)
    items: tuple        # t_1 .. t_{j-1}


def _edges(inst, alloc):
    n = inst.n
    out = {a: [] for a in range(n)}
    for a in range(n):
        for t in sorted(alloc.H[a]):
            for b in range(n):
                if b != a and t in (inst.bidders[b].interest or ()) and t not in alloc.H[b]:
                    out[a].append((t, b))
    return out


def is_trading_path(inst, alloc, path: TradingPath) -> bool:
    a, t = path.bidders, path.items
    if len(a) < 2 or len(t) != len(a) - 1:
        return False
    for k in range(len(t)):
        if t[k] not in alloc.H[a[k]]:
            return False
        if t[k] not in (inst.bidders[a[k + 1]].interest or ()) or t[k] in alloc.H[a[k + 1]]:
            return False
    first, last = inst.bidders[a[0]], inst.bidders[a[-1]]
    return last.valuation > first.valuation and alloc.b_star[a[-1]] >= first.valuation


def _simplify(bidders, items):
    """Cut out cycles: the stretch between two uses of one item, or between
    two visits of one bidder.  Endpoints and the net transfer are kept."""
    bidders, items = list(bidders), list(items)
    while True:
        cut = None
        for x in range(len(items)):
            for y in range(x + 1, len(items)):
                if items[x] == items[y]:
                    # bidders[x] hands the item straight to bidders[y + 1]
                    cut = (bidders[:x + 1] + bidders[y + 1:], items[:x + 1] + items[y + 1:])
                    break
            if cut:
                break
        if not cut:
            for x in range(len(bidders)):
                for y in range(x + 1, len(bidders)):
                    if bidders[x] == bidders[y]:
                        cut = (bidders[:x] + bidders[y:], items[:x] + items[y:])
                        break
                if cut:
                    break
        if not cut:
            return tuple(bidders), tuple(items)
        bidders, items = cut


def find_trading_path(inst, alloc: CombinatorialAllocation):
    """A simple trading path, or ``None``.

    Existence is decided by plain reachability over alternating edges; the
    breadth-first path found is then stripped of repeated items.
    """
    edges = _edges(inst, alloc)
    n = inst.n
    for start in range(n):
        v1 = inst.bidders[start].valuation
        prev = {start: None}
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for t, b in edges[a]:
                if b not in prev:
                    prev[b] = (a, t)
                    queue.append(b)
        hits = [b for b in sorted(prev) if b != start
                and inst.bidders[b].valuation > v1 and alloc.b_star[b] >= v1]
        if not hits:
            continue
        end = hits[0]
        bidders, items = [end], []
        while prev[bidders[-1]] is not None:
            a, t = prev[bidders[-1]]
            items.append(t)
            bidders.append(a)
        bidders.reverse()
        items.reverse()
        bidders, items = _simplify(bidders, items)
        path = TradingPath(bidders, items)
        if not is_trading_path(inst, alloc, path):
            raise EngineInvariantError(f"path search produced an invalid witness {path}")
        return path
    return None


def simple_trading_paths(inst, alloc):
    """Every simple trading path, by exhaustive depth-first enumeration."""
    edges = _edges(inst, alloc)
    found = []

    def extend(bidders, items):
        if len(bidders) >= 2 and is_trading_path(inst, alloc, TradingPath(tuple(bidders), tuple(items))):
            found.append(TradingPath(tuple(bidders), tuple(items)))
        for t, b in edges[bidders[-1]]:
            if b not in bidders and t not in items:
                extend(bidders + [b], items + [t])

    for a in range(inst.n):
        extend([a], [])
    return found


# -- verdicts --------------------------------------------------------------------

@dataclass
class Verdict:
    status: str                         # optimal | improvable | inconclusive
    route: str
    witness: object = None
    gain: Fraction | None = None
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def unsold_rounds(alloc: CombinatorialAllocation) -> list:
    counts = {r: 0 for r in range(1, alloc.rounds + 1)}
    for h in alloc.H:
        for r in h:
            counts[r] += 1
    return [r for r, k in counts.items() if k < alloc.slots_per_round]


def pareto_verdict(inst, alloc, cross_check=True) -> Verdict:
    if isinstance(alloc, CombinatorialAllocation):
        unsold = unsold_rounds(alloc)
        path = None if unsold else find_trading_path(inst, alloc)
        status = "improvable" if unsold or path else "optimal"
        v = Verdict(status, "trading-path", witness=path or (("unsold", tuple(unsold)) if unsold else None))
        if cross_check:
            gain = solve_improvement_lp(inst, alloc)
            v.gain = gain
            v.checks["enumeration"] = "optimal" if gain == 0 else "improvable"
            if (gain == 0) != (status == "optimal"):
                v.notes.append("routes disagree")
        return v
    if isinstance(alloc, IndivisibleAllocation):
        gain = solve_improvement_lp(inst, alloc)
        status = "optimal" if gain == 0 else "inconclusive"
        v = Verdict(status, "relaxation-lp", gain=gain)
        v.notes.append("sampled rounds are scored through their fractional image; "
                       "a positive relaxation gain does not prove an integral improvement")
        return v
    if isinstance(alloc, DivisibleAllocation):
        gain = solve_improvement_lp(inst, alloc)
        status = "optimal" if gain == 0 else "improvable"
        v = Verdict(status, "improvement-lp", gain=gain)
        if sum(b.kappa for b in inst.bidders) != len(alloc.alpha):
            v.notes.append("swap closure assumes slot count equals total demand cap; "
                           "closure routes skipped")
            return v
        if cross_check:
            holds, _ = closure_condition(inst, alloc)
            swap = find_trading_swap(inst, alloc)
            v.witness = swap
            v.checks["closure"] = holds
            v.checks["swap"] = swap is not None
            if not (holds == (swap is None) == (gain == 0)):
                v.notes.append("routes disagree")
        return v
    raise TypeError(f"unsupported allocation type {type(alloc).__name__}")


# -- incentive compatibility --------------------------------------------------

def _outcome_divisible(inst):
    from .divisible import run_divisible
    alloc, _ = run_divisible(inst)
    return alloc.capacities, alloc.p


def _outcome_rounds(inst):
    # expected capacity of a uniformly drawn column; exact, no sampling
    from .divisible import run_divisible
    from .rounding import collapse, discretize, expand_pseudo, row_share, swap_columns
    alloc, _ = run_divisible(inst)
    kappa = tuple(b.kappa for b in inst.bidders)
    Mp = collapse(swap_columns(expand_pseudo(discretize(alloc).M, kappa).M), kappa)
    return [row_share(Mp, i + 1, alloc.alpha) for i in range(inst.n)], alloc.p


def _outcome_combinatorial(inst):
    from .combinatorial import run_combinatorial
    alloc, _ = run_combinatorial(inst)
    return alloc.capacities, alloc.p


def _outcome_marginal(inst):
    from .marginal import forced_outcome
    return forced_outcome(inst)


ENGINES = {
    "divisible": _outcome_divisible,
    "rounds": _outcome_rounds,
    "combinatorial": _outcome_combinatorial,
    "marginal": _outcome_marginal,
}


def true_utility(bidder, capacity, payment, valuation=None):
    v = bidder.valuation if valuation is None else valuation
    if isinstance(v, tuple):
        return Fraction(sum(v[:int(capacity)])) - payment
    return capacity * v - payment


@dataclass(frozen=True)
class Deviation:
    bidder: int
    truth: object
    report: object
    truthful_utility: Fraction
    deviating_utility: Fraction

    @property
    def gain(self) -> Fraction:
        return self.deviating_utility - self.truthful_utility


@dataclass
class DeviationReport:
    engine: str
    checked: int = 0
    runs: int = 0
    profitable: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.profitable


def _profile_key(inst):
    return tuple(b.valuation for b in inst.bidders)


def ic_deviation_grid(inst, engine, grid, cache=None, report=None) -> DeviationReport:
    """Try every misreport in ``grid`` for every bidder of ``inst`` (whose
    valuations are the truth).

    ``grid`` is one list of reports for everybody, or a mapping from 1-based
    bidder id to that bidder's list (bidders missing from it are skipped).
    """
    run = ENGINES[engine] if isinstance(engine, str) else engine
    name = engine if isinstance(engine, str) else getattr(engine, "__name__", "custom")
    cache = {} if cache is None else cache
    report = report or DeviationReport(name)

    def outcome(candidate):
        key = _profile_key(candidate)
        if key not in cache:
            cache[key] = run(candidate)
            report.runs += 1
        return cache[key]

    caps, pays = outcome(inst)
    for i, b in enumerate(inst.bidders):
        honest = true_utility(b, caps[i], pays[i])
        lies = grid.get(i + 1, ()) if isinstance(grid, dict) else grid
        for lie in lies:
            if lie == b.valuation:
                continue
            c2, p2 = outcome(inst.with_valuation(i, lie))
            dev = true_utility(b, c2[i], p2[i])
            report.checked += 1
            if dev > honest:
                report.profitable.append(Deviation(i + 1, b.valuation, lie, honest, dev))
    return report


def ic_grid_sweep(template, engine, values) -> DeviationReport:
    """Every truthful profile over ``values`` for the bidders of ``template``,
    each tested against every misreport in ``values``."""
    cache = {}
    name = engine if isinstance(engine, str) else "custom"
    report = DeviationReport(name)
    for profile in itertools.product(values, repeat=template.n):
        inst = template
        for i, v in enumerate(profile):
            inst = inst.with_valuation(i, v)
        ic_deviation_grid(inst, engine, values, cache, report)
    return report
