"""Exact two-phase simplex, the SELL program and the Pareto-improvement oracle.

The driver works on equality-form programs ``min c.x  s.t.  A x = b, x >= 0``
and always terminates in a basic feasible solution, so every optimum it
returns is a vertex of the feasible polytope.  Pivoting follows Bland's
rule: smallest-index entering column, min-ratio leaving row with ties broken
by the smallest basic variable index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import _kernel
from .errors import ClinchError, EngineInvariantError
from .model import (CombinatorialAllocation, DivisibleAllocation,
                    IndivisibleAllocation)

ZERO = Fraction(0)
ONE = Fraction(1)


class LPInfeasible(ClinchError):
    pass


class LPUnbounded(ClinchError):
    pass


@dataclass(frozen=True)
class LPSolution:
    x: tuple
    objective: Fraction
    basis: frozenset
    pivots: int


def simplex(A, b, cost, backend=None, max_pivots=200_000) -> LPSolution:
    """Minimise ``cost . x`` subject to ``A x = b``, ``x >= 0``.

    ``backend`` selects a tableau class from :data:`clinch._kernel.BACKENDS`;
    the default is whichever was chosen at import.
    """
    Tab = _kernel.BACKENDS[backend] if backend else _kernel.Tableau
    nrow = len(A)
    nv = len(cost)
    A = [[Fraction(x) for x in row] for row in A]
    b = [Fraction(x) for x in b]
    cost = [Fraction(x) for x in cost]
    for r in range(nrow):
        if len(A[r]) != nv:
            raise ValueError("constraint row length does not match cost vector")
        if b[r] < 0:
            A[r] = [-x for x in A[r]]
            b[r] = -b[r]

    # reuse existing unit columns as the starting basis where possible
    basis = [-1] * nrow
    for j in range(nv):
        rows = [r for r in range(nrow) if A[r][j]]
        if len(rows) == 1 and A[rows[0]][j] == 1 and basis[rows[0]] < 0:
            basis[rows[0]] = j
    art_rows = [r for r in range(nrow) if basis[r] < 0]
    na = len(art_rows)
    width = nv + na + 1
    rows = [A[r] + [ZERO] * na + [b[r]] for r in range(nrow)]
    for k, r in enumerate(art_rows):
        rows[r][nv + k] = ONE
        basis[r] = nv + k

    obj = cost + [ZERO] * na + [ZERO]
    for r in range(nrow):
        cb = cost[basis[r]] if basis[r] < nv else ZERO
        if cb:
            obj = [o - cb * x for o, x in zip(obj, rows[r])]
    aux = [ZERO] * nv + [ONE] * na + [ZERO]
    for r in art_rows:
        aux = [o - x for o, x in zip(aux, rows[r])]
    tab = Tab(rows + [obj, aux])
    obj_row, aux_row = nrow, nrow + 1
    pivots = 0

    def run(target):
        nonlocal pivots
        while True:
            j = tab.entering(target, nv)
            if j < 0:
                return
            r = tab.leaving(j, basis, nrow)
            if r < 0:
                raise LPUnbounded("objective unbounded below")
            tab.pivot(r, j)
            basis[r] = j
            pivots += 1
            if pivots > max_pivots:
                raise EngineInvariantError("simplex pivot limit exceeded")

    if na:
        run(aux_row)
        if tab.get(aux_row, width - 1) != 0:
            raise LPInfeasible("no feasible point")
        # pivot zero-level artificials out; rows with no structural entry are redundant
        for r in range(nrow):
            if basis[r] >= nv:
                j = tab.first_nonzero(r, nv)
                if j >= 0:
                    tab.pivot(r, j)
                    basis[r] = j
    run(obj_row)

    x = [ZERO] * nv
    for r in range(nrow):
        if basis[r] < nv:
            x[basis[r]] = tab.get(r, width - 1)
    value = sum((c * xi for c, xi in zip(cost, x)), ZERO)
    if value != -tab.get(obj_row, width - 1):
        raise EngineInvariantError("objective row disagrees with the primal point")
    return LPSolution(tuple(x), value, frozenset(j for j in basis if j < nv), pivots)


# -- SELL ----------------------------------------------------------------------

@dataclass(frozen=True)
class SellLP:
    """How much must ``target`` receive so everyone else's demand fits?

    Variables, in order: ``x[i][j]`` row-major, ``gamma[i]``, ``sigma[i]``
    (slack of ``gamma_i <= d_i``).  Constraints: every slot fully assigned,
    bidder ``i`` holds exactly ``kappa_i`` slots, ``sum_j alpha_j x_ij -
    gamma_i = c_i`` and ``gamma_i + sigma_i = d_i``.
    """
    alpha: tuple
    kappa: tuple
    c: tuple
    d: tuple
    target: int

    @property
    def n(self) -> int:
        return len(self.kappa)

    @property
    def m(self) -> int:
        return len(self.alpha)

    @property
    def structural(self) -> int:
        return self.n * self.m + self.n

    def standard_form(self):
        n, m = self.n, self.m
        nv = n * m + 2 * n
        g0, s0 = n * m, n * m + n
        A, b = [], []
        for j in range(m):
            row = [ZERO] * nv
            for i in range(n):
                row[i * m + j] = ONE
            A.append(row)
            b.append(ONE)
        for i in range(n):
            row = [ZERO] * nv
            for j in range(m):
                row[i * m + j] = ONE
            A.append(row)
            b.append(Fraction(self.kappa[i]))
        for i in range(n):
            row = [ZERO] * nv
            for j in range(m):
                row[i * m + j] = Fraction(self.alpha[j])
            row[g0 + i] = -ONE
            A.append(row)
            b.append(Fraction(self.c[i]))
        for i in range(n):
            row = [ZERO] * nv
            row[g0 + i] = ONE
            row[s0 + i] = ONE
            A.append(row)
            b.append(Fraction(self.d[i]))
        cost = [ZERO] * nv
        cost[g0 + self.target] = ONE
        return A, b, cost


@dataclass(frozen=True)
class VertexSolution:
    values: tuple
    objective: Fraction
    basis: frozenset
    n: int
    m: int

    @property
    def X(self) -> tuple:
        m = self.m
        return tuple(tuple(self.values[i * m:(i + 1) * m]) for i in range(self.n))

    @property
    def gamma(self) -> tuple:
        k = self.n * self.m
        return tuple(self.values[k:k + self.n])


def solve_sell_lp(lp: SellLP, backend=None) -> VertexSolution:
    """Vertex minimising ``gamma[target]``; infeasibility is an engine bug."""
    A, b, cost = lp.standard_form()
    try:
        sol = simplex(A, b, cost, backend=backend)
    except (LPInfeasible, LPUnbounded) as exc:
        raise EngineInvariantError(f"SELL program for bidder {lp.target + 1}: {exc}") from exc
    return VertexSolution(sol.x, sol.objective, sol.basis, lp.n, lp.m)


# -- Pareto improvement ----------------------------------------------------------

def solve_improvement_lp(inst, alloc, backend=None) -> Fraction:
    """Largest total utility gain over all weakly-better legal alternatives.

    An alternative must leave every bidder at least as well off and the
    auctioneer with at least the same revenue; the result is ``0`` exactly
    when no Pareto improvement exists.  New payments may be any rational not
    exceeding the budget (transfers to a bidder are allowed).

    Divisible allocations are solved as an LP.  A sampled multi-round
    allocation is scored through its fractional image, which is a relaxation:
    ``0`` certifies optimality, a positive value is only an upper bound.
    Combinatorial allocations are scored by enumerating integral reassignments.
    """
    if isinstance(alloc, CombinatorialAllocation):
        return _combinatorial_gain(inst, alloc)
    if isinstance(alloc, IndivisibleAllocation):
        R = alloc.rounds
        n = inst.n
        X = []
        for i in range(n):
            X.append(tuple(Fraction(sum(1 for who in row if who == i + 1), R) for row in alloc.N))
        alloc = DivisibleAllocation(tuple(X), alloc.p, alloc.alpha)
    if not isinstance(alloc, DivisibleAllocation):
        raise TypeError(f"unsupported allocation type {type(alloc).__name__}")
    return _divisible_gain(inst, alloc, backend)


def _divisible_gain(inst, alloc, backend):
    # variables: x'[i][j], q_i (= b_i - p'_i >= 0), kappa slack, utility surplus, revenue slack
    n, m = inst.n, len(alloc.alpha)
    alpha = [Fraction(a) for a in alloc.alpha]
    v = [Fraction(b.valuation) for b in inst.bidders]
    budget = [b.budget for b in inst.bidders]
    caps = alloc.capacities
    u = [caps[i] * v[i] - alloc.p[i] for i in range(n)]
    q0 = n * m
    k0 = q0 + n
    s0 = k0 + n
    r0 = s0 + n
    nv = r0 + 1
    A, rhs = [], []
    for j in range(m):
        row = [ZERO] * nv
        for i in range(n):
            row[i * m + j] = ONE
        A.append(row)
        rhs.append(ONE)
    for i in range(n):
        row = [ZERO] * nv
        for j in range(m):
            row[i * m + j] = ONE
        row[k0 + i] = ONE
        A.append(row)
        rhs.append(Fraction(inst.bidders[i].kappa))
    for i in range(n):
        row = [ZERO] * nv
        for j in range(m):
            row[i * m + j] = v[i] * alpha[j]
        row[q0 + i] = ONE
        row[s0 + i] = -ONE
        A.append(row)
        rhs.append(u[i] + budget[i])
    row = [ZERO] * nv
    for i in range(n):
        row[q0 + i] = ONE
    row[r0] = ONE
    A.append(row)
    rhs.append(sum(budget, ZERO) - sum(alloc.p, ZERO))
    cost = [ZERO] * nv
    for i in range(n):
        for j in range(m):
            cost[i * m + j] = -v[i] * alpha[j]
        cost[q0 + i] = -ONE
    try:
        sol = simplex(A, rhs, cost, backend=backend)
    except LPInfeasible as exc:
        raise EngineInvariantError("improvement program infeasible for a legal allocation") from exc
    best = -sol.objective
    return best - sum((u[i] + budget[i] for i in range(n)), ZERO)


def reassignments(inst, rounds, slots_per_round, limit=500_000):
    """Every legal integral won-set tuple: per round, at most
    ``slots_per_round`` interested bidders each win one instance."""
    n = inst.n
    per_round = []
    for r in range(1, rounds + 1):
        who = [i for i in range(n) if r in (inst.bidders[i].interest or ())]
        opts = []
        for k in range(min(slots_per_round, len(who)) + 1):
            opts.extend(itertools.combinations(who, k))
        per_round.append(opts)
    total = 1
    for opts in per_round:
        total *= len(opts)
    if total > limit:
        raise ClinchError(f"{total} reassignments exceed the enumeration limit {limit}")
    for pick in itertools.product(*per_round):
        H = [set() for _ in range(n)]
        for r, winners in enumerate(pick, start=1):
            for i in winners:
                H[i].add(r)
        yield tuple(frozenset(h) for h in H)


def _combinatorial_gain(inst, alloc):
    # with payments unbounded below, H' is reachable iff the per-bidder
    # payment ceilings min(b_i, value_i(H') - u_i) can still raise sum(p)
    n = inst.n
    value = [inst.bidders[i].value_of(len(alloc.H[i])) for i in range(n)]
    u = [value[i] - alloc.p[i] for i in range(n)]
    welfare = sum(value)
    revenue = sum(alloc.p, ZERO)
    best = ZERO
    for H in reassignments(inst, alloc.rounds, alloc.slots_per_round):
        vals = [inst.bidders[i].value_of(len(H[i])) for i in range(n)]
        gain = sum(vals) - welfare
        if gain <= best:
            continue
        ceiling = sum((min(inst.bidders[i].budget, vals[i] - u[i]) for i in range(n)), ZERO)
        if ceiling >= revenue:
            best = Fraction(gain)
    return best
