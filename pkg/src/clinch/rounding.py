"""Turn a fractional allocation into sampled per-round slot assignments.

Pipeline: scale shares to integers over a common denominator (one column per
unit), split each bidder into ``kappa_i`` pseudo-bidders, swap entries inside
rows until no pseudo-bidder repeats in a column, merge pseudo-bidders back,
and draw one column per round.
"""

from __future__ import annotations

import heapq
import os
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import ClinchError, EngineInvariantError
from .model import IndivisibleAllocation, lcm_denominator

DEFAULT_LAMBDA_CAP = 10 ** 6


class LambdaCapExceeded(ClinchError):
    pass


def lambda_cap() -> int:
    raw = os.environ.get("CLINCH_LAMBDA_CAP")
    return int(raw) if raw else DEFAULT_LAMBDA_CAP


@dataclass(frozen=True)
class DiscreteMatrix:
    lam: int
    Y: tuple
    M: tuple

    @property
    def columns(self) -> int:
        return self.lam


@dataclass(frozen=True)
class PseudoMatrix:
    M: tuple
    owner: tuple  # owner[k - 1] = (bidder id, copy number) of pseudo-id k


def discretize(alloc, cap=None) -> DiscreteMatrix:
    """Scale ``X`` by the common denominator and lay each row out as runs."""
    cap = lambda_cap() if cap is None else cap
    X = alloc.X
    n, m = len(X), len(X[0]) if X else 0
    lam = lcm_denominator([x for row in X for x in row])
    if lam > cap:
        raise LambdaCapExceeded(
            f"common denominator {lam} exceeds the cap {cap}; raise CLINCH_LAMBDA_CAP to proceed")
    Y = tuple(tuple(int(X[i][j] * lam) for j in range(m)) for i in range(n))
    M = []
    for j in range(m):
        row = []
        for i in range(n):
            row.extend([i + 1] * Y[i][j])
        if len(row) != lam:
            raise EngineInvariantError(f"slot {j + 1} shares do not sum to one")
        M.append(tuple(row))
    return DiscreteMatrix(lam, Y, tuple(M))


def expand_pseudo(M, kappa) -> PseudoMatrix:
    """Relabel entries so every label occurs at most ``|C|`` times.

    Occurrences of bidder ``i`` are numbered row-major from 1; occurrence
    ``l`` goes to copy ``(l - 1) // |C|`` of ``i``.
    """
    C = len(M[0]) if M else 0
    offset = [0]
    for k in kappa:
        offset.append(offset[-1] + k)
    seen = [0] * len(kappa)
    out = []
    for row in M:
        new = []
        for who in row:
            seen[who - 1] += 1
            copy = (seen[who - 1] - 1) // C
            if copy >= kappa[who - 1]:
                raise EngineInvariantError(
                    f"bidder {who} occupies more than {C} x {kappa[who - 1]} entries")
            new.append(offset[who - 1] + copy + 1)
        out.append(tuple(new))
    owner = tuple((i + 1, c) for i, k in enumerate(kappa) for c in range(k))
    return PseudoMatrix(tuple(out), owner)


def badness(M) -> int:
    """Entries minus occupied columns, summed over values."""
    count = {}
    cols = {}
    for row in M:
        for c, v in enumerate(row):
            count[v] = count.get(v, 0) + 1
            cols.setdefault(v, set()).add(c)
    return sum(count[v] - len(cols[v]) for v in count)


def value_badness(M, value) -> int:
    entries = sum(1 for row in M for v in row if v == value)
    columns = len({c for row in M for c, v in enumerate(row) if v == value})
    return entries - columns


def swap_columns(M, observer=None) -> tuple:
    """Swap entries within rows until each value is unique per column.

    Values are handled in increasing order.  For value ``i`` the path starts
    in the leftmost column holding ``i`` twice and ends in the leftmost
    column missing it; each step takes the topmost row that still holds the
    carried value.  Per-column counts are kept incrementally and the two
    leftmost columns come from heaps, so the choices are the same as a full
    rescan.

    ``observer``, if given, is called with a snapshot of the matrix after
    every alternating swap path.
    """
    m = [list(row) for row in M]
    rows = len(m)
    cols = len(m[0]) if m else 0
    if not rows:
        return ()
    total = {}
    for row in m:
        for v in row:
            total[v] = total.get(v, 0) + 1
    for v, k in total.items():
        if k > cols:
            raise EngineInvariantError(f"value {v} occurs {k} times in {cols} columns")
    count = [dict() for _ in range(cols)]
    for row in m:
        for c, v in enumerate(row):
            count[c][v] = count[c].get(v, 0) + 1

    def put(k, c, v):
        old = m[k][c]
        cnt = count[c]
        cnt[old] -= 1
        cnt[v] = cnt.get(v, 0) + 1
        m[k][c] = v

    for i in range(1, max(total) + 1):
        over = [c for c in range(cols) if count[c].get(i, 0) > 1]
        empty = [c for c in range(cols) if not count[c].get(i, 0)]
        heapq.heapify(over)
        heapq.heapify(empty)
        while over:
            a = over[0]
            b = heapq.heappop(empty)
            cur = i
            k = -1
            while True:
                k = min(j for j in range(rows) if j != k and m[j][a] == cur)
                other = m[k][b]
                put(k, b, cur)
                put(k, a, other)
                cur = other
                if count[a].get(cur, 0) == 1 or count[b].get(cur, 0) > 0:
                    break
            if count[a].get(i, 0) <= 1:
                heapq.heappop(over)
            if observer is not None:
                observer(tuple(tuple(r) for r in m))
    return tuple(tuple(r) for r in m)


def collapse(M, kappa) -> tuple:
    """Map pseudo-ids back to bidders: the first ``v`` whose cumulative cap
    reaches the pseudo-id."""
    bounds = []
    acc = 0
    for k in kappa:
        acc += k
        bounds.append(acc)

    def owner(label):
        for v, bound in enumerate(bounds, start=1):
            if bound >= label:
                return v
        raise EngineInvariantError(f"pseudo-id {label} beyond all bidders")

    return tuple(tuple(owner(x) for x in row) for row in M)


def row_share(Mp, bidder, alpha) -> Fraction:
    """Weighted capacity a uniformly random column of ``Mp`` gives ``bidder``."""
    lam = len(Mp[0])
    return sum((Fraction(row.count(bidder), lam) * a for row, a in zip(Mp, alpha)), Fraction(0))


def sample_rounds(Mp, rounds, seed, payments, alpha, slot_ids=()) -> IndivisibleAllocation:
    """Draw ``rounds`` columns of ``Mp`` uniformly with a seeded Mersenne Twister."""
    rng = random.Random(seed)
    lam = len(Mp[0])
    picks = [rng.randrange(lam) for _ in range(rounds)]
    N = tuple(tuple(row[c] for c in picks) for row in Mp)
    return IndivisibleAllocation(N, tuple(payments), tuple(alpha), seed, tuple(slot_ids), lam)


@dataclass(frozen=True)
class RoundingResult:
    divisible: object
    discrete: DiscreteMatrix
    pseudo: PseudoMatrix
    swapped: tuple
    columns: tuple
    allocation: IndivisibleAllocation
    trace: object = None


def round_allocation(inst, alloc, rounds, seed, cap=None) -> RoundingResult:
    kappa = tuple(b.kappa for b in inst.bidders)
    disc = discretize(alloc, cap)
    pseudo = expand_pseudo(disc.M, kappa)
    swapped = swap_columns(pseudo.M)
    Mp = collapse(swapped, kappa)
    for i in range(len(kappa)):
        if row_share(Mp, i + 1, alloc.alpha) != alloc.capacities[i]:
            raise EngineInvariantError(f"rounding changed the expected capacity of bidder {i + 1}")
    sampled = sample_rounds(Mp, rounds, seed, alloc.p, alloc.alpha, alloc.slot_ids)
    return RoundingResult(alloc, disc, pseudo, swapped, Mp, sampled)


def run_rounds(inst, seed, rounds=None, backend=None, cap=None) -> RoundingResult:
    """Divisible auction followed by rounding into ``rounds`` sampled rounds."""
    from .divisible import run_divisible
    alloc, trace = run_divisible(inst, backend=backend)
    res = round_allocation(inst, alloc, rounds or inst.rounds, seed, cap)
    return RoundingResult(res.divisible, res.discrete, res.pseudo, res.swapped,
                          res.columns, res.allocation, trace)
