"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed as each test finishes and again in the terminal
summary (see ``conftest.py``).
"""

import functools
import math
import random
import time
from fractions import Fraction as F

import pytest

from clinch import _kernel
from clinch.cli import default_templates, demo_document
from clinch.combinatorial import run_combinatorial
from clinch.divisible import run_divisible
from clinch.errors import ValidationError
from clinch.flow import s_avoid_matching
from clinch.lp import solve_improvement_lp, solve_sell_lp
from clinch.marginal import load_counterexample, run_counterexample
from clinch.model import (CombinatorialAllocation, DivisibleAllocation, Mode,
                          check_legal, make_instance, validate_instance)
from clinch.rounding import (LambdaCapExceeded, badness, round_allocation,
                             sample_rounds, swap_columns)
from clinch.verify import (find_trading_path, find_trading_swap,
                           ic_deviation_grid, ic_grid_sweep, pareto_verdict,
                           simple_trading_paths)
from conftest import ACCEPTANCE
from corpus import (combinatorial_corpus, divisible_corpus,
                    random_legal_divisible)
from oracles import avoid_optimum, lp_minimum, vertices
from test_flow import random_graph
from test_lp import random_sell_lp
from test_rounding import column_unique, random_matrix, rows_preserved

CORPUS_SIZE = 500
FIVE_MINUTES = 300.0


def criterion(number, title):
    """The wrapped body returns ``(ok, detail)``; any exception is a FAIL."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                ok, detail = fn(*args, **kwargs)
            except Exception as exc:
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
            ACCEPTANCE.append(line)
            print(line)
            assert ok, line
        return run
    return wrap


@pytest.fixture(scope="module")
def divisible_outputs():
    t0 = time.perf_counter()
    out = []
    for inst in divisible_corpus(CORPUS_SIZE):
        alloc, _ = run_divisible(inst)
        out.append((inst, alloc))
    return out, time.perf_counter() - t0


# 1 ---------------------------------------------------------------------------

@criterion(1, "diminishing-marginals misreport demo")
def test_criterion_1_demo():
    t0 = time.perf_counter()
    report = run_counterexample(load_counterexample())
    doc = demo_document(report)
    elapsed = time.perf_counter() - t0
    ok = (report.branch_a.p == (F(2), F(3, 2))
          and report.branch_a_utilities == (F(3), F(1, 2))
          and report.branch_b_utility_2 == 0
          and report.gain == F(1, 2)
          and doc["gain_from_lying"] == "1/2"
          and elapsed < 1.0)
    return ok, (f"branch A p={tuple(map(str, report.branch_a.p))} "
                f"u={tuple(map(str, report.branch_a_utilities))}, branch B u_2="
                f"{report.branch_b_utility_2}, gain {report.gain}, {elapsed:.3f}s")


# 2 ---------------------------------------------------------------------------

def _one_item(b, winner, price):
    inst = make_instance([1, 2], b, [1], interests=[{1}, {1}], mode=Mode.COMBINATORIAL)
    H = [frozenset(), frozenset()]
    p = [F(0), F(0)]
    if winner is not None:
        H[winner] = frozenset({1})
        p[winner] = F(price)
    return inst, CombinatorialAllocation(tuple(H), tuple(p),
                                         tuple(F(b[i]) - p[i] for i in range(2)), 1, 1)


@criterion(2, "one-item worked examples")
def test_criterion_2_one_item_examples():
    t0 = time.perf_counter()
    to_high = pareto_verdict(*_one_item([1, 1], 1, 1))
    to_low = pareto_verdict(*_one_item([1, F(1, 2)], 0, 1))
    unsold = pareto_verdict(*_one_item([1, 1], None, 0))
    elapsed = time.perf_counter() - t0
    ok = (to_high.status == "optimal" and to_low.status == "optimal"
          and unsold.status == "improvable" and not (to_high.notes or to_low.notes or unsold.notes)
          and elapsed < 1.0)
    return ok, (f"item to bidder 2: {to_high.status}; item to bidder 1 with v_1 > b_2: "
                f"{to_low.status}; unsold: {unsold.status}; {elapsed:.3f}s")


# 3 ---------------------------------------------------------------------------

@criterion(3, "divisible outputs admit no trading swap and no LP gain")
def test_criterion_3_no_swap(divisible_outputs):
    outputs, engine_time = divisible_outputs
    t0 = time.perf_counter()
    swaps = gains = illegal = 0
    for inst, alloc in outputs:
        illegal += not check_legal(inst, alloc)
        swaps += find_trading_swap(inst, alloc) is not None
        gains += solve_improvement_lp(inst, alloc) != 0
    elapsed = engine_time + time.perf_counter() - t0
    ok = len(outputs) >= 500 and swaps == gains == illegal == 0 and elapsed < FIVE_MINUTES
    return ok, (f"{len(outputs)} instances, {swaps} swaps, {gains} positive gains, "
                f"{illegal} illegal, {elapsed:.1f}s")


# 4 ---------------------------------------------------------------------------

def _perturbed(rng, inst, alloc):
    """Either a fresh random legal allocation or the engine output blended
    with one, payments scaled within the budgets."""
    other = random_legal_divisible(rng, inst, alloc.alpha)
    if rng.random() < 0.5:
        return other
    t = F(rng.randint(1, 3), 4)
    X = tuple(tuple((1 - t) * a + t * b for a, b in zip(r1, r2))
              for r1, r2 in zip(alloc.X, other.X))
    p = tuple(min(b.budget, pi * F(rng.randint(2, 6), 4))
              for pi, b in zip(alloc.p, inst.bidders))
    return DivisibleAllocation(X, p, alloc.alpha, alloc.slot_ids)


@criterion(4, "closure condition, swap witness and improvement LP agree")
def test_criterion_4_routes_agree(divisible_outputs):
    outputs, _ = divisible_outputs
    rng = random.Random(404)
    cases = [(inst, alloc) for inst, alloc in outputs]
    perturbed = []
    for inst, alloc in outputs[:150]:
        alt = _perturbed(rng, inst, alloc)
        assert check_legal(inst, alt)
        perturbed.append((inst, alt))
    disagree = skipped = 0
    status = {}
    for inst, alloc in cases + perturbed:
        v = pareto_verdict(inst, alloc)
        if "closure" not in v.checks:
            skipped += 1
        if "routes disagree" in v.notes:
            disagree += 1
        status[v.status] = status.get(v.status, 0) + 1
    ok = (len(perturbed) >= 100 and disagree == 0 and skipped == 0
          and status.get("improvable", 0) > 0)
    return ok, (f"{len(cases)} engine + {len(perturbed)} perturbed allocations, "
                f"{disagree} disagreements, {skipped} without all three routes, "
                f"verdicts {dict(sorted(status.items()))}")


# 5 ---------------------------------------------------------------------------

def _monte_carlo(inst, res, samples, seed):
    """Worst standardised deviation over bidders; inf when a zero-variance
    bidder moves at all."""
    alloc = res.divisible
    lam = res.discrete.lam
    alpha = alloc.alpha
    sampled = sample_rounds(res.columns, samples, seed, alloc.p, alpha)
    worst = 0.0
    for i in range(inst.n):
        # per-column capacity, exact; its mean is the rounding expectation
        per_col = [sum((a for a, row in zip(alpha, res.columns) if row[c] == i + 1), F(0))
                   for c in range(lam)]
        expect = sum(alpha[j] * res.discrete.Y[i][j] for j in range(len(alpha))) / F(lam)
        var = sum((z - expect) ** 2 for z in per_col) / lam
        total = sum((a for j, a in enumerate(alpha) for who in sampled.N[j] if who == i + 1),
                    F(0))
        mean = total / samples
        if var == 0:
            if mean != expect:
                return math.inf
            continue
        sigma = math.sqrt(var / samples)
        worst = max(worst, abs(float(mean - expect)) / sigma)
    return worst


@criterion(5, "rounding: utility equivalence, swap postconditions, sampling")
def test_criterion_5_rounding(divisible_outputs):
    outputs, _ = divisible_outputs
    t0 = time.perf_counter()
    rounded, refused, mismatched, results = 0, 0, 0, []
    for inst, alloc in outputs:
        try:
            res = round_allocation(inst, alloc, 1, 0)
        except LambdaCapExceeded:
            refused += 1
            continue
        rounded += 1
        cols = res.columns
        lam = res.discrete.lam
        for i in range(inst.n):
            share = sum((a * F(row.count(i + 1), lam) for a, row in zip(alloc.alpha, cols)), F(0))
            mismatched += share != alloc.capacities[i]
        results.append((inst, res))

    rng = random.Random(505)
    matrices = broken = rising = 0
    for _ in range(1000):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        M = random_matrix(rng, rows, cols, rng.randint(rows, rows + 3))
        trail = [badness(M)]
        out = swap_columns(M, lambda snap: trail.append(badness(snap)))
        matrices += 1
        broken += not (rows_preserved(M, out) and column_unique(out))
        rising += any(b >= a for a, b in zip(trail, trail[1:]))

    samples = 10 ** 5
    picked = [(inst, res) for inst, res in results if res.discrete.lam > 1 and inst.n > 1][:6]
    z = max(_monte_carlo(inst, res, samples, 7 + k) for k, (inst, res) in enumerate(picked))
    elapsed = time.perf_counter() - t0
    ok = (mismatched == 0 and rounded > 0 and broken == 0 and rising == 0 and matrices >= 1000
          and len(picked) == 6 and z <= 3 and elapsed < FIVE_MINUTES)
    return ok, (f"utility equivalence exact on {rounded} engine outputs ({refused} refused by "
                f"the lambda cap), {matrices} random matrices with {broken} postcondition "
                f"failures and {rising} non-decreasing badness steps, Monte Carlo over "
                f"{samples} rounds on {len(picked)} outputs worst |z| = {z:.2f}, {elapsed:.1f}s")


# 6 ---------------------------------------------------------------------------

@criterion(6, "combinatorial outputs sell everything with no trading path")
def test_criterion_6_combinatorial():
    t0 = time.perf_counter()
    corpus = combinatorial_corpus(300)
    unsold = paths = brute = illegal = 0
    for inst in corpus:
        validate_instance(inst)
        alloc, _ = run_combinatorial(inst)
        illegal += not check_legal(inst, alloc)
        unsold += alloc.sold_count() != inst.m * inst.rounds
        paths += find_trading_path(inst, alloc) is not None
        brute += bool(simple_trading_paths(inst, alloc))
    elapsed = time.perf_counter() - t0
    ok = len(corpus) >= 300 and unsold == paths == brute == illegal == 0 and elapsed < FIVE_MINUTES
    return ok, (f"{len(corpus)} instances, {unsold} with unsold instances, {paths} trading "
                f"paths (search), {brute} (enumeration), {elapsed:.1f}s")


# 7 ---------------------------------------------------------------------------

@criterion(7, "misreport grids")
def test_criterion_7_incentives():
    values = list(range(1, 7))
    parts = []
    ok = True
    for engine in ("divisible", "combinatorial"):
        templates = default_templates(engine)
        if engine == "divisible":
            templates = [make_instance([1], [4], [2, 1])] + templates
        else:
            templates = [make_instance([1], [4], [1], interests=[{1, 2}], rounds=2,
                                       mode=Mode.COMBINATORIAL)] + templates
        checked = found = 0
        for tpl in templates:
            assert tpl.n <= 3
            rep = ic_grid_sweep(tpl, engine, values)
            checked += rep.checked
            found += len(rep.profitable)
        ok &= found == 0 and checked > 0
        parts.append(f"{engine}: {found} profitable of {checked}")
    demo = ic_deviation_grid(load_counterexample(), "marginal", {2: [(2, 2)]})
    ok &= len(demo.profitable) == 1 and demo.profitable[0].gain == F(1, 2)
    parts.append(f"marginal demo: {len(demo.profitable)} profitable (gain "
                 f"{demo.profitable[0].gain if demo.profitable else 0})")
    return ok, "; ".join(parts)


# 8 ---------------------------------------------------------------------------

@criterion(8, "solver oracles")
def test_criterion_8_oracles():
    rng = random.Random(808)
    lps = lp_bad = 0
    for _ in range(40):
        lp = random_sell_lp(rng, 2, rng.randint(2, 4))
        A, b, cost = lp.standard_form()
        assert len(cost) <= 12
        for backend in sorted(_kernel.BACKENDS):
            sol = solve_sell_lp(lp, backend=backend)
            lp_bad += sol.objective != lp_minimum(A, b, cost) or sol.values not in vertices(A, b)
        lps += 1
    graphs = flow_bad = 0
    while graphs < 300:
        g = random_graph(rng)
        if len(g.edges) > 10:
            continue
        S = {a for a in g.bidders if rng.random() < 0.4}
        best, load, count = avoid_optimum(g.bidders, g.demand, g.supply, g.edges, S)
        if count > 20:
            continue
        mt = s_avoid_matching(g, S)
        flow_bad += (mt.total, mt.avoided_load) != (best, load)
        graphs += 1
    ok = lp_bad == 0 and flow_bad == 0
    return ok, (f"{lps} SELL programs x {len(_kernel.BACKENDS)} backends vs vertex enumeration: "
                f"{lp_bad} mismatches; {graphs} graphs vs B-matching enumeration: "
                f"{flow_bad} mismatches")
