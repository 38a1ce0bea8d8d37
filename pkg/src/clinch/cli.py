"""Command-line entry point.

Exit codes: 0 ok, 1 negative verdict, 2 bad input, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import __version__
from .errors import ClinchError, EngineInvariantError, InputError, ValidationError
from .io import (allocation_to_doc, emit_report, encode_value, instance_to_doc,
                 parse_allocation_file, parse_instance_file)
from .model import Mode, check_legal, make_instance, utilities

OK, NEGATIVE, BAD_INPUT, INTERNAL = 0, 1, 2, 3


def _approx(x) -> str:
    return f"~{float(x):.4f}"


def _write(doc, path):
    text = emit_report(doc, path)
    if path is None:
        sys.stdout.write(text)


def _summary(lines, quiet):
    if not quiet:
        for line in lines:
            print(line, file=sys.stderr)


def _outcome_doc(command, engine, inst, alloc, extra=None):
    u, revenue = utilities(inst, alloc)
    doc = {
        "command": command,
        "engine": engine,
        "version": __version__,
        "instance": instance_to_doc(inst),
        "allocation": allocation_to_doc(alloc),
        "capacities": encode_value(alloc.capacities),
        "utilities": encode_value(u),
        "revenue": encode_value(revenue),
        "legal": bool(check_legal(inst, alloc)),
    }
    doc.update(extra or {})
    return doc


def cmd_run_divisible(args):
    from .divisible import run_divisible
    inst = parse_instance_file(args.instance)
    alloc, trace = run_divisible(inst)
    _write(_outcome_doc("run-divisible", "divisible", inst, alloc), args.out)
    if args.trace:
        emit_report({"engine": "divisible", "events": trace.to_records()}, args.trace)
    _summary([f"capacities {_fmt(alloc.capacities)} (approx. "
              f"{', '.join(_approx(c) for c in alloc.capacities)})",
              f"payments   {_fmt(alloc.p)}"], args.quiet)
    return OK


def cmd_run_rounds(args):
    from .rounding import run_rounds
    inst = parse_instance_file(args.instance)
    res = run_rounds(inst, args.seed, rounds=args.rounds, cap=args.lambda_cap)
    extra = {"seed": args.seed, "lambda": res.discrete.lam,
             "columns": encode_value(res.columns),
             "divisible": allocation_to_doc(res.divisible),
             "expected_capacities": encode_value(res.divisible.capacities)}
    _write(_outcome_doc("run-rounds", "indivisible-rounds", inst, res.allocation, extra), args.out)
    _summary([f"lambda {res.discrete.lam}, seed {args.seed}, rounds {res.allocation.rounds}"],
             args.quiet)
    return OK


def cmd_run_combinatorial(args):
    from .combinatorial import run_combinatorial
    inst = parse_instance_file(args.instance)
    alloc, trace = run_combinatorial(inst)
    _write(_outcome_doc("run-combinatorial", "combinatorial", inst, alloc), args.out)
    if args.trace:
        emit_report({"engine": "combinatorial", "events": trace.to_records()}, args.trace)
    _summary([f"won rounds {[sorted(h) for h in alloc.H]}", f"payments {_fmt(alloc.p)}"],
             args.quiet)
    return OK


def cmd_verify(args):
    from .verify import pareto_verdict
    inst = parse_instance_file(args.instance)
    alloc = parse_allocation_file(args.allocation)
    legal = check_legal(inst, alloc)
    doc = {"command": "verify", "version": __version__, "legal": legal.legal,
           "violations": legal.violations}
    status = OK
    if not legal:
        doc["verdict"] = "illegal"
        status = NEGATIVE
    else:
        v = pareto_verdict(inst, alloc)
        doc.update({"verdict": v.status, "route": v.route, "gain": encode_value(v.gain),
                    "checks": encode_value(v.checks), "notes": v.notes,
                    "witness": _witness_doc(v.witness)})
        if v.notes and "routes disagree" in v.notes:
            raise EngineInvariantError("verification routes disagree")
        if v.status != "optimal":
            status = NEGATIVE
    _write(doc, args.out)
    _summary([f"verdict: {doc['verdict']}"], args.quiet)
    return status


def _witness_doc(w):
    if w is None:
        return None
    from .verify import TradingPath, TradingSwap
    if isinstance(w, TradingSwap):
        return {"kind": "trading-swap", "u": w.u + 1, "w": w.w + 1,
                "chain": [a + 1 for a in w.chain], "delta": encode_value(w.delta),
                "X": encode_value(w.X), "p": encode_value(w.p)}
    if isinstance(w, TradingPath):
        return {"kind": "trading-path", "bidders": [a + 1 for a in w.bidders],
                "items": list(w.items)}
    return encode_value(w)


def default_templates(engine):
    """Small desk instances whose valuations get swept by ``ic-grid``."""
    if engine == "combinatorial":
        return [
            make_instance([1, 1], [Fraction(5, 2), 4], [1], interests=[{1, 2}, {1, 2}],
                          rounds=2, mode=Mode.COMBINATORIAL),
            make_instance([1, 1, 1], [3, 2, 5], [1], interests=[{1, 2}, {2}, {1, 2}],
                          rounds=2, mode=Mode.COMBINATORIAL),
        ]
    return [
        make_instance([1, 1], [3, 5], [2, 1, 0], kappas=[1, 2]),
        make_instance([1, 1, 1], [3, 5, 2], [3, 1, 0]),
    ]


def cmd_ic_grid(args):
    from .verify import DeviationReport, ic_deviation_grid, ic_grid_sweep
    values = list(range(1, args.vmax + 1))
    reports = []
    if args.engine == "marginal":
        from .marginal import load_counterexample
        inst = parse_instance_file(args.instance) if args.instance else load_counterexample()
        lie = (inst.bidders[1].valuation[0],) * len(inst.bidders[1].valuation)
        reports.append(ic_deviation_grid(inst, "marginal", {2: [lie]}))
    else:
        templates = [parse_instance_file(args.instance)] if args.instance else default_templates(args.engine)
        for tpl in templates:
            reports.append(ic_grid_sweep(tpl, args.engine, values))
    merged = DeviationReport(args.engine)
    for r in reports:
        merged.checked += r.checked
        merged.runs += r.runs
        merged.profitable.extend(r.profitable)
    doc = {"command": "ic-grid", "engine": args.engine, "vmax": args.vmax,
           "version": __version__, "checked": merged.checked, "runs": merged.runs,
           "profitable": [{"bidder": d.bidder, "truth": encode_value(d.truth),
                           "report": encode_value(d.report),
                           "truthful_utility": encode_value(d.truthful_utility),
                           "deviating_utility": encode_value(d.deviating_utility),
                           "gain": encode_value(d.gain)} for d in merged.profitable]}
    _write(doc, args.out)
    _summary([f"{merged.checked} misreports checked, {len(merged.profitable)} profitable"],
             args.quiet)
    return NEGATIVE if merged.profitable else OK


def demo_document(report):
    a = report.branch_a
    return {
        "command": "demo-theorem7",
        "version": __version__,
        "truth": encode_value(report.truth),
        "misreport": encode_value(report.lie),
        "branch_a": {"label": "bidder 2 misreports; multi-unit clinching outcome",
                     "won_rounds": encode_value(a.H), "payments": encode_value(a.p),
                     "utilities": encode_value(report.branch_a_utilities)},
        "branch_b": {"label": "bidder 2 truthful; outcome forced by the allocation lemma "
                              "(not produced by any mechanism)",
                     "conditions": [{"label": q.label, "lhs": encode_value(q.lhs),
                                     "rhs": encode_value(q.rhs), "relation": q.relation,
                                     "holds": q.holds} for q in report.lemma.inequalities],
                     "favored_bidder": report.lemma.favored,
                     "units": encode_value(report.branch_b_units),
                     "payment_2": encode_value(report.branch_b_payments[1]),
                     "utility_2": encode_value(report.branch_b_utility_2)},
        "gain_from_lying": encode_value(report.gain),
        "divisible_engine": {"capacities": encode_value(report.divisible_capacities),
                             "payments": encode_value(report.divisible_payments)},
        "findings": report.findings,
    }


def cmd_demo(args):
    from .marginal import run_counterexample
    inst = parse_instance_file(args.instance) if args.instance else None
    report = run_counterexample(inst)
    _write(demo_document(report), args.out)
    _summary([f"branch A payments {_fmt(report.branch_a.p)}, utilities "
              f"{_fmt(report.branch_a_utilities)}",
              f"branch B utility of bidder 2: {report.branch_b_utility_2}",
              f"gain from lying: {report.gain}"] + report.findings, args.quiet)
    return OK if report.gain > 0 else NEGATIVE


def cmd_selftest(args):
    from .selftest import run_selftest
    results = run_selftest()
    failed = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
    return NEGATIVE if failed else OK


def _fmt(values):
    return "(" + ", ".join(str(Fraction(v)) for v in values) + ")"


def build_parser():
    p = argparse.ArgumentParser(prog="clinch", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write the JSON report here (default: stdout)")
        sp.add_argument("--quiet", action="store_true", help="suppress the human summary")

    sp = sub.add_parser("run-divisible", help="clinching auction for divisible slots")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--trace", help="write the event trace here")
    common(sp)
    sp.set_defaults(func=cmd_run_divisible)

    sp = sub.add_parser("run-rounds", help="divisible auction rounded into sampled rounds")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--rounds", type=int, help="override the instance round count")
    sp.add_argument("--lambda-cap", type=int, help="largest common denominator to accept")
    common(sp)
    sp.set_defaults(func=cmd_run_rounds)

    sp = sub.add_parser("run-combinatorial", help="combinatorial clinching auction")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--trace", help="write the event trace here")
    common(sp)
    sp.set_defaults(func=cmd_run_combinatorial)

    sp = sub.add_parser("verify", help="legality and Pareto verdict for an allocation")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--allocation", required=True)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("ic-grid", help="exhaustive misreport grid")
    sp.add_argument("--engine", required=True,
                    choices=["divisible", "rounds", "combinatorial", "marginal"])
    sp.add_argument("--vmax", type=int, default=6)
    sp.add_argument("--instance", help="template instance (valuations are swept)")
    common(sp)
    sp.set_defaults(func=cmd_ic_grid)

    sp = sub.add_parser("demo-theorem7", help="profitable misreport under diminishing marginals")
    sp.add_argument("--instance", help="override the packaged two-bidder instance")
    common(sp)
    sp.set_defaults(func=cmd_demo)

    sp = sub.add_parser("selftest", help="quick battery of exact checks")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except ClinchError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
