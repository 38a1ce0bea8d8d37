"""JSON documents for instances, allocations, traces and reports.

Rationals travel as ``"num/den"`` strings so every file is bit-exact and
diff-able.  Parsing collects every problem with its field path before
failing.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import re
from fractions import Fraction
from pathlib import Path

from .errors import InputError, ValidationError
from .model import (AuctionInstance, Bidder, CombinatorialAllocation,
                    DivisibleAllocation, IndivisibleAllocation, Mode, Slot,
                    validate_instance)

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


def encode_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def decode_rational(raw) -> Fraction:
    """Integers or ``"num/den"`` / ``"int"`` strings; never floats."""
    if isinstance(raw, bool):
        raise InputError(f"expected a rational, got {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise InputError(f"expected a rational string, got {type(raw).__name__} {raw!r}")
    m = _RATIONAL.match(raw)
    if not m:
        raise InputError(f"malformed rational {raw!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise InputError(f"zero denominator in {raw!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def encode_value(obj):
    """Recursively turn engine values into JSON-ready data."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return encode_rational(obj)
    if isinstance(obj, float):
        raise TypeError("floats are not allowed in machine-readable output")
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: encode_value(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): encode_value(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [encode_value(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [encode_value(v) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(encode_value(doc), sort_keys=True, indent=2) + "\n"


def emit_report(doc, path=None) -> str:
    """Serialise ``doc`` canonically; write it to ``path`` when given."""
    text = dumps(doc)
    if path is not None:
        Path(path).write_text(text)
    return text


# -- instances ---------------------------------------------------------------------

def _field(errors, where, fn, raw):
    try:
        return fn(raw)
    except InputError as exc:
        errors.append(f"{where}: {exc}")
        return None


def _integer(raw):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise InputError(f"expected an integer, got {raw!r}")
    return raw


def parse_instance(doc, validate=True) -> AuctionInstance:
    errors = []
    if not isinstance(doc, dict):
        raise InputError("instance document must be a JSON object")
    raw_mode = doc.get("mode", Mode.DIVISIBLE.value)
    try:
        mode = Mode(raw_mode)
    except ValueError:
        errors.append(f"mode: unknown mode {raw_mode!r}")
        mode = Mode.DIVISIBLE
    rounds = _field(errors, "rounds", _integer, doc.get("rounds", 1))
    bidders = []
    raw_bidders = doc.get("bidders")
    if not isinstance(raw_bidders, list):
        errors.append("bidders: expected a list")
        raw_bidders = []
    for k, rb in enumerate(raw_bidders):
        where = f"bidders[{k}]"
        if not isinstance(rb, dict):
            errors.append(f"{where}: expected an object")
            continue
        if "v_marginals" in rb:
            seq = rb["v_marginals"]
            if not isinstance(seq, list):
                errors.append(f"{where}.v_marginals: expected a list")
                value = None
            else:
                value = tuple(_field(errors, f"{where}.v_marginals[{q}]", _integer, x)
                              for q, x in enumerate(seq))
        elif "v" in rb:
            value = _field(errors, f"{where}.v", _integer, rb["v"])
        else:
            errors.append(f"{where}: missing v or v_marginals")
            value = None
        budget = _field(errors, f"{where}.b", decode_rational, rb.get("b"))
        kappa = _field(errors, f"{where}.kappa", _integer, rb.get("kappa", 1))
        interest = None
        if "interest" in rb:
            raw = rb["interest"]
            if not isinstance(raw, list):
                errors.append(f"{where}.interest: expected a list of round ids")
            else:
                interest = frozenset(_field(errors, f"{where}.interest[{q}]", _integer, x)
                                     for q, x in enumerate(raw))
        bidders.append(Bidder(k + 1, value, budget, kappa, interest))
    slots = []
    raw_slots = doc.get("slots")
    if not isinstance(raw_slots, list):
        errors.append("slots: expected a list")
        raw_slots = []
    for k, rs in enumerate(raw_slots):
        where = f"slots[{k}]"
        if not isinstance(rs, dict):
            errors.append(f"{where}: expected an object")
            continue
        alpha = _field(errors, f"{where}.alpha", decode_rational, rs.get("alpha"))
        slots.append(Slot(k + 1, alpha))
    if errors:
        raise InputError("; ".join(errors))
    inst = AuctionInstance(tuple(bidders), tuple(slots), rounds, mode)
    if validate:
        validate_instance(inst)
    return inst


def parse_instance_file(path, validate=True) -> AuctionInstance:
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_instance(doc, validate)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except ValidationError as exc:
        raise ValidationError([f"{path}: {v}" for v in exc.violations]) from exc


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def instance_to_doc(inst) -> dict:
    bidders = []
    for b in inst.bidders:
        rec = {"b": encode_rational(b.budget), "kappa": b.kappa}
        if isinstance(b.valuation, tuple):
            rec["v_marginals"] = list(b.valuation)
        else:
            rec["v"] = b.valuation
        if b.interest is not None:
            rec["interest"] = sorted(b.interest)
        bidders.append(rec)
    return {"mode": Mode(inst.mode).value, "rounds": inst.rounds, "bidders": bidders,
            "slots": [{"alpha": encode_rational(s.alpha)} for s in inst.slots]}


# -- allocations ------------------------------------------------------------------

def allocation_to_doc(alloc) -> dict:
    if isinstance(alloc, DivisibleAllocation):
        return {"type": "divisible", "X": encode_value(alloc.X), "p": encode_value(alloc.p),
                "alpha": encode_value(alloc.alpha), "slot_ids": list(alloc.slot_ids)}
    if isinstance(alloc, IndivisibleAllocation):
        return {"type": "indivisible-rounds", "N": encode_value(alloc.N),
                "p": encode_value(alloc.p), "alpha": encode_value(alloc.alpha),
                "seed": alloc.seed, "lambda": alloc.lam, "slot_ids": list(alloc.slot_ids)}
    if isinstance(alloc, CombinatorialAllocation):
        return {"type": "combinatorial", "H": encode_value(alloc.H), "p": encode_value(alloc.p),
                "b_star": encode_value(alloc.b_star), "slots_per_round": alloc.slots_per_round,
                "rounds": alloc.rounds}
    raise TypeError(f"unsupported allocation type {type(alloc).__name__}")


def _rationals(raw, where, errors):
    if not isinstance(raw, list):
        errors.append(f"{where}: expected a list")
        return ()
    return tuple(_field(errors, f"{where}[{k}]", decode_rational, x) for k, x in enumerate(raw))


def allocation_from_doc(doc):
    if not isinstance(doc, dict):
        raise InputError("allocation document must be a JSON object")
    if "allocation" in doc and isinstance(doc["allocation"], dict):
        doc = doc["allocation"]
    errors = []
    kind = doc.get("type")
    p = _rationals(doc.get("p"), "p", errors)
    if kind == "divisible":
        rows = doc.get("X")
        if not isinstance(rows, list):
            errors.append("X: expected a list of rows")
            rows = []
        X = tuple(_rationals(r, f"X[{k}]", errors) for k, r in enumerate(rows))
        alpha = _rationals(doc.get("alpha"), "alpha", errors)
        out = DivisibleAllocation(X, p, alpha, tuple(doc.get("slot_ids", ())))
    elif kind == "indivisible-rounds":
        N = doc.get("N")
        if not isinstance(N, list) or not all(isinstance(r, list) for r in N):
            errors.append("N: expected a list of rows")
            N = []
        alpha = _rationals(doc.get("alpha"), "alpha", errors)
        out = IndivisibleAllocation(tuple(tuple(r) for r in N), p, alpha, doc.get("seed"),
                                    tuple(doc.get("slot_ids", ())), doc.get("lambda"))
    elif kind == "combinatorial":
        H = doc.get("H")
        if not isinstance(H, list):
            errors.append("H: expected a list of round lists")
            H = []
        b_star = _rationals(doc.get("b_star"), "b_star", errors)
        out = CombinatorialAllocation(tuple(frozenset(h) for h in H), p, b_star,
                                      doc.get("slots_per_round", 1), doc.get("rounds", 1))
    else:
        raise InputError(f"type: unknown allocation type {kind!r}")
    if errors:
        raise InputError("; ".join(errors))
    return out


def parse_allocation_file(path):
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return allocation_from_doc(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc
