"""JSON envelopes for curves, payments, mechanisms, vector allocations and reports.

Rationals travel as ``{"num": int, "den": int}``.  On input a bare integer or
a ``"p/q"`` string is accepted too.  Floats are written as JSON numbers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any

from .curves import (
    AllocationCurve,
    Cantor,
    PiecewiseConstant,
    PiecewisePolynomial,
    Scale,
    StepSeries,
    Sum,
    constant,
    identity,
    monomial,
    step,
)
from .discontinuity import DiscontinuitySet, Empty, Finite, GeometricAccumulation, union
from .mechanisms import Mechanism, PayYourBid
from .multidim import BundleTable, Diagonal, Linear, VectorAllocation
from .numbers import IntervalBound, as_fraction
from .payment import DirectPayment, MyersonPayment, PaymentCurve, PerturbedPayment


class SchemaError(ValueError):
    pass


def rational_to_json(x):
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator}
    return float(x)


def rational_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        try:
            return Fraction(int(obj["num"]), int(obj["den"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational {obj!r}") from exc
    if isinstance(obj, bool):
        raise SchemaError(f"bad rational {obj!r}")
    try:
        return as_fraction(obj)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {obj!r}") from exc


def _rats(xs):
    return [rational_to_json(x) for x in xs]


def _need(obj, key):
    if key not in obj:
        raise SchemaError(f"{obj.get('kind', 'object')!r} is missing {key!r}")
    return obj[key]


# -- curves -------------------------------------------------------------------

def curve_to_json(c: AllocationCurve) -> dict:
    if isinstance(c, PiecewiseConstant):
        out = {"kind": "piecewise_constant", "breakpoints": _rats(c.breakpoints), "values": _rats(c.values)}
        if c.point_values is not None:
            out["point_values"] = _rats(c.point_values)
        return out
    if isinstance(c, PiecewisePolynomial):
        return {
            "kind": "piecewise_polynomial",
            "breakpoints": _rats(c.breakpoints),
            "coefficients": [_rats(p) for p in c.coefficients],
        }
    if isinstance(c, Cantor):
        return {"kind": "cantor", "depth": c.depth}
    if isinstance(c, StepSeries):
        return {"kind": "step_series"}
    if isinstance(c, Sum):
        return {"kind": "sum", "left": curve_to_json(c.left), "right": curve_to_json(c.right)}
    if isinstance(c, Scale):
        return {"kind": "scale", "factor": rational_to_json(c.factor), "inner": curve_to_json(c.inner)}
    raise SchemaError(f"cannot serialize {type(c).__name__}")


def curve_from_json(obj) -> AllocationCurve:
    if not isinstance(obj, dict):
        raise SchemaError("a curve must be a JSON object")
    kind = obj.get("kind")
    try:
        if kind == "piecewise_constant":
            pv = obj.get("point_values")
            return PiecewiseConstant(
                [rational_from_json(q) for q in obj.get("breakpoints", [])],
                [rational_from_json(v) for v in _need(obj, "values")],
                None if pv is None else [rational_from_json(v) for v in pv],
            )
        if kind == "piecewise_polynomial":
            return PiecewisePolynomial(
                [rational_from_json(q) for q in obj.get("breakpoints", [])],
                [[rational_from_json(v) for v in p] for p in _need(obj, "coefficients")],
            )
        if kind == "step":
            return step(rational_from_json(_need(obj, "q")), rational_from_json(obj.get("height", 1)))
        if kind == "constant":
            return constant(rational_from_json(_need(obj, "value")))
        if kind == "identity":
            return identity()
        if kind == "monomial":
            return monomial(int(_need(obj, "degree")), rational_from_json(obj.get("coefficient", 1)))
        if kind == "cantor":
            return Cantor(int(obj.get("depth", 64)))
        if kind == "step_series":
            return StepSeries()
        if kind == "sum":
            return Sum(curve_from_json(_need(obj, "left")), curve_from_json(_need(obj, "right")))
        if kind == "scale":
            return Scale(rational_from_json(_need(obj, "factor")), curve_from_json(_need(obj, "inner")))
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid {kind} curve: {exc}") from exc
    raise SchemaError(f"unknown curve kind {kind!r}")


# -- payments -----------------------------------------------------------------

def payment_to_json(g: PaymentCurve) -> dict:
    if isinstance(g, MyersonPayment):
        return {"kind": "myerson", "curve": curve_to_json(g.curve), "C": rational_to_json(g.pivot)}
    if isinstance(g, DirectPayment):
        return {"kind": "direct", "curve": curve_to_json(g.curve)}
    if isinstance(g, PerturbedPayment):
        return {"kind": "perturbed", "base": payment_to_json(g.inner), "perturbation": curve_to_json(g.perturbation)}
    if isinstance(g, PayYourBid):
        return {"kind": "pay_your_bid", "curve": curve_to_json(g.curve)}
    raise SchemaError(f"cannot serialize {type(g).__name__}")


def payment_from_json(obj) -> PaymentCurve:
    if not isinstance(obj, dict):
        raise SchemaError("a payment must be a JSON object")
    kind = obj.get("kind")
    if kind == "myerson":
        return MyersonPayment(curve_from_json(_need(obj, "curve")), rational_from_json(obj.get("C", 0)))
    if kind == "direct":
        return DirectPayment(curve_from_json(_need(obj, "curve")))
    if kind == "perturbed":
        return PerturbedPayment(payment_from_json(_need(obj, "base")), curve_from_json(_need(obj, "perturbation")))
    if kind == "pay_your_bid":
        return PayYourBid(curve_from_json(_need(obj, "curve")))
    raise SchemaError(f"unknown payment kind {kind!r}")


# -- mechanisms and vector allocations ----------------------------------------

def mechanism_to_json(m: Mechanism) -> dict:
    out = {"family": m.family, "n": m.n, "payment": m.payment, "pivots": _rats(m.pivots)}
    if m.family == "top_k":
        out["k"] = m.k
    if m.family == "linear_capped":
        out["cap"] = rational_to_json(m.cap)
    return out


def mechanism_from_json(obj) -> Mechanism:
    if not isinstance(obj, dict):
        raise SchemaError("a mechanism must be a JSON object")
    pivots = [rational_from_json(c) for c in obj.get("pivots", [])]
    n = obj.get("n", len(pivots) or None)
    if n is None:
        raise SchemaError("mechanism needs 'n' or a full 'pivots' list")
    try:
        return Mechanism(
            _need(obj, "family"),
            int(n),
            k=int(obj.get("k", 1)),
            cap=rational_from_json(obj.get("cap", 1)),
            payment=obj.get("payment", "myerson"),
            pivots=tuple(pivots),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def vector_to_json(f: VectorAllocation) -> dict:
    if isinstance(f, Linear):
        return {"kind": "linear", "matrix": [_rats(r) for r in f.matrix]}
    if isinstance(f, Diagonal):
        return {"kind": "diagonal", "curves": [curve_to_json(c) for c in f.curves]}
    if isinstance(f, BundleTable):
        cells = [{"cell": list(k), "value": _rats(v)} for k, v in sorted(f.table.items())]
        return {"kind": "bundle_table", "cuts": [_rats(a) for a in f.cuts], "table": cells}
    raise SchemaError(f"cannot serialize {type(f).__name__}")


def vector_from_json(obj) -> VectorAllocation:
    kind = obj.get("kind") if isinstance(obj, dict) else None
    try:
        if kind == "linear":
            return Linear(tuple(tuple(rational_from_json(v) for v in r) for r in _need(obj, "matrix")))
        if kind == "diagonal":
            return Diagonal(tuple(curve_from_json(c) for c in _need(obj, "curves")))
        if kind == "bundle_table":
            table = {tuple(e["cell"]): tuple(rational_from_json(v) for v in e["value"]) for e in _need(obj, "table")}
            return BundleTable(tuple(tuple(rational_from_json(c) for c in a) for a in _need(obj, "cuts")), table)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid {kind} allocation: {exc}") from exc
    raise SchemaError(f"unknown vector allocation kind {kind!r}")


# -- reports --------------------------------------------------------------------

def to_jsonable(obj: Any):
    """Recursively turn dataclasses, brackets and rationals into JSON values."""
    if isinstance(obj, (Fraction, int)) and not isinstance(obj, bool):
        return rational_to_json(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, IntervalBound):
        return {"lower": to_jsonable(obj.lower), "upper": to_jsonable(obj.upper)}
    if isinstance(obj, AllocationCurve):
        return curve_to_json(obj)
    if isinstance(obj, PaymentCurve):
        return payment_to_json(obj)
    if is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return to_jsonable(obj.item())
    return obj


def dumps(obj, indent=2) -> str:
    return json.dumps(to_jsonable(obj), indent=indent, sort_keys=True) + "\n"


def _cell(v) -> str:
    if isinstance(v, (tuple, list)):
        return " ".join(_cell(c) for c in v)
    return str(v)


WITNESS_COLUMNS = ("x", "y", "lhs", "rhs", "slack")


def witnesses_to_csv(witnesses) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(WITNESS_COLUMNS)
    for w in witnesses:
        writer.writerow([_cell(getattr(w, c)) for c in WITNESS_COLUMNS])
    return buf.getvalue()


def loads(text: str, source: str = "<input>"):
    """``json.loads`` with the position folded into a SchemaError."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_file(path: str):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), path)


# -- discontinuity sets ---------------------------------------------------------

def discontinuity_from_json(obj) -> DiscontinuitySet:
    kind = obj.get("kind") if isinstance(obj, dict) else None
    try:
        if kind == "empty":
            return Empty()
        if kind == "finite":
            return Finite([rational_from_json(p) for p in _need(obj, "points")])
        if kind == "geometric":
            return GeometricAccumulation(
                rational_from_json(_need(obj, "limit")),
                rational_from_json(obj.get("scale", 1)),
                rational_from_json(obj.get("ratio", Fraction(1, 2))),
                int(obj.get("depth", 1)),
                bool(obj.get("include_limit", False)),
            )
        if kind == "union":
            return union(*(discontinuity_from_json(p) for p in _need(obj, "parts")))
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid {kind} set: {exc}") from exc
    raise SchemaError(f"unknown discontinuity set kind {kind!r}")
