"""Command-line front end.

Exit codes: 0 all checks passed, 1 violation found, 2 inconclusive
brackets, 3 input or precondition error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from . import serialize
from .curves import Cantor, StepSeries, step
from .discontinuity import Unsupported, classify_species
from .grid import GridSpec
from .ic_check import (
    InconclusiveBracket,
    PreconditionNotIC,
    check_ic_pairs,
    check_revenue_equivalence,
)
from .mechanisms import run, verify_truthfulness
from .numbers import IntervalBound, as_fraction, format_number
from .payment import MyersonPayment, NotMonotone, myerson_payment, naive_by_parts_payment

EXIT_PASS, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _fmt(v) -> str:
    if isinstance(v, IntervalBound):
        return str(v)
    if isinstance(v, (tuple, list)):
        return "(" + ", ".join(_fmt(c) for c in v) + ")"
    return format_number(v)


class Output:
    """Collects the report and writes it once in the requested format."""

    def __init__(self, args):
        self.format = args.format
        self.path = args.out

    def emit(self, data, text_lines: List[str], csv_text: Optional[str] = None):
        if self.format == "json":
            body = serialize.dumps(data)
        elif self.format == "csv":
            body = csv_text if csv_text is not None else _flat_csv(data)
        else:
            body = "\n".join(text_lines) + "\n"
        if self.path:
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(body)
        else:
            sys.stdout.write(body)


def _flat_csv(data: dict) -> str:
    rows = ["key,value"]
    for k, v in data.items():
        rows.append(f"{k},{_fmt(v) if not isinstance(v, dict) else serialize.dumps(v, None).strip()}")
    return "\n".join(rows) + "\n"


def _load_curve(path):
    return serialize.curve_from_json(serialize.load_file(path))


def _load_payment(path):
    return serialize.payment_from_json(serialize.load_file(path))


# -- subcommands ------------------------------------------------------------------

def cmd_eval(args, out: Output) -> int:
    f = _load_curve(args.curve)
    rows = [(x, f(x)) for x in args.x]
    out.emit({"values": [{"x": x, "f": v} for x, v in rows]},
             [f"f({_fmt(x)}) = {_fmt(v)}" for x, v in rows])
    return EXIT_PASS


def cmd_integrate(args, out: Output) -> int:
    f = _load_curve(args.curve)
    tol = 1e-9 if args.tol is None else args.tol
    b = f.integrate(args.a, args.b, tol)
    out.emit({"a": args.a, "b": args.b, "integral": b, "exact": b.exact},
             [f"int_{_fmt(args.a)}^{_fmt(args.b)} f = {b}"])
    return EXIT_PASS


def cmd_payment(args, out: Output) -> int:
    if args.payment:
        g = _load_payment(args.payment[0])
    elif args.curve:
        g = myerson_payment(_load_curve(args.curve), args.C)
    else:
        raise InputError("payment needs --payment or --curve")
    rows = [(x, g.evaluate(x)) for x in args.x]
    out.emit({"C": g.pivot, "values": [{"x": x, "g": v} for x, v in rows]},
             [f"g({_fmt(x)}) = {v}" for x, v in rows])
    return EXIT_PASS


def _report_lines(report) -> List[str]:
    verdict = "passed" if report.passed else "FAILED"
    lines = [f"IC check {verdict}: {report.pairs_checked} pairs, {len(report.witnesses)} witnesses"]
    for w in report.witnesses[:20]:
        lines.append(f"  x={_fmt(w.x)} y={_fmt(w.y)}: g(y)-g(x) = {_fmt(w.lhs)} < {_fmt(w.rhs)} = x(f(y)-f(x))")
    if len(report.witnesses) > 20:
        lines.append(f"  ... {len(report.witnesses) - 20} more")
    return lines


def cmd_check_ic(args, out: Output) -> int:
    f = _load_curve(args.curve)
    g = _load_payment(args.payment[0]) if args.payment else MyersonPayment(f)
    try:
        report = check_ic_pairs(f, g, args.grid, args.tol)
    except InconclusiveBracket as exc:
        out.emit({"verdict": "inconclusive", "report": exc.report},
                 [f"inconclusive: {exc}"], serialize.witnesses_to_csv([]))
        return EXIT_INCONCLUSIVE
    out.emit({"verdict": "passed" if report.passed else "violation", "report": report},
             _report_lines(report), serialize.witnesses_to_csv(report.witnesses))
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def cmd_check_re(args, out: Output) -> int:
    f = _load_curve(args.curve)
    if not args.payment or len(args.payment) != 2:
        raise InputError("check-re needs exactly two --payment files")
    g1, g2 = (_load_payment(p) for p in args.payment)
    try:
        report = check_revenue_equivalence(f, g1, g2, args.grid, args.tol)
    except PreconditionNotIC as exc:
        out.emit({"verdict": "precondition", "which": exc.which, "report": exc.report},
                 [str(exc)], serialize.witnesses_to_csv(exc.report.witnesses))
        return EXIT_INPUT
    except InconclusiveBracket as exc:
        out.emit({"verdict": "inconclusive"}, [f"inconclusive: {exc}"])
        return EXIT_INCONCLUSIVE
    lines = [f"g2 - g1 = {_fmt(report.constant_diff)} (spread {_fmt(report.spread)})"]
    if not report.passed:
        lines.append("payments do not differ by a constant on the grid")
    out.emit({"verdict": "passed" if report.passed else "violation", "report": report}, lines)
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def cmd_classify(args, out: Output) -> int:
    if args.set:
        s = serialize.discontinuity_from_json(serialize.load_file(args.set))
    elif args.curve:
        s = _load_curve(args.curve).discontinuities()
    else:
        raise InputError("classify needs --curve or --set")
    kind = classify_species(s)
    label = "unsupported" if kind is Unsupported else kind
    out.emit({"species_type": label, "set": repr(s)}, [f"first species, type {label}" if kind is not Unsupported
                                                       else "not classifiable"])
    return EXIT_PASS if kind is not Unsupported else EXIT_INCONCLUSIVE


def cmd_simulate(args, out: Output) -> int:
    m = serialize.mechanism_from_json(serialize.load_file(args.mechanism))
    valuations = args.valuations or args.bids
    if not valuations:
        raise InputError("simulate needs --valuations (and optionally --bids)")
    bids = args.bids or valuations
    try:
        outcome = run(m, bids, valuations)
        report = verify_truthfulness(m, valuations, args.grid, args.tol or 0, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    lines = [
        f"allocation a = {_fmt(outcome.allocation)}",
        f"payments   p = {_fmt(outcome.payments)}",
        f"utilities  u = {_fmt(outcome.utilities)}",
        f"truthfulness {'holds' if report.passed else 'FAILS'}: "
        f"{report.profiles_checked} opponent profiles, {report.deviations_checked} deviations",
    ]
    for w in report.witnesses[:10]:
        lines.append(f"  agent {w.agent + 1} (v={_fmt(w.valuation)}) vs {_fmt(w.opponents)}: "
                     f"bidding {_fmt(w.deviation)} gains {_fmt(w.gain)}")
    rows = ["agent,opponents,valuation,deviation,truthful_utility,deviation_utility"]
    rows += [f"{w.agent},{_fmt(w.opponents)},{w.valuation},{w.deviation},{w.truthful_utility},{w.deviation_utility}"
             for w in report.witnesses]
    out.emit({"outcome": outcome, "truthfulness": report}, lines, "\n".join(rows) + "\n")
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def gallery() -> dict:
    """The three exhibits where naive integration by parts goes wrong or needs care."""
    half = Fraction(1, 2)
    h = step(half)
    ex1 = {
        "f": "H_1/2",
        "naive": naive_by_parts_payment(h, 1).value,
        "myerson": myerson_payment(h).evaluate(1).value,
    }
    ex1["gap"] = ex1["myerson"] - ex1["naive"]
    cantor = Cantor()
    bracket = myerson_payment(cantor, check=False).evaluate(1)
    ex2 = {"f": "Cantor", "naive": naive_by_parts_payment(cantor, 1).value, "myerson": bracket,
           "within_1e-6": bracket.contains(0.5, 1e-6) and bracket.width <= 2e-6}
    series = StepSeries()
    ex3 = {"f": "StepSeries", "species_type": classify_species(series.discontinuities()),
           "myerson": myerson_payment(series).evaluate(1)}
    ok = ex1["gap"] == half and ex2["within_1e-6"] and ex3["species_type"] == 1
    return {"exhibits": [ex1, ex2, ex3], "ok": ok}


def _is_or_in(b: IntervalBound) -> str:
    return f"= {_fmt(b.value)}" if b.exact else f"in {b}"


def cmd_gallery(args, out: Output) -> int:
    data = gallery()
    e1, e2, e3 = data["exhibits"]
    lines = [
        "(1) f = H_q, q = 1/2, C = 0, x = 1",
        f"    naive by parts  g(1) = C + int z f'(z) dz = {_fmt(e1['naive'])}",
        f"    Myerson         g(1) = C + x f(x) - int f = {_fmt(e1['myerson'])}",
        f"    gap = {_fmt(e1['gap'])}",
        "(2) f = Cantor function, C = 0, x = 1",
        f"    naive by parts  g(1) = {_fmt(e2['naive'])}",
        f"    Myerson         g(1) {_is_or_in(e2['myerson'])}",
        "(3) f = sum of steps at 1 - 2^-n",
        f"    discontinuities: first species, type {e3['species_type']}",
        f"    Myerson         g(1) {_is_or_in(e3['myerson'])}",
    ]
    out.emit(data, lines)
    return EXIT_PASS if data["ok"] else EXIT_VIOLATION


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=_grid, default=None,
                        help="start:stop:step (default 0:2:1/100; 0:10:1/4 for simulate)")
    common.add_argument("--curve", help="allocation curve JSON file")
    common.add_argument("--payment", action="append", help="payment JSON file (repeat for check-re)")
    common.add_argument("--mechanism", help="mechanism JSON file")

    parser = argparse.ArgumentParser(prog="myerson", description="Myerson payments and truthfulness checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate f at points")
    p.add_argument("x", nargs="+", type=_fraction)
    p.set_defaults(func=cmd_eval, needs=("curve",))

    p = sub.add_parser("integrate", parents=[common], help="bracket the integral of f over [a, b]")
    p.add_argument("a", type=_fraction)
    p.add_argument("b", type=_fraction)
    p.set_defaults(func=cmd_integrate, needs=("curve",))

    p = sub.add_parser("payment", parents=[common], help="evaluate a payment (Myerson of --curve by default)")
    p.add_argument("x", nargs="+", type=_fraction)
    p.add_argument("--C", type=_fraction, default=Fraction(0), help="pivot g(0)")
    p.set_defaults(func=cmd_payment, needs=())

    p = sub.add_parser("check-ic", parents=[common], help="check the incentive inequality on a grid")
    p.set_defaults(func=cmd_check_ic, needs=("curve",))

    p = sub.add_parser("check-re", parents=[common], help="check that two payments differ by a constant")
    p.set_defaults(func=cmd_check_re, needs=("curve",))

    p = sub.add_parser("classify", parents=[common], help="species type of a discontinuity set")
    p.add_argument("--set", help="discontinuity set JSON file")
    p.set_defaults(func=cmd_classify, needs=())

    p = sub.add_parser("simulate", parents=[common], help="run an auction and search for profitable deviations")
    p.add_argument("--valuations", nargs="+", type=_fraction)
    p.add_argument("--bids", nargs="+", type=_fraction)
    p.set_defaults(func=cmd_simulate, needs=("mechanism",))

    p = sub.add_parser("gallery", parents=[common], help="reproduce the three counterexample exhibits")
    p.set_defaults(func=cmd_gallery, needs=())
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    for name in args.needs:
        if not getattr(args, name):
            print(f"myerson {args.command}: --{name} is required", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args, Output(args))
    except (serialize.SchemaError, InputError, NotMonotone, OSError) as exc:
        print(f"myerson {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"myerson {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry() -> None:
    sys.exit(main())
