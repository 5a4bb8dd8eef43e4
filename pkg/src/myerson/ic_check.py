"""Grid checks of the incentive inequality and its consequences.

Every check works on a finite point set and compares brackets, never bare
floats: a pair is a violation only when even the most favourable reading of
the brackets fails, and ``InconclusiveBracket`` is raised when no definite
violation exists but some pair could not be decided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .curves import AllocationCurve, PiecewisePolynomial, _poly_deriv, _poly_eval
from .grid import STANDARD_GRID, GridSpec, as_points
from .numbers import as_fraction
from .payment import (
    DirectPayment,
    MyersonPayment,
    PaymentCurve,
    PerturbedPayment,
    as_value_array,
)

FLOAT_TOL = 1e-9


class InconclusiveBracket(RuntimeError):
    def __init__(self, report: "ViolationReport", undecided: int):
        self.report = report
        self.undecided = undecided
        super().__init__(f"{undecided} pairs could not be decided at tol={report.tol}")


class PreconditionNotIC(ValueError):
    def __init__(self, which: str, report: "ViolationReport"):
        self.which = which
        self.report = report
        w = report.witnesses[0] if report.witnesses else None
        where = f" (witness x={w.x}, y={w.y})" if w else ""
        super().__init__(f"payment {which} is not incentive compatible on the grid{where}")


class PointAtBreakpoint(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    x: object
    y: object
    lhs: object
    rhs: object
    slack: object
    side: str = "lower"

    def to_row(self):
        return [self.x, self.y, self.lhs, self.rhs, self.slack]


@dataclass
class ViolationReport:
    passed: bool
    witnesses: List[Witness]
    max_slack_violation: object
    pairs_checked: int
    tol: object = 0
    undecided: int = 0

    def __post_init__(self):
        if self.passed != (not self.witnesses):
            raise ValueError("passed must hold exactly when there are no witnesses")

    def has_witness(self, x, y) -> bool:
        x, y = as_fraction(x), as_fraction(y)
        return any(as_fraction(w.x) == x and as_fraction(w.y) == y for w in self.witnesses)


def _payment_curves(g: PaymentCurve) -> list:
    if isinstance(g, PerturbedPayment):
        return _payment_curves(g.inner) + [g.perturbation]
    if isinstance(g, (MyersonPayment, DirectPayment)):
        return [g.curve]
    return []


def _prepare(f: AllocationCurve, g: PaymentCurve, grid, tol, pairs):
    curves = [f] + _payment_curves(g)
    if pairs is not None:
        pairs = [(as_fraction(x), as_fraction(y)) for x, y in pairs]
        extra = {p for pair in pairs for p in pair}
        pts = sorted(extra | (set(as_points(grid, *curves)) if grid is not None else set()))
    else:
        pts = list(as_points(grid, *curves))
    f_vals = as_value_array(f(p) for p in pts)
    # integral brackets at a quarter of the tolerance leave room for rounding
    table = g.tabulate(pts, (tol if tol else FLOAT_TOL) / 4)
    exact = table.exact and f_vals.dtype == object
    if tol is None:
        tol = Fraction(0) if exact else FLOAT_TOL
    elif exact:
        tol = as_fraction(tol)
    x_vals = as_value_array(pts)
    arrays = (x_vals, f_vals, table.base, table.lo, table.hi)
    if not exact:
        arrays = tuple(a.astype(np.float64) for a in arrays)
        tol = float(tol)
    index = {p: i for i, p in enumerate(pts)}
    mask = None
    if pairs is not None:
        mask = np.zeros((len(pts), len(pts)), dtype=bool)
        for x, y in pairs:
            mask[index[x], index[y]] = True
    return pts, arrays, tol, mask


def _finish(status, mask, make_witness, tol) -> ViolationReport:
    if mask is not None:
        status = np.where(mask, status, _kernels.PASS)
        checked = int(mask.sum())
    else:
        checked = status.size
    bad = np.argwhere(status == _kernels.VIOLATION)
    witnesses = sorted((w for i, j in bad for w in make_witness(int(i), int(j))), key=lambda w: (w.x, w.y))
    undecided = int(np.count_nonzero(status == _kernels.INCONCLUSIVE))
    worst = max((w.rhs - w.lhs for w in witnesses), default=0)
    report = ViolationReport(not witnesses, witnesses, worst, checked, tol, undecided)
    if not witnesses and undecided:
        raise InconclusiveBracket(report, undecided)
    return report


def _diff_bracket(base, lo, hi, i, j):
    d_a = base[j] - base[i]
    d_lo, d_hi = lo[j] - lo[i], hi[j] - hi[i]
    return d_a - max(d_lo, d_hi), d_a - min(d_lo, d_hi)


def check_ic_pairs(f: AllocationCurve, g: PaymentCurve, grid=None, tol=None, pairs=None) -> ViolationReport:
    """Check ``g(y) - g(x) >= x (f(y) - f(x))`` for all (x, y) on the grid.

    ``pairs`` restricts the check to explicit ordered pairs.  ``tol`` defaults
    to 0 when every quantity is rational and 1e-9 otherwise.
    """
    pts, (x, fv, base, lo, hi), tol, mask = _prepare(f, g, grid, tol, pairs)
    status = _kernels.pair_status(x, fv, base, lo, hi, tol)

    def witness(i, j):
        _, upper = _diff_bracket(base, lo, hi, i, j)
        rhs = x[i] * (fv[j] - fv[i])
        yield Witness(pts[i], pts[j], upper, rhs, upper - rhs)

    return _finish(status, mask, witness, tol)


def check_sandwich(f: AllocationCurve, g: PaymentCurve, grid=None, tol=None, pairs=None) -> ViolationReport:
    """Check ``y (f(y) - f(x)) >= g(y) - g(x) >= x (f(y) - f(x))``."""
    pts, (x, fv, base, lo, hi), tol, mask = _prepare(f, g, grid, tol, pairs)
    status = _kernels.sandwich_status(x, fv, base, lo, hi, tol)

    def witness(i, j):
        lower, upper = _diff_bracket(base, lo, hi, i, j)
        d_f = fv[j] - fv[i]
        below, above = x[i] * d_f, x[j] * d_f
        if upper < below - tol:
            yield Witness(pts[i], pts[j], upper, below, upper - below, "lower")
        if above < lower - tol:
            yield Witness(pts[i], pts[j], above, lower, above - lower, "upper")

    return _finish(status, mask, witness, tol)


@dataclass
class MonotoneNecessityReport:
    implication_holds: bool
    ic_passed: Optional[bool]
    grid_monotone: bool
    monotone_witness: Optional[Tuple[Fraction, Fraction]]
    ic_witness: Optional[Witness]
    ic_report: Optional[ViolationReport] = None


def check_monotone_necessity(f: AllocationCurve, g: PaymentCurve, grid=None, tol=None) -> MonotoneNecessityReport:
    """IC on the grid must force f to be monotone on the grid.

    When f decreases between grid points x < y, one of the ordered pairs
    (x, y) or (y, x) has to violate IC, because adding the two inequalities
    gives (y - x)(f(y) - f(x)) >= 0.  That violating pair is returned.
    """
    try:
        ic = check_ic_pairs(f, g, grid, tol)
        ic_passed = ic.passed
    except InconclusiveBracket as exc:
        ic, ic_passed = exc.report, None
    pts = list(as_points(grid, f, *_payment_curves(g)))
    vals = [f(p) for p in pts]
    mono_witness = None
    for a, b, va, vb in zip(pts, pts[1:], vals, vals[1:]):
        if va > vb:
            mono_witness = (a, b)
            break
    ic_witness = None
    if mono_witness is not None:
        a, b = mono_witness
        for w in ic.witnesses:
            if {as_fraction(w.x), as_fraction(w.y)} == {a, b}:
                ic_witness = w
                break
    holds = mono_witness is None or (ic_passed is False and ic_witness is not None)
    return MonotoneNecessityReport(holds, ic_passed, mono_witness is None, mono_witness, ic_witness, ic)


@dataclass
class DerivativeRow:
    x: Fraction
    finite_difference: object
    target: Fraction
    error: object
    allowance: object


@dataclass
class DerivativeReport:
    passed: bool
    rows: List[DerivativeRow] = field(default_factory=list)

    @property
    def max_error(self):
        return max((r.error for r in self.rows), default=0)


def check_derivative_identity(f: AllocationCurve, g: PaymentCurve, points, h=Fraction(1, 10**4), tol=1e-6) -> DerivativeReport:
    """Central differences of g against ``x f'(x)`` away from breakpoints.

    The allowance ``h**2 / 6 * max |g'''|`` covers the truncation error of the
    central difference, with ``g''' = 2 f'' + x f'''`` on the piece.
    """
    if not isinstance(f, PiecewisePolynomial):
        raise TypeError("the derivative identity is checked for piecewise polynomials only")
    h = as_fraction(h)
    rows = []
    for x in points:
        x = as_fraction(x)
        if x - h < 0:
            raise PointAtBreakpoint(f"x={x} is within h of the domain start")
        if any(abs(x - q) <= h for q in f.breakpoints):
            raise PointAtBreakpoint(f"x={x} is within h of a breakpoint")
        fd = (g.evaluate(x + h).midpoint - g.evaluate(x - h).midpoint) / (2 * h)
        target = x * f.derivative(x)
        coeffs = f.coefficients[f._piece(x)]
        d2 = _poly_deriv(_poly_deriv(coeffs))
        d3 = _poly_deriv(d2)
        third = [abs(2 * _poly_eval(d2, t) + t * _poly_eval(d3, t)) for t in (x - h, x, x + h)]
        allowance = h * h / 6 * max(third)
        err = abs(fd - target)
        rows.append(DerivativeRow(x, fd, target, err, allowance))
    passed = all(r.error <= tol + r.allowance for r in rows)
    return DerivativeReport(passed, rows)


@dataclass
class RevenueEquivalenceReport:
    passed: bool
    constant_diff: object
    spread: object
    witnesses: List[Tuple[Fraction, Fraction]]
    tol: object


def check_revenue_equivalence(f: AllocationCurve, g1: PaymentCurve, g2: PaymentCurve, grid=None, tol=None) -> RevenueEquivalenceReport:
    """Two truthful payments for the same f must differ by a constant on the grid."""
    for name, g in (("g1", g1), ("g2", g2)):
        report = check_ic_pairs(f, g, grid, tol)
        if not report.passed:
            raise PreconditionNotIC(name, report)
    pts = list(as_points(grid, f, *_payment_curves(g1), *_payment_curves(g2)))
    int_tol = (tol if tol else FLOAT_TOL) / 4
    t1, t2 = g1.tabulate(pts, int_tol), g2.tabulate(pts, int_tol)
    exact = t1.exact and t2.exact
    if tol is None:
        tol = Fraction(0) if exact else FLOAT_TOL
    # G = g2 - g1, so a shift g2 = g1 + c reports c
    if t1.integral_of is not None and t1.integral_of == t2.integral_of:
        # same integrand on the same partition: the integral terms cancel
        g_lo = g_hi = t2.base - t1.base
    else:
        g_lo = (t2.base - t2.hi) - (t1.base - t1.lo)
        g_hi = (t2.base - t2.lo) - (t1.base - t1.hi)
    i_lo, i_hi = int(np.argmin(g_lo)), int(np.argmax(g_hi))
    spread = g_hi[i_hi] - g_lo[i_lo]
    constant = (g_hi[i_hi] + g_lo[i_lo]) / 2
    passed = spread <= tol
    witnesses = [] if passed else [(pts[i_lo], pts[i_hi])]
    return RevenueEquivalenceReport(passed, constant, spread, witnesses, tol)
