"""Payment rules: the Myerson rule, hand-built payments, and the naive by-parts foil."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .curves import (
    AllocationCurve,
    Cantor,
    PiecewiseConstant,
    PiecewisePolynomial,
    Scale,
    StepSeries,
    Sum,
    _poly_deriv,
    _poly_antideriv,
    _poly_eval,
    constant,
)
from .darboux import DEFAULT_MAX_CELLS, DEFAULT_TOL
from .numbers import IntervalBound, as_fraction, is_exact

ZERO = Fraction(0)


class NotMonotone(ValueError):
    """The allocation curve decreases somewhere, so no payment makes it truthful."""

    def __init__(self, witness):
        self.witness = witness
        x, y = witness
        super().__init__(f"allocation curve is not monotone: f({x}) > f({y})")


class NaiveFormulaUndefined(ValueError):
    pass


def _times(x: Fraction, v):
    return x * v if isinstance(v, Fraction) else float(x) * v


def as_value_array(values) -> np.ndarray:
    """Object array of Fractions when every entry is exact, float64 otherwise."""
    values = list(values)
    if all(is_exact(v) for v in values):
        arr = np.empty(len(values), dtype=object)
        arr[:] = [Fraction(v) for v in values]
        return arr
    return np.array([float(v) for v in values], dtype=np.float64)


def _match(*arrays):
    if all(a.dtype == object for a in arrays):
        return arrays
    return tuple(a.astype(np.float64) for a in arrays)


@lru_cache(maxsize=64)
def _cumulative(curve: AllocationCurve, points: tuple, tol: float, max_cells: int):
    # curves are immutable, so repeated checks on one grid can share the integrals
    lo, hi = curve.cumulative_integral(list(points), tol, max_cells)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


@dataclass
class PaymentTable:
    """A payment tabulated on sorted points as ``g = base - I`` with ``I in [lo, hi]``.

    ``lo``/``hi`` are cumulative integral brackets over one shared partition,
    so ``I(y) - I(x)`` is bracketed by the entry-wise differences.
    ``integral_of`` names the curve whose integral was subtracted.
    """

    points: Sequence[Fraction]
    base: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    integral_of: Optional[AllocationCurve] = None

    @property
    def exact(self) -> bool:
        return self.base.dtype == object and self.lo.dtype == object and self.hi.dtype == object

    def bracket(self, i: int) -> IntervalBound:
        lower, upper = self.base[i] - self.hi[i], self.base[i] - self.lo[i]
        return IntervalBound(lower, upper, exact=self.exact)


class PaymentCurve:
    pivot = ZERO
    form = "direct"

    def evaluate(self, x) -> IntervalBound:
        raise NotImplementedError

    def __call__(self, x) -> IntervalBound:
        return self.evaluate(x)

    def tabulate(self, points, tol: float = DEFAULT_TOL) -> PaymentTable:
        raise NotImplementedError

    def __add__(self, perturbation) -> "PerturbedPayment":
        if not isinstance(perturbation, AllocationCurve):
            perturbation = constant(perturbation)
        return PerturbedPayment(self, perturbation)


@dataclass(frozen=True)
class MyersonPayment(PaymentCurve):
    """``g(x) = C + x f(x) - int_0^x f``.

    For step functions this is evaluated as the jump sum
    ``C + sum_{q < x} q * jump(q)`` plus the partial jump at ``x`` itself.
    """

    curve: AllocationCurve
    pivot: Fraction = ZERO
    tol: float = DEFAULT_TOL
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self):
        object.__setattr__(self, "pivot", as_fraction(self.pivot))

    @property
    def form(self):
        return "closed" if self.curve.exact else "bracketed"

    def _jump_sum(self, x: Fraction) -> Fraction:
        total = self.pivot
        for q, left, at_q, right in self.curve.jumps():
            if q < x:
                total += q * (right - left)
            elif q == x:
                total += q * (at_q - left)
        return total

    def evaluate(self, x) -> IntervalBound:
        x = as_fraction(x)
        if x < 0:
            raise ValueError("payments are defined for x >= 0")
        if isinstance(self.curve, PiecewiseConstant):
            return IntervalBound.point(self._jump_sum(x))
        integral = self.curve.integrate(0, x, self.tol, self.max_cells)
        return self.pivot + (_times(x, self.curve(x)) - integral)

    def tabulate(self, points, tol: float = None) -> PaymentTable:
        tol = self.tol if tol is None else tol
        pts = [as_fraction(p) for p in points]
        if isinstance(self.curve, PiecewiseConstant):
            base = as_value_array(self._jump_sum(p) for p in pts)
            zero = as_value_array([ZERO] * len(pts))
            return PaymentTable(pts, base, zero, zero, self.curve)
        base = as_value_array(self.pivot + _times(p, self.curve(p)) for p in pts)
        lo, hi = _cumulative(self.curve, tuple(pts), tol, self.max_cells)
        base, lo, hi = _match(base, lo, hi)
        return PaymentTable(pts, base, lo, hi, self.curve)


@dataclass(frozen=True)
class DirectPayment(PaymentCurve):
    """A payment written down directly as a symbolic curve."""

    curve: AllocationCurve

    @property
    def pivot(self):
        return self.curve(0)

    def evaluate(self, x) -> IntervalBound:
        return IntervalBound.point(self.curve(as_fraction(x)))

    def tabulate(self, points, tol: float = DEFAULT_TOL) -> PaymentTable:
        pts = [as_fraction(p) for p in points]
        base = as_value_array(self.curve(p) for p in pts)
        zero = as_value_array([ZERO] * len(pts))
        base, zero = _match(base, zero)
        return PaymentTable(pts, base, zero, zero, None)


@dataclass(frozen=True)
class PerturbedPayment(PaymentCurve):
    """``inner + perturbation``; the perturbation is any nonnegative curve."""

    inner: PaymentCurve
    perturbation: AllocationCurve
    form = "perturbed"

    @property
    def pivot(self):
        return self.inner.pivot + self.perturbation(0)

    def evaluate(self, x) -> IntervalBound:
        x = as_fraction(x)
        return self.inner.evaluate(x) + IntervalBound.point(self.perturbation(x))

    def tabulate(self, points, tol: float = DEFAULT_TOL) -> PaymentTable:
        table = self.inner.tabulate(points, tol)
        bump = as_value_array(self.perturbation(p) for p in table.points)
        base, bump, lo, hi = _match(table.base, bump, table.lo, table.hi)
        return PaymentTable(table.points, base + bump, lo, hi, table.integral_of)


def myerson_payment(f: AllocationCurve, C=0, check: bool = True, grid=None, tol: float = DEFAULT_TOL) -> MyersonPayment:
    """The payment rule making ``f`` truthful, pinned to ``g(0) = C``.

    Raises :class:`NotMonotone` when ``f`` fails the monotonicity check; pass
    ``check=False`` to build the formula anyway (it will not be truthful).
    """
    if check:
        report = f.is_monotone(grid)
        if not report.monotone:
            raise NotMonotone(report.witness)
    return MyersonPayment(f, as_fraction(C), tol)


def eval_payment(g: PaymentCurve, x) -> IntervalBound:
    return g.evaluate(x)


def naive_by_parts_payment(f: AllocationCurve, x, C=0) -> IntervalBound:
    """``C + int_0^x z f'(z) dz`` with ``f'`` taken classically and its undefined points ignored.

    Coincides with the Myerson rule only when ``f`` is continuously
    differentiable; for step functions and the Cantor function it returns C.
    """
    x = as_fraction(x)
    C = as_fraction(C)
    return IntervalBound.point(C + _naive_integral(f, x))


def _naive_integral(f: AllocationCurve, x: Fraction) -> Fraction:
    if isinstance(f, (PiecewiseConstant, Cantor, StepSeries)):
        # derivative vanishes wherever it exists
        return ZERO
    if isinstance(f, PiecewisePolynomial):
        total = ZERO
        prev = ZERO
        for i, coeffs in enumerate(f.coefficients):
            hi = f.breakpoints[i] if i < len(f.breakpoints) else None
            end = x if hi is None or x <= hi else hi
            # z * p'(z) integrated over the piece
            z_deriv = (ZERO,) + _poly_deriv(coeffs)
            anti = _poly_antideriv(z_deriv)
            total += _poly_eval(anti, end) - _poly_eval(anti, prev)
            if hi is None or x <= hi:
                break
            prev = hi
        return total
    if isinstance(f, Sum):
        return _naive_integral(f.left, x) + _naive_integral(f.right, x)
    if isinstance(f, Scale):
        return f.factor * _naive_integral(f.inner, x)
    raise NaiveFormulaUndefined(f"no derivative description for {type(f).__name__}")
