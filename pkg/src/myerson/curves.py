"""Closed symbolic families of allocation curves f: [0, inf) -> [0, inf).

Piecewise families use exact rational arithmetic throughout.  A piece
boundary belongs to the piece on its left, so ``H_q`` is 0 at ``q`` itself.
The Cantor function is evaluated by ternary digits and integrated by Darboux
brackets; everything else integrates in closed form.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .darboux import DEFAULT_MAX_CELLS, DEFAULT_TOL, darboux_segments
from .discontinuity import (
    DiscontinuitySet,
    Empty,
    Finite,
    GeometricAccumulation,
    classify_species,
    derived_set,
    union,
)
from .grid import GridSpec, as_points
from .numbers import IntervalBound, as_fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    witness: Optional[Tuple[Fraction, Fraction]] = None
    method: str = "structural"

    def __post_init__(self):
        if self.monotone != (self.witness is None):
            raise ValueError("a witness is required exactly when monotone is False")

    def __bool__(self):
        return self.monotone


def _poly_eval(coeffs: Sequence[Fraction], x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_deriv(coeffs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(i * c for i, c in enumerate(coeffs) if i > 0) or (ZERO,)


def _poly_antideriv(coeffs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return (ZERO,) + tuple(c / (i + 1) for i, c in enumerate(coeffs))


def _check_breakpoints(bps):
    if any(q < 0 for q in bps):
        raise ValueError("breakpoints must be nonnegative")
    if any(b <= a for a, b in zip(bps, bps[1:])):
        raise ValueError("breakpoints must be strictly increasing")


def _nonneg_x(x):
    if x < 0:
        raise ValueError(f"curves are defined on x >= 0, got {x}")


def _grid_witness(curve, points) -> MonotonicityReport:
    pts = sorted(set(points))
    vals = [curve(p) for p in pts]
    for i in range(len(pts) - 1):
        if vals[i] > vals[i + 1]:
            return MonotonicityReport(False, (pts[i], pts[i + 1]), "grid")
    return MonotonicityReport(True, None, "grid")


def _default_grid(curve) -> GridSpec:
    top = max(curve.breakpoints, default=ZERO) + 2
    return GridSpec(0, top, Fraction(1, 64))


class AllocationCurve:
    """Common surface of all curve variants."""

    #: True when evaluation and integration at rational points are exact.
    exact = True

    def __call__(self, x):
        raise NotImplementedError

    @property
    def breakpoints(self) -> Tuple[Fraction, ...]:
        return ()

    def antiderivative(self, x) -> Fraction:
        """Exact ``int_0^x f``; only for exact curves."""
        raise NotImplementedError

    def integrate(self, a, b, tol: float = DEFAULT_TOL, max_cells: int = DEFAULT_MAX_CELLS) -> IntervalBound:
        a, b = as_fraction(a), as_fraction(b)
        if not 0 <= a <= b:
            raise ValueError("integrate needs 0 <= a <= b")
        if a == b:
            return IntervalBound.point(ZERO)
        if self.exact:
            return IntervalBound.point(self.antiderivative(b) - self.antiderivative(a))
        res = darboux_segments(self.lattice_values, [a, b], tol, max_cells)
        return IntervalBound(float(res.lower[0]), float(res.upper[0]))

    def cumulative_integral(self, points, tol: float = DEFAULT_TOL, max_cells: int = DEFAULT_MAX_CELLS):
        """Brackets of ``int_0^p f`` for every sorted ``p`` in ``points``.

        All brackets come from one shared partition, so differences between
        entries are themselves valid brackets of the integral between points.
        Exact curves return object arrays of Fractions with ``lower is upper``.
        """
        pts = [as_fraction(p) for p in points]
        if self.exact:
            vals = np.empty(len(pts), dtype=object)
            vals[:] = [self.antiderivative(p) for p in pts]
            return vals, vals
        res = darboux_segments(self.lattice_values, [ZERO] + pts, tol, max_cells)
        return np.cumsum(res.lower), np.cumsum(res.upper)

    def lattice_values(self, k: np.ndarray, shift: int):
        """``(lo, hi)`` float bounds of ``f(k / 2**shift)``."""
        denom = 1 << shift
        vals = np.array([float(self(Fraction(int(kk), denom))) for kk in k], dtype=np.float64)
        return vals, vals

    def is_monotone(self, grid=None) -> MonotonicityReport:
        raise NotImplementedError

    def discontinuities(self) -> DiscontinuitySet:
        raise NotImplementedError

    def derivative(self, x):
        """Classical derivative, or None where it does not exist."""
        raise NotImplementedError

    def __add__(self, other):
        return Sum(self, other)

    def __rmul__(self, factor):
        return Scale(factor, self)


@dataclass(frozen=True)
class PiecewiseConstant(AllocationCurve):
    """Step function with ``values[i]`` on ``(q_i, q_{i+1}]`` (``[0, q_1]`` first).

    ``point_values`` optionally overrides the value exactly at each
    breakpoint; by default a breakpoint takes the value of the piece to its left.
    """

    breakpoints_: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]
    point_values: Optional[Tuple[Fraction, ...]] = None

    def __init__(self, breakpoints, values, point_values=None):
        bps = tuple(as_fraction(q) for q in breakpoints)
        vals = tuple(as_fraction(v) for v in values)
        _check_breakpoints(bps)
        if len(vals) != len(bps) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(v < 0 for v in vals):
            raise ValueError("allocation values must be nonnegative")
        pv = None
        if point_values is not None:
            pv = tuple(as_fraction(v) for v in point_values)
            if len(pv) != len(bps):
                raise ValueError("need one point value per breakpoint")
            if any(v < 0 for v in pv):
                raise ValueError("allocation values must be nonnegative")
            if pv == vals[:-1]:
                pv = None
        object.__setattr__(self, "breakpoints_", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "point_values", pv)

    @property
    def breakpoints(self):
        return self.breakpoints_

    def at_break(self, i: int) -> Fraction:
        return self.values[i] if self.point_values is None else self.point_values[i]

    def __call__(self, x):
        x = as_fraction(x)
        _nonneg_x(x)
        i = bisect_left(self.breakpoints_, x)
        if i < len(self.breakpoints_) and self.breakpoints_[i] == x:
            return self.at_break(i)
        return self.values[i]

    def jumps(self):
        """``(q, left, at_q, right)`` for every breakpoint."""
        return [
            (q, self.values[i], self.at_break(i), self.values[i + 1])
            for i, q in enumerate(self.breakpoints_)
        ]

    def antiderivative(self, x):
        x = as_fraction(x)
        total = ZERO
        prev = ZERO
        for q, v in zip(self.breakpoints_, self.values):
            if x <= q:
                return total + (x - prev) * v
            total += (q - prev) * v
            prev = q
        return total + (x - prev) * self.values[-1]

    def _observations(self):
        """Values in domain order, each with a point where it is taken."""
        bps = self.breakpoints_
        obs = []
        for i, v in enumerate(self.values):
            lo = bps[i - 1] if i > 0 else None
            hi = bps[i] if i < len(bps) else None
            if lo is None and hi is not None:
                if hi > 0:
                    obs.append((ZERO, v))
            elif hi is None:
                obs.append(((lo or ZERO) + 1, v))
            else:
                obs.append(((lo + hi) / 2, v))
            if hi is not None:
                obs.append((hi, self.at_break(i)))
        return obs

    def is_monotone(self, grid=None) -> MonotonicityReport:
        obs = self._observations()
        for (x0, v0), (x1, v1) in zip(obs, obs[1:]):
            if v0 > v1:
                return MonotonicityReport(False, (x0, x1))
        return MonotonicityReport(True)

    def discontinuities(self) -> DiscontinuitySet:
        pts = [q for q, left, mid, right in self.jumps() if not left == mid == right]
        return Finite(pts) if pts else Empty()

    def derivative(self, x):
        x = as_fraction(x)
        if x in self.breakpoints_:
            q, left, mid, right = self.jumps()[self.breakpoints_.index(x)]
            return ZERO if left == mid == right else None
        return ZERO


def step(q, height=1) -> PiecewiseConstant:
    """``height * H_q``: 0 on ``[0, q]`` and ``height`` beyond."""
    return PiecewiseConstant([q], [0, height])


def constant(c) -> PiecewiseConstant:
    return PiecewiseConstant([], [c])


@dataclass(frozen=True)
class PiecewisePolynomial(AllocationCurve):
    """Polynomial pieces in absolute ``x``, coefficients in ascending powers."""

    breakpoints_: Tuple[Fraction, ...]
    coefficients: Tuple[Tuple[Fraction, ...], ...]

    def __init__(self, breakpoints, coefficients):
        bps = tuple(as_fraction(q) for q in breakpoints)
        coeffs = tuple(tuple(as_fraction(c) for c in piece) or (ZERO,) for piece in coefficients)
        _check_breakpoints(bps)
        if len(coeffs) != len(bps) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        object.__setattr__(self, "breakpoints_", bps)
        object.__setattr__(self, "coefficients", coeffs)
        self._check_nonnegative()

    @property
    def breakpoints(self):
        return self.breakpoints_

    def _interval(self, i):
        lo = self.breakpoints_[i - 1] if i > 0 else ZERO
        hi = self.breakpoints_[i] if i < len(self.breakpoints_) else None
        return lo, hi

    @staticmethod
    def _degree(coeffs):
        d = len(coeffs) - 1
        while d > 0 and coeffs[d] == 0:
            d -= 1
        return d

    def _check_nonnegative(self):
        for i, coeffs in enumerate(self.coefficients):
            if all(c >= 0 for c in coeffs):
                continue
            lo, hi = self._interval(i)
            deg = self._degree(coeffs)
            if hi is None and coeffs[deg] < 0:
                raise ValueError(f"piece {i} becomes negative for large x")
            probe = [lo] + ([hi] if hi is not None else [])
            if deg == 2:
                vertex = -coeffs[1] / (2 * coeffs[2])
                if vertex > lo and (hi is None or vertex < hi):
                    probe.append(vertex)
            elif deg > 2:
                end = hi if hi is not None else lo + 16
                probe += [lo + (end - lo) * Fraction(j, 256) for j in range(257)]
            if any(_poly_eval(coeffs, p) < 0 for p in probe):
                raise ValueError(f"piece {i} takes negative values")

    def _piece(self, x):
        return bisect_left(self.breakpoints_, x)

    def __call__(self, x):
        x = as_fraction(x)
        _nonneg_x(x)
        return _poly_eval(self.coefficients[self._piece(x)], x)

    def antiderivative(self, x):
        x = as_fraction(x)
        total = ZERO
        prev = ZERO
        for i, coeffs in enumerate(self.coefficients):
            _, hi = self._interval(i)
            anti = _poly_antideriv(coeffs)
            end = x if hi is None or x <= hi else hi
            total += _poly_eval(anti, end) - _poly_eval(anti, prev)
            if hi is None or x <= hi:
                return total
            prev = hi
        return total

    def jumps(self):
        out = []
        for i, q in enumerate(self.breakpoints_):
            left = _poly_eval(self.coefficients[i], q)
            right = _poly_eval(self.coefficients[i + 1], q)
            out.append((q, left, left, right))
        return out

    def derivative(self, x):
        x = as_fraction(x)
        i = self._piece(x)
        d_left = _poly_eval(_poly_deriv(self.coefficients[i]), x)
        if i < len(self.breakpoints_) and self.breakpoints_[i] == x:
            _, left, _, right = self.jumps()[i]
            d_right = _poly_eval(_poly_deriv(self.coefficients[i + 1]), x)
            if left != right or d_left != d_right:
                return None
        return d_left

    def _decreasing_pair(self, i, t):
        """A pair inside piece ``i`` near ``t`` on which the piece decreases."""
        coeffs = self.coefficients[i]
        lo, hi = self._interval(i)
        delta = (hi - lo) / 2 if hi is not None else ONE
        for _ in range(200):
            if hi is not None and t == hi:
                x, y = t - delta, t
            else:
                x, y = t + delta / 2, t + delta
            if _poly_eval(coeffs, x) > _poly_eval(coeffs, y):
                return x, y
            delta /= 2
        raise AssertionError("no decreasing pair found near a negative derivative")

    def is_monotone(self, grid=None) -> MonotonicityReport:
        for q, left, _, right in self.jumps():
            if left > right:
                nxt = [b for b in self.breakpoints_ if b > q]
                span = (nxt[0] - q) if nxt else ONE
                while self(q + span) >= left:
                    span /= 2
                return MonotonicityReport(False, (q, q + span))
        needs_grid = False
        for i, coeffs in enumerate(self.coefficients):
            lo, hi = self._interval(i)
            if hi is not None and hi == lo:
                continue
            deg = self._degree(coeffs)
            if deg == 1 and coeffs[1] < 0:
                return MonotonicityReport(False, self._decreasing_pair(i, lo))
            if deg == 2:
                deriv = _poly_deriv(coeffs)
                if hi is None and coeffs[2] < 0:
                    t = max(lo, -deriv[0] / deriv[1]) + 1
                    return MonotonicityReport(False, (t, t + 1))
                for t in [lo] + ([hi] if hi is not None else []):
                    if _poly_eval(deriv, t) < 0:
                        return MonotonicityReport(False, self._decreasing_pair(i, t))
            if deg > 2:
                needs_grid = True
        if not needs_grid:
            return MonotonicityReport(True)
        pts = list(as_points(grid or _default_grid(self), self))
        for i in range(len(self.coefficients)):
            lo, hi = self._interval(i)
            end = hi if hi is not None else lo + 2
            pts += [lo + (end - lo) * Fraction(j, 512) for j in range(513)]
        return _grid_witness(self, pts)

    def discontinuities(self) -> DiscontinuitySet:
        pts = [q for q, left, _, right in self.jumps() if left != right]
        return Finite(pts) if pts else Empty()


def identity() -> PiecewisePolynomial:
    return PiecewisePolynomial([], [[0, 1]])


def monomial(degree: int, coefficient=1) -> PiecewisePolynomial:
    return PiecewisePolynomial([], [[0] * degree + [coefficient]])


@dataclass(frozen=True)
class Cantor(AllocationCurve):
    """The Cantor function on [0, 1], equal to 1 beyond 1.

    Values are truncated after ``depth`` ternary digits, an error below
    ``2**-depth`` (and below float resolution at the default of 64).
    """

    depth: int = 64
    exact = False

    def __call__(self, x):
        x = as_fraction(x)
        _nonneg_x(x)
        if x >= 1:
            return 1.0
        num, den = x.numerator, x.denominator
        bits = 0
        for j in range(self.depth):
            num *= 3
            digit, num = divmod(num, den)
            bits <<= 1
            if digit:
                bits |= 1
            if digit == 1 or num == 0:
                bits <<= self.depth - j - 1
                break
        return float(Fraction(bits, 1 << self.depth))

    def lattice_values(self, k, shift):
        vals, exact = _kernels.cantor_lattice(k, shift, self.depth)
        return vals, np.where(exact, vals, vals + 2.0**-self.depth)

    def is_monotone(self, grid=None):
        return MonotonicityReport(True)

    def discontinuities(self):
        return Empty()

    def derivative(self, x):
        """0 inside a removed middle third, None on the Cantor set itself."""
        x = as_fraction(x)
        if x > 1:
            return ZERO
        num, den = x.numerator, x.denominator
        for _ in range(self.depth):
            num *= 3
            digit, num = divmod(num, den)
            if digit == 1:
                return ZERO if num else None
            if num == 0:
                return None
        return None


@dataclass(frozen=True)
class StepSeries(AllocationCurve):
    """``sum_{n>=1} 2**-n * H_{1 - 2**-n}``: jumps at 1/2, 3/4, 7/8, ... accumulating at 1.

    ``preview`` is how many of the jump points are offered to grids.
    """

    preview: int = 10

    def fired(self, x: Fraction) -> Optional[int]:
        """Number of steps with ``1 - 2**-n < x``; None when all have fired."""
        if x >= 1:
            return None
        n = 0
        while 1 - Fraction(1, 2 ** (n + 1)) < x:
            n += 1
        return n

    def __call__(self, x):
        x = as_fraction(x)
        _nonneg_x(x)
        n = self.fired(x)
        return ONE if n is None else 1 - Fraction(1, 2**n)

    def antiderivative(self, x):
        x = as_fraction(x)
        n = self.fired(x)
        if n is None:
            return x - 1 + Fraction(1, 3)
        return (x - 1) * (1 - Fraction(1, 2**n)) + (1 - Fraction(1, 4**n)) / 3

    @property
    def breakpoints(self):
        return tuple(1 - Fraction(1, 2**n) for n in range(1, self.preview + 1))

    def is_monotone(self, grid=None):
        return MonotonicityReport(True)

    def discontinuities(self):
        return GeometricAccumulation(limit=1, scale=1, ratio=Fraction(1, 2))

    def derivative(self, x):
        x = as_fraction(x)
        if x == 1:
            # left difference quotients stay in [1, 2)
            return None
        n = self.fired(x)
        if n is not None and x == 1 - Fraction(1, 2 ** (n + 1)):
            return None
        return ZERO


@dataclass(frozen=True)
class Sum(AllocationCurve):
    left: AllocationCurve
    right: AllocationCurve

    @property
    def exact(self):
        return self.left.exact and self.right.exact

    def __call__(self, x):
        return self.left(x) + self.right(x)

    @property
    def breakpoints(self):
        return tuple(sorted(set(self.left.breakpoints) | set(self.right.breakpoints)))

    def antiderivative(self, x):
        return self.left.antiderivative(x) + self.right.antiderivative(x)

    def integrate(self, a, b, tol=DEFAULT_TOL, max_cells=DEFAULT_MAX_CELLS):
        if self.exact:
            return super().integrate(a, b)
        return self.left.integrate(a, b, tol / 2, max_cells) + self.right.integrate(a, b, tol / 2, max_cells)

    def cumulative_integral(self, points, tol=DEFAULT_TOL, max_cells=DEFAULT_MAX_CELLS):
        if self.exact:
            return super().cumulative_integral(points)
        l_lo, l_hi = self.left.cumulative_integral(points, tol / 2, max_cells)
        r_lo, r_hi = self.right.cumulative_integral(points, tol / 2, max_cells)
        return (l_lo + r_lo).astype(np.float64), (l_hi + r_hi).astype(np.float64)

    def lattice_values(self, k, shift):
        a_lo, a_hi = self.left.lattice_values(k, shift)
        b_lo, b_hi = self.right.lattice_values(k, shift)
        return a_lo + b_lo, a_hi + b_hi

    def is_monotone(self, grid=None):
        if self.left.is_monotone(grid) and self.right.is_monotone(grid):
            return MonotonicityReport(True)
        return _grid_witness(self, as_points(grid or _default_grid(self), self))

    def discontinuities(self):
        return union(self.left.discontinuities(), self.right.discontinuities())

    def derivative(self, x):
        a, b = self.left.derivative(x), self.right.derivative(x)
        return None if a is None or b is None else a + b


@dataclass(frozen=True)
class Scale(AllocationCurve):
    factor: Fraction
    inner: AllocationCurve

    def __post_init__(self):
        object.__setattr__(self, "factor", as_fraction(self.factor))
        if self.factor < 0:
            raise ValueError("scale factor must be nonnegative")

    @property
    def exact(self):
        return self.factor == 0 or self.inner.exact

    def __call__(self, x):
        v = self.inner(x)
        return self.factor * v if isinstance(v, Fraction) else float(self.factor) * v

    @property
    def breakpoints(self):
        return self.inner.breakpoints

    def antiderivative(self, x):
        if self.factor == 0:
            return ZERO
        return self.factor * self.inner.antiderivative(x)

    def integrate(self, a, b, tol=DEFAULT_TOL, max_cells=DEFAULT_MAX_CELLS):
        if self.exact:
            return super().integrate(a, b)
        inner = self.inner.integrate(a, b, tol / float(self.factor), max_cells)
        return inner.scale(float(self.factor))

    def cumulative_integral(self, points, tol=DEFAULT_TOL, max_cells=DEFAULT_MAX_CELLS):
        if self.exact:
            return super().cumulative_integral(points)
        lo, hi = self.inner.cumulative_integral(points, tol / float(self.factor), max_cells)
        return lo * float(self.factor), hi * float(self.factor)

    def lattice_values(self, k, shift):
        lo, hi = self.inner.lattice_values(k, shift)
        f = float(self.factor)
        return lo * f, hi * f

    def is_monotone(self, grid=None):
        if self.factor == 0:
            return MonotonicityReport(True)
        return self.inner.is_monotone(grid)

    def discontinuities(self):
        return Empty() if self.factor == 0 else self.inner.discontinuities()

    def derivative(self, x):
        d = self.inner.derivative(x)
        return None if d is None else self.factor * d


# -- operation names ----------------------------------------------------------

def evaluate(curve: AllocationCurve, x):
    return curve(x)


def integrate(curve: AllocationCurve, a, b, tol: float = DEFAULT_TOL, max_cells: int = DEFAULT_MAX_CELLS):
    return curve.integrate(a, b, tol, max_cells)


def is_monotone(curve: AllocationCurve, grid=None) -> MonotonicityReport:
    return curve.is_monotone(grid)


def discontinuities(curve: AllocationCurve) -> DiscontinuitySet:
    return curve.discontinuities()


__all__ = [
    "AllocationCurve",
    "Cantor",
    "MonotonicityReport",
    "PiecewiseConstant",
    "PiecewisePolynomial",
    "Scale",
    "StepSeries",
    "Sum",
    "classify_species",
    "constant",
    "derived_set",
    "discontinuities",
    "evaluate",
    "identity",
    "integrate",
    "is_monotone",
    "monomial",
    "step",
]
