"""Vector-valued allocations, studied one ray at a time.

For a ray through ``x`` the scalar curve ``f_x(t) = f(t x) . x`` carries all
the information the incentive inequality needs along that ray, and the
payment ``g(x) = C + f(x) . x - int_0^1 f(z x) . x dz`` is the scalar Myerson
payment of ``f_x`` evaluated at ``t = 1``.

Every variant here reduces to a piecewise constant or piecewise polynomial
curve on every ray, so ray monotonicity is decided exactly.

Ray monotonicity plus the payment formula only secures the inequality for
pairs on a common ray.  Pairs on different rays also need ``f`` to be a
gradient field (a symmetric ``Linear`` matrix, a ``Diagonal``, a separable
``BundleTable``).  A ray-monotone ``Linear(((1, 1), (0, 1)))`` passes every
ray but fails off-ray pairs, which ``check_ic_nd`` reports with
``side="vector"``.
"""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .curves import AllocationCurve, PiecewiseConstant, PiecewisePolynomial, Sum, constant
from .ic_check import FLOAT_TOL, InconclusiveBracket, ViolationReport, Witness
from .numbers import IntervalBound, as_fraction, is_exact
from .payment import MyersonPayment

Vector = Tuple[Fraction, ...]
ZERO = Fraction(0)


class NotRayMonotone(ValueError):
    def __init__(self, ray, witness):
        self.ray = ray
        self.witness = witness
        super().__init__(f"allocation is not monotone along ray {_fmt(ray)} (witness t-pair {witness})")


def _fmt(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


def as_vector(x, n: Optional[int] = None) -> Vector:
    v = tuple(as_fraction(c) for c in x)
    if n is not None and len(v) != n:
        raise ValueError(f"expected a vector of length {n}, got {len(v)}")
    if any(c < 0 for c in v):
        raise ValueError("vectors must be nonnegative")
    return v


def dot(a: Sequence, b: Sequence):
    return sum((p * q for p, q in zip(a, b)), ZERO)


# -- scalar curve algebra used by the reductions --------------------------------

def _dilate(curve: AllocationCurve, a: Fraction) -> AllocationCurve:
    """``t -> curve(a t)`` for the piecewise families."""
    if a == 0:
        return constant(curve(ZERO))
    if isinstance(curve, PiecewiseConstant):
        return PiecewiseConstant([q / a for q in curve.breakpoints], curve.values, curve.point_values)
    if isinstance(curve, PiecewisePolynomial):
        coeffs = [tuple(c * a**k for k, c in enumerate(piece)) for piece in curve.coefficients]
        return PiecewisePolynomial([q / a for q in curve.breakpoints], coeffs)
    raise TypeError(f"coordinate curves must be piecewise constant or polynomial, not {type(curve).__name__}")


def _scale(curve: AllocationCurve, c: Fraction) -> AllocationCurve:
    if isinstance(curve, PiecewiseConstant):
        pv = None if curve.point_values is None else [c * v for v in curve.point_values]
        return PiecewiseConstant(curve.breakpoints, [c * v for v in curve.values], pv)
    coeffs = [tuple(c * v for v in piece) for piece in curve.coefficients]
    return PiecewisePolynomial(curve.breakpoints, coeffs)


def _as_polynomial(curve: AllocationCurve) -> Optional[PiecewisePolynomial]:
    if isinstance(curve, PiecewisePolynomial):
        return curve
    if isinstance(curve, PiecewiseConstant) and curve.point_values is None:
        return PiecewisePolynomial(curve.breakpoints, [(v,) for v in curve.values])
    return None


def _poly_add(p, q):
    n = max(len(p), len(q))
    return tuple((p[k] if k < len(p) else ZERO) + (q[k] if k < len(q) else ZERO) for k in range(n))


def _add(a: AllocationCurve, b: AllocationCurve) -> AllocationCurve:
    """Exact sum staying inside the piecewise families when possible."""
    bps = sorted(set(a.breakpoints) | set(b.breakpoints))
    probes = _probes(bps)
    if isinstance(a, PiecewiseConstant) and isinstance(b, PiecewiseConstant):
        vals = [a(p) + b(p) for p in probes]
        pv = [a(q) + b(q) for q in bps]
        return PiecewiseConstant(bps, vals, pv)
    pa, pb = _as_polynomial(a), _as_polynomial(b)
    if pa is None or pb is None:
        return Sum(a, b)
    coeffs = [_poly_add(pa.coefficients[pa._piece(p)], pb.coefficients[pb._piece(p)]) for p in probes]
    return PiecewisePolynomial(bps, coeffs)


def _probes(bps):
    """One interior point per piece of a partition."""
    if not bps:
        return [Fraction(1)]
    inner = [(a + b) / 2 for a, b in zip(bps, bps[1:])]
    first = bps[0] / 2 if bps[0] > 0 else None
    pts = ([first] if first is not None else [bps[0]]) + inner + [bps[-1] + 1]
    return pts


# -- variants -------------------------------------------------------------------

class VectorAllocation:
    n: int

    def __call__(self, x) -> Vector:
        raise NotImplementedError

    def ray_curve(self, x: Vector) -> AllocationCurve:
        raise NotImplementedError


@dataclass(frozen=True)
class Diagonal(VectorAllocation):
    """Coordinate ``i`` of the allocation depends only on coordinate ``i`` of the bid."""

    curves: Tuple[AllocationCurve, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        for c in self.curves:
            if not isinstance(c, (PiecewiseConstant, PiecewisePolynomial)):
                raise TypeError("Diagonal supports piecewise constant and polynomial coordinates")

    @property
    def n(self):
        return len(self.curves)

    def __call__(self, x) -> Vector:
        x = as_vector(x, self.n)
        return tuple(c(xi) for c, xi in zip(self.curves, x))

    def ray_curve(self, x: Vector) -> AllocationCurve:
        total = None
        for c, xi in zip(self.curves, x):
            if xi == 0:
                continue
            term = _scale(_dilate(c, xi), xi)
            total = term if total is None else _add(total, term)
        return constant(0) if total is None else total


@dataclass(frozen=True)
class Linear(VectorAllocation):
    """``f(x) = M x`` for a nonnegative rational matrix ``M``."""

    matrix: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        m = tuple(tuple(as_fraction(v) for v in row) for row in self.matrix)
        if not m or any(len(row) != len(m) for row in m):
            raise ValueError("matrix must be square and nonempty")
        if any(v < 0 for row in m for v in row):
            raise ValueError("matrix entries must be nonnegative")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, n: int) -> "Linear":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def n(self):
        return len(self.matrix)

    def __call__(self, x) -> Vector:
        x = as_vector(x, self.n)
        return tuple(dot(row, x) for row in self.matrix)

    def ray_curve(self, x: Vector) -> AllocationCurve:
        quad = dot(x, self(x))
        return PiecewisePolynomial([], [(0, quad)])


@dataclass(frozen=True)
class BundleTable(VectorAllocation):
    """Allocation constant on lattice cells.

    ``cuts[d]`` are the positive cell boundaries along axis ``d``; a cell is
    ``(c_k, c_{k+1}]`` so boundaries belong to the lower cell.  ``table`` maps
    a cell index tuple to the allocation vector on that cell.
    """

    cuts: Tuple[Tuple[Fraction, ...], ...]
    table: Dict[Tuple[int, ...], Vector] = field(hash=False)

    def __post_init__(self):
        cuts = tuple(tuple(as_fraction(c) for c in axis) for axis in self.cuts)
        for axis in cuts:
            if any(c <= 0 for c in axis) or any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError("cuts must be positive and strictly increasing")
        table = {tuple(k): as_vector(v, len(cuts)) for k, v in dict(self.table).items()}
        for idx in product(*(range(len(axis) + 1) for axis in cuts)):
            if idx not in table:
                raise ValueError(f"table has no entry for cell {idx}")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "table", table)

    @property
    def n(self):
        return len(self.cuts)

    def cell(self, x: Vector) -> Tuple[int, ...]:
        return tuple(bisect_left(axis, xi) for axis, xi in zip(self.cuts, x))

    def __call__(self, x) -> Vector:
        return self.table[self.cell(as_vector(x, self.n))]

    def ray_curve(self, x: Vector) -> AllocationCurve:
        bps = sorted({c / xi for axis, xi in zip(self.cuts, x) if xi > 0 for c in axis})
        vals = [dot(self(tuple(p * xi for xi in x)), x) for p in _probes(bps)]
        return PiecewiseConstant(bps, vals)


# -- reductions and payments --------------------------------------------------

@dataclass(frozen=True)
class RayReduction:
    ray: Vector
    curve: AllocationCurve

    def payment(self, C=0) -> MyersonPayment:
        return MyersonPayment(self.curve, as_fraction(C))


def ray_reduce(f: VectorAllocation, x) -> RayReduction:
    x = as_vector(x, f.n)
    return RayReduction(x, f.ray_curve(x))


@dataclass
class RayMonotonicityReport:
    monotone: bool
    witnesses: List[Tuple[Vector, Tuple[Fraction, Fraction]]] = field(default_factory=list)

    def __bool__(self):
        return self.monotone


def is_ray_monotone(f: VectorAllocation, rays) -> RayMonotonicityReport:
    rays = [as_vector(r, f.n) for r in rays]
    if not rays:
        raise ValueError("need at least one ray")
    witnesses = []
    for r in rays:
        report = ray_reduce(f, r).curve.is_monotone()
        if not report.monotone:
            witnesses.append((r, report.witness))
    return RayMonotonicityReport(not witnesses, witnesses)


def myerson_payment_nd(f: VectorAllocation, x, C=0, check: bool = True) -> IntervalBound:
    """``C + f(x) . x - int_0^1 f(z x) . x dz`` through the scalar curve on the ray."""
    red = ray_reduce(f, x)
    if check:
        report = red.curve.is_monotone()
        if not report.monotone:
            raise NotRayMonotone(red.ray, report.witness)
    return red.payment(C).evaluate(1)


@dataclass(frozen=True)
class VectorMyersonPayment:
    f: VectorAllocation
    C: Fraction = ZERO

    def __call__(self, x) -> IntervalBound:
        return myerson_payment_nd(self.f, x, self.C)


def _as_bound(v) -> IntervalBound:
    return v if isinstance(v, IntervalBound) else IntervalBound.point(as_fraction(v) if is_exact(v) else float(v))


RAY_SCALARS = (ZERO, Fraction(1, 2), Fraction(1), Fraction(2))


def check_ic_nd(f: VectorAllocation, g: Callable, pairs, tol=None, ray_scalars=RAY_SCALARS) -> ViolationReport:
    """Check ``g(y) - g(x) >= (f(y) - f(x)) . x`` on every sampled pair.

    The ray route is checked as well: for each sampled ``x`` and scalars
    ``s, t`` the scalar inequality on ``(f_x, g_x)`` is the vector inequality
    at ``(s x, t x)``; such witnesses carry ``side="ray"``.
    """
    pairs = [(as_vector(x, f.n), as_vector(y, f.n)) for x, y in pairs]
    cache: Dict[Vector, IntervalBound] = {}

    def g_at(v):
        if v not in cache:
            cache[v] = _as_bound(g(v))
        return cache[v]

    tasks = [(x, y, "vector") for x, y in pairs]
    scalars = [as_fraction(s) for s in ray_scalars]
    for x in dict.fromkeys(x for x, _ in pairs):
        for s, t in product(scalars, repeat=2):
            if s != t:
                tasks.append((tuple(s * c for c in x), tuple(t * c for c in x), "ray"))
    exact = all(g_at(v).exact for x, y, _ in tasks for v in (x, y))
    if tol is None:
        tol = ZERO if exact else FLOAT_TOL
    witnesses, undecided = [], 0
    for x, y, side in tasks:
        diff = g_at(y) - g_at(x)
        rhs = dot([b - a for a, b in zip(f(x), f(y))], x)
        if not exact:
            rhs = float(rhs)
        if diff.upper < rhs - tol:
            witnesses.append(Witness(x, y, diff.upper, rhs, diff.upper - rhs, side))
        elif diff.lower < rhs - tol:
            undecided += 1
    witnesses.sort(key=lambda w: (w.x, w.y, w.side))
    worst = max((w.rhs - w.lhs for w in witnesses), default=0)
    report = ViolationReport(not witnesses, witnesses, worst, len(tasks), tol, undecided)
    if not witnesses and undecided:
        raise InconclusiveBracket(report, undecided)
    return report


def sample_vectors(n: int, count: int, seed: int = 0, high: int = 10, denominator: int = 100) -> List[Vector]:
    """Seeded rational vectors in ``[0, high]^n`` plus every axis and the diagonal."""
    rng = random.Random(seed)
    axes = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    diagonal = [tuple(Fraction(1) for _ in range(n))]
    drawn = [tuple(Fraction(rng.randint(0, high * denominator), denominator) for _ in range(n)) for _ in range(count)]
    return axes + diagonal + drawn


def sample_pairs(n: int, count: int, seed: int = 0) -> List[Tuple[Vector, Vector]]:
    """``count`` seeded pairs, led by every ordered pair of axis and diagonal vectors."""
    vecs = sample_vectors(n, 2 * count, seed)
    fixed = vecs[: n + 1]
    pairs = [(a, b) for a in fixed for b in fixed if a != b]
    drawn = vecs[n + 1:]
    pairs.extend(zip(drawn[0::2], drawn[1::2]))
    return pairs[:count]
