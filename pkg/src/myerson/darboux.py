"""Adaptive Darboux brackets for integrals of monotone functions.

Every evaluation happens at a dyadic lattice point ``k / 2**shift`` so that
integrands such as the Cantor function can be evaluated with exact integer
digit arithmetic.  Cells on which the integrand is flat are retired with a
zero-width contribution; the rest are bisected breadth-first until the total
bracket width drops below ``tol`` or the partition would exceed ``max_cells``.

Floating-point rounding of the final sums (relative 1e-16) is not tracked.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Tuple

import numpy as np

from .numbers import as_fraction

DEFAULT_SHIFT = 40
DEFAULT_TOL = 1e-9
DEFAULT_MAX_CELLS = 2**24

LatticeEval = Callable[[np.ndarray, int], Tuple[np.ndarray, np.ndarray]]


@dataclass
class DarbouxResult:
    lower: np.ndarray
    upper: np.ndarray
    converged: bool
    cells: int
    levels: int

    @property
    def width(self) -> float:
        return float(np.sum(self.upper - self.lower))


def _floor_ceil(p: Fraction, scale: int) -> Tuple[int, int]:
    num = p.numerator * scale
    lo = num // p.denominator
    hi = -((-num) // p.denominator)
    return lo, hi


def darboux_segments(
    lattice_eval: LatticeEval,
    points: Sequence,
    tol: float = DEFAULT_TOL,
    max_cells: int = DEFAULT_MAX_CELLS,
    shift: int = DEFAULT_SHIFT,
) -> DarbouxResult:
    """Bracket ``int f`` over each consecutive segment of the sorted ``points``.

    ``lattice_eval(k, shift)`` must return ``(lo, hi)`` float arrays with
    ``lo <= f(k / 2**shift) <= hi`` for a nondecreasing ``f``.
    """
    pts = [as_fraction(p) for p in points]
    if any(b < a for a, b in zip(pts, pts[1:])):
        raise ValueError("points must be sorted")
    scale = 1 << shift
    if pts and pts[-1] * scale >= 2**62:
        raise ValueError(f"point {pts[-1]} is beyond the lattice range for shift={shift}")
    n_seg = max(len(pts) - 1, 0)
    seg_lo = np.zeros(n_seg)
    seg_hi = np.zeros(n_seg)
    if n_seg == 0:
        return DarbouxResult(seg_lo, seg_hi, True, 0, 0)
    h = 2.0**-shift

    # irregular end pieces: (segment, length, k for lower value, k for upper value)
    ends = []
    cell_l, cell_r, cell_s = [], [], []
    for s, (a, b) in enumerate(zip(pts, pts[1:])):
        if a == b:
            continue
        fa, ca = _floor_ceil(a, scale)
        fb, cb = _floor_ceil(b, scale)
        if ca > fb:
            ends.append((s, float(b - a), fa, cb))
            continue
        if ca != fa:
            ends.append((s, float(Fraction(ca, scale) - a), fa, ca))
        if cb != fb:
            ends.append((s, float(b - Fraction(fb, scale)), fb, cb))
        if fb > ca:
            cell_l.append(ca)
            cell_r.append(fb)
            cell_s.append(s)

    if ends:
        e_seg = np.array([e[0] for e in ends], dtype=np.int64)
        e_len = np.array([e[1] for e in ends])
        e_klo = np.array([e[2] for e in ends], dtype=np.int64)
        e_khi = np.array([e[3] for e in ends], dtype=np.int64)
        lo_vals, _ = lattice_eval(e_klo, shift)
        _, hi_vals = lattice_eval(e_khi, shift)
        np.add.at(seg_lo, e_seg, e_len * lo_vals)
        np.add.at(seg_hi, e_seg, e_len * hi_vals)

    left = np.array(cell_l, dtype=np.int64)
    right = np.array(cell_r, dtype=np.int64)
    seg = np.array(cell_s, dtype=np.int64)
    if left.size:
        f_left, _ = lattice_eval(left, shift)
        _, f_right = lattice_eval(right, shift)
    else:
        f_left = f_right = np.zeros(0)

    # cells whose rise is below flat_eps are retired; their total width stays
    # under 1e-3 * tol
    total_len = float(pts[-1] - pts[0])
    flat_eps = 1e-3 * tol / max(total_len, 1.0)
    retired = 0
    levels = 0
    converged = False
    while True:
        span = (right - left).astype(np.float64) * h
        width = span * (f_right - f_left)
        done = (f_right - f_left <= flat_eps) | (right - left <= 1)
        if done.any():
            np.add.at(seg_lo, seg[done], span[done] * f_left[done])
            np.add.at(seg_hi, seg[done], span[done] * f_right[done])
            retired += int(done.sum())
            keep = ~done
            left, right, seg = left[keep], right[keep], seg[keep]
            f_left, f_right = f_left[keep], f_right[keep]
            span, width = span[keep], width[keep]
        total = float(np.sum(seg_hi - seg_lo)) + float(np.sum(width))
        if total <= tol:
            converged = True
            break
        if left.size == 0 or retired + 2 * left.size > max_cells:
            break
        mid = (left + right) // 2
        m_lo, m_hi = lattice_eval(mid, shift)
        left = np.concatenate([left, mid])
        right = np.concatenate([mid, right])
        seg = np.concatenate([seg, seg])
        f_left, f_right = np.concatenate([f_left, m_lo]), np.concatenate([m_hi, f_right])
        levels += 1

    if left.size:
        span = (right - left).astype(np.float64) * h
        np.add.at(seg_lo, seg, span * f_left)
        np.add.at(seg_hi, seg, span * f_right)
    return DarbouxResult(seg_lo, seg_hi, converged, retired + int(left.size), levels)
