from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .numbers import as_fraction


@dataclass(frozen=True)
class GridSpec:
    """A finite rational grid ``start, start + step, ..., <= stop``.

    ``points_for(*curves)`` also folds in every breakpoint of the curves inside
    the range together with its ``breakpoint +- step/2`` neighbours, which is
    where violations for piecewise curves show up.
    """

    start: Fraction
    stop: Fraction
    step: Fraction
    extra: Tuple[Fraction, ...] = field(default_factory=tuple)

    def __post_init__(self):
        start, stop, step = (as_fraction(v) for v in (self.start, self.stop, self.step))
        if start < 0:
            raise ValueError("grid start must be nonnegative")
        if stop <= start:
            raise ValueError("grid stop must exceed start")
        if step <= 0:
            raise ValueError("grid step must be positive")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "stop", stop)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "extra", tuple(as_fraction(p) for p in self.extra))
        if any(p < 0 for p in self.extra):
            raise ValueError("grid points must be nonnegative")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"start:stop:step"``; each part may be ``p/q`` or a decimal."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like start:stop:step, got {text!r}")
        return cls(*(Fraction(p.strip()) for p in parts))

    @classmethod
    def from_points(cls, points: Iterable) -> "GridSpec":
        pts = sorted({as_fraction(p) for p in points})
        if not pts:
            raise ValueError("grid needs at least one point")
        stop = pts[-1] if pts[-1] > pts[0] else pts[0] + 1
        return cls(pts[0], stop, stop - pts[0], tuple(pts))

    def base_points(self) -> Tuple[Fraction, ...]:
        n = int((self.stop - self.start) // self.step)
        return tuple(self.start + i * self.step for i in range(n + 1))

    def points_for(self, *curves) -> Tuple[Fraction, ...]:
        pts = set(self.base_points()) | set(self.extra)
        half = self.step / 2
        for curve in curves:
            for q in curve.breakpoints:
                for p in (q - half, q, q + half):
                    if self.start <= p <= self.stop:
                        pts.add(p)
        return tuple(sorted(pts))

    def __str__(self):
        return f"{self.start}:{self.stop}:{self.step}"


STANDARD_GRID = GridSpec(Fraction(0), Fraction(2), Fraction(1, 100))


def as_points(grid, *curves) -> Sequence[Fraction]:
    """Accept a GridSpec, an explicit iterable of points, or None for the standard grid."""
    if grid is None:
        grid = STANDARD_GRID
    if isinstance(grid, GridSpec):
        return grid.points_for(*curves)
    pts = sorted({as_fraction(p) for p in grid})
    if not pts:
        raise ValueError("grid must be nonempty")
    return pts
