"""Symbolic point sets for discontinuities, their derived sets and species type.

Only sets with a finite derived-set tower are representable: finite sets,
geometric sequences accumulating at a limit, nested versions of those, and
finite unions.  Dense sets are deliberately not representable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import typing
from typing import Iterator, Tuple

from .numbers import as_fraction


class RepresentationTooWild(ValueError):
    """Raised when a derived set cannot be expressed by these variants."""


class _Unsupported:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unsupported"

    def __bool__(self):
        return False


#: Returned by :func:`classify_species` when classification is not possible.
Unsupported = _Unsupported()


@dataclass(frozen=True)
class Empty:
    def points(self, cutoff: int = 8) -> Tuple[Fraction, ...]:
        return ()


@dataclass(frozen=True)
class Finite:
    points_: Tuple[Fraction, ...]

    def __init__(self, points):
        pts = tuple(sorted({as_fraction(p) for p in points}))
        if pts and pts[0] < 0:
            raise ValueError("discontinuity points must be nonnegative")
        object.__setattr__(self, "points_", pts)

    def points(self, cutoff: int = 8) -> Tuple[Fraction, ...]:
        return self.points_

    def __repr__(self):
        return f"Finite({[str(p) for p in self.points_]})"


@dataclass(frozen=True)
class GeometricAccumulation:
    """Points ``limit - scale * ratio**n`` (n >= 1) increasing to ``limit``.

    With ``depth > 1`` every such point is itself the limit of a copy of a
    depth-1 smaller set, squeezed into the gap below it (and so on
    recursively).  ``include_limit`` adds the limit and all cluster centres.
    ``cutoff`` bounds enumeration only; the set itself is infinite.
    """

    limit: Fraction
    scale: Fraction = Fraction(1)
    ratio: Fraction = Fraction(1, 2)
    depth: int = 1
    include_limit: bool = False
    cutoff: int = 64

    def __post_init__(self):
        object.__setattr__(self, "limit", as_fraction(self.limit))
        object.__setattr__(self, "scale", as_fraction(self.scale))
        object.__setattr__(self, "ratio", as_fraction(self.ratio))
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie strictly between 0 and 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.limit - self.scale < 0:
            raise ValueError("accumulation points must be nonnegative")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")

    def centres(self, cutoff: int | None = None) -> Iterator[Fraction]:
        """The top-level sequence ``limit - scale * ratio**n``."""
        n_max = self.cutoff if cutoff is None else cutoff
        for n in range(1, n_max + 1):
            yield self.limit - self.scale * self.ratio**n

    def _cluster(self, n: int) -> "GeometricAccumulation":
        centre = self.limit - self.scale * self.ratio**n
        gap = self.scale * self.ratio ** (n - 1) * (1 - self.ratio)
        return GeometricAccumulation(
            centre, gap / 2, self.ratio, self.depth - 1, self.include_limit, self.cutoff
        )

    def points(self, cutoff: int = 8) -> Tuple[Fraction, ...]:
        """Enumerate up to ``cutoff`` terms per nesting level."""
        out = set()
        if self.include_limit:
            out.add(self.limit)
        for n, c in enumerate(self.centres(cutoff), start=1):
            if self.depth == 1:
                out.add(c)
            else:
                out.update(self._cluster(n).points(cutoff))
        return tuple(sorted(out))


@dataclass(frozen=True)
class Union:
    parts: Tuple["DiscontinuitySet", ...] = field(default_factory=tuple)

    def points(self, cutoff: int = 8) -> Tuple[Fraction, ...]:
        out = set()
        for p in self.parts:
            out.update(p.points(cutoff))
        return tuple(sorted(out))


DiscontinuitySet = typing.Union[Empty, Finite, GeometricAccumulation, Union]


def union(*parts: DiscontinuitySet) -> DiscontinuitySet:
    """Normalised union: drops empties, merges finite parts, unwraps singletons."""
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Union) else [p])
    finite_pts = [q for p in flat if isinstance(p, Finite) for q in p.points_]
    rest = [p for p in flat if not isinstance(p, (Empty, Finite))]
    unique = []
    for p in rest:
        if p not in unique:
            unique.append(p)
    members = ([Finite(finite_pts)] if finite_pts else []) + unique
    if not members:
        return Empty()
    if len(members) == 1:
        return members[0]
    return Union(tuple(members))


def derived_set(s: DiscontinuitySet) -> DiscontinuitySet:
    """The set of limit points of ``s``."""
    if isinstance(s, (Empty, Finite)):
        return Empty()
    if isinstance(s, GeometricAccumulation):
        if s.depth == 1:
            return Finite([s.limit])
        return GeometricAccumulation(
            s.limit, s.scale, s.ratio, s.depth - 1, include_limit=True, cutoff=s.cutoff
        )
    if isinstance(s, Union):
        # derived set of a finite union is the union of the derived sets
        return union(*(derived_set(p) for p in s.parts))
    raise RepresentationTooWild(f"cannot form the derived set of {s!r}")


def classify_species(s: DiscontinuitySet, max_levels: int = 256):
    """First-species type of ``s``: the number of nonempty derived sets S', S'', ...

    Returns :data:`Unsupported` when a derived set cannot be represented or the
    tower does not reach the empty set within ``max_levels`` steps.
    """
    level = 0
    current = s
    try:
        while True:
            current = derived_set(current)
            if isinstance(current, Empty):
                return level
            level += 1
            if level > max_levels:
                return Unsupported
    except RepresentationTooWild:
        return Unsupported
