"""Rational coercion and the closed-interval type used for integral brackets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

Number = Union[Fraction, float, int]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, floats and "p/q" strings to an exact Fraction.

    Floats are converted exactly (0.1 becomes its binary value), never rounded
    to the nearest short decimal.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Real):
        return Fraction(float(x))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class IntervalBound:
    """A closed bracket ``[lower, upper]`` around a real quantity.

    ``exact`` is set only when both ends are the same rational number.
    """

    lower: Number
    upper: Number
    exact: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"empty bracket [{self.lower}, {self.upper}]")
        if self.exact and self.lower != self.upper:
            raise ValueError("an exact bracket must have lower == upper")

    @classmethod
    def point(cls, value: Number) -> "IntervalBound":
        return cls(value, value, exact=is_exact(value))

    @property
    def width(self) -> Number:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Number:
        if self.exact:
            return self.lower
        return (self.lower + self.upper) / 2

    @property
    def value(self) -> Number:
        """The exact value; raises when the bracket has positive width."""
        if self.lower != self.upper:
            raise ValueError(f"bracket [{self.lower}, {self.upper}] is not a point")
        return self.lower

    def contains(self, x: Number, tol: Number = 0) -> bool:
        return self.lower - tol <= x <= self.upper + tol

    def __add__(self, other):
        if isinstance(other, IntervalBound):
            return IntervalBound(
                self.lower + other.lower,
                self.upper + other.upper,
                exact=self.exact and other.exact,
            )
        return IntervalBound(self.lower + other, self.upper + other, self.exact and is_exact(other))

    __radd__ = __add__

    def __neg__(self):
        return IntervalBound(-self.upper, -self.lower, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: Number) -> "IntervalBound":
        if factor < 0:
            return IntervalBound(self.upper * factor, self.lower * factor, self.exact and is_exact(factor))
        return IntervalBound(self.lower * factor, self.upper * factor, self.exact and is_exact(factor))

    def __str__(self):
        if self.exact:
            return str(self.lower)
        return f"[{self.lower!r}, {self.upper!r}]"


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return repr(x)
    return str(x)
