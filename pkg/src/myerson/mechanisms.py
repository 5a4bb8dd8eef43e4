"""Single-parameter auctions built from per-agent allocation curves.

Fix everybody else's bids and an agent's allocation becomes a curve in that
agent's own bid.  Payments are then read off the Myerson rule for that curve
(or a direct rule such as pay-your-bid), which is all ``run`` needs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple

from .curves import AllocationCurve, PiecewiseConstant, PiecewisePolynomial, constant
from .grid import GridSpec, as_points
from .numbers import IntervalBound, as_fraction
from .payment import MyersonPayment, PaymentCurve, PaymentTable, as_value_array

FAMILIES = ("single_item", "top_k", "linear_capped")
PAYMENT_RULES = ("myerson", "pay_your_bid")
DEVIATION_GRID = GridSpec(Fraction(0), Fraction(10), Fraction(1, 4))


@dataclass(frozen=True)
class PayYourBid(PaymentCurve):
    """``g(b) = b * f(b)``: the winner pays the bid.  Not truthful."""

    curve: AllocationCurve
    form = "pay_your_bid"

    def evaluate(self, x) -> IntervalBound:
        x = as_fraction(x)
        return IntervalBound.point(x * self.curve(x))

    def tabulate(self, points, tol=None) -> PaymentTable:
        pts = [as_fraction(p) for p in points]
        base = as_value_array(p * self.curve(p) for p in pts)
        zero = as_value_array([Fraction(0)] * len(pts))
        return PaymentTable(pts, base, zero, zero, None)


@dataclass(frozen=True)
class Mechanism:
    """An n-agent mechanism from a built-in allocation family.

    ``single_item`` gives one unit to the highest bid, ``top_k`` one unit to
    each of the ``k`` highest bids, and ``linear_capped`` gives each agent
    ``min(b_i, cap)`` with no interaction.  Ties go to the lower agent index.
    """

    family: str
    n: int
    k: int = 1
    cap: Fraction = Fraction(1)
    payment: str = "myerson"
    pivots: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown mechanism family {self.family!r}")
        if self.payment not in PAYMENT_RULES:
            raise ValueError(f"unknown payment rule {self.payment!r}")
        if self.n < 1:
            raise ValueError("a mechanism needs at least one agent")
        if self.family == "single_item" and self.k != 1:
            raise ValueError("single_item always sells exactly one unit")
        if self.k < 1:
            raise ValueError("k must be positive")
        cap = as_fraction(self.cap)
        if cap <= 0:
            raise ValueError("cap must be positive")
        pivots = tuple(as_fraction(c) for c in self.pivots) or (Fraction(0),) * self.n
        if len(pivots) != self.n:
            raise ValueError(f"expected {self.n} pivots, got {len(pivots)}")
        if any(c < 0 for c in pivots):
            raise ValueError("pivots must be nonnegative")
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "pivots", pivots)

    def allocation_curve(self, i: int, bids: Sequence) -> AllocationCurve:
        """Agent ``i``'s allocation as a function of its own bid; ``bids[i]`` is ignored."""
        bids = _check_bids(bids, self.n)
        if self.family == "linear_capped":
            return PiecewisePolynomial([self.cap], [(0, 1), (self.cap,)])
        others = [(b, j) for j, b in enumerate(bids) if j != i]
        if len(others) < self.k:
            return constant(1)
        q = sorted((b for b, _ in others), reverse=True)[self.k - 1]
        # at b_i == q agent i also loses to every tied opponent with a lower index
        beaters = sum(1 for b, j in others if b > q or (b == q and j < i))
        wins_at_q = 1 if beaters < self.k else 0
        return PiecewiseConstant([q], [0, 1], point_values=[wins_at_q])

    def payment_curve(self, i: int, bids: Sequence) -> PaymentCurve:
        curve = self.allocation_curve(i, bids)
        if self.payment == "pay_your_bid":
            return PayYourBid(curve)
        return MyersonPayment(curve, self.pivots[i])

    def with_payment(self, payment: str) -> "Mechanism":
        return Mechanism(self.family, self.n, self.k, self.cap, payment, self.pivots)


def single_item(n: int, payment: str = "myerson", pivots=()) -> Mechanism:
    return Mechanism("single_item", n, payment=payment, pivots=pivots)


def top_k(n: int, k: int, payment: str = "myerson", pivots=()) -> Mechanism:
    return Mechanism("top_k", n, k=k, payment=payment, pivots=pivots)


def linear_capped(n: int, cap=1, payment: str = "myerson", pivots=()) -> Mechanism:
    return Mechanism("linear_capped", n, cap=cap, payment=payment, pivots=pivots)


def _check_bids(bids, n) -> Tuple[Fraction, ...]:
    bids = tuple(as_fraction(b) for b in bids)
    if len(bids) != n:
        raise ValueError(f"expected {n} bids, got {len(bids)}")
    if any(b < 0 for b in bids):
        raise ValueError("bids must be nonnegative")
    return bids


@dataclass(frozen=True)
class Outcome:
    bids: Tuple[Fraction, ...]
    valuations: Tuple[Fraction, ...]
    allocation: Tuple[Fraction, ...]
    payments: Tuple[Fraction, ...]
    utilities: Tuple[Fraction, ...]

    @property
    def winners(self) -> Tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.allocation) if a > 0)


def run(m: Mechanism, bids: Sequence, valuations: Optional[Sequence] = None) -> Outcome:
    """Allocate, charge and score one bid profile.  Valuations default to the bids."""
    bids = _check_bids(bids, m.n)
    vals = bids if valuations is None else _check_bids(valuations, m.n)
    alloc, pay = [], []
    for i, b in enumerate(bids):
        a = m.allocation_curve(i, bids)(b)
        p = m.payment_curve(i, bids).evaluate(b).value
        alloc.append(a)
        pay.append(p)
    utilities = tuple(v * a - p for v, a, p in zip(vals, alloc, pay))
    return Outcome(bids, vals, tuple(alloc), tuple(pay), utilities)


@dataclass(frozen=True)
class DeviationWitness:
    agent: int
    opponents: Tuple[Fraction, ...]
    valuation: Fraction
    deviation: Fraction
    truthful_utility: Fraction
    deviation_utility: Fraction

    @property
    def gain(self) -> Fraction:
        return self.deviation_utility - self.truthful_utility


@dataclass
class TruthfulnessReport:
    passed: bool
    witnesses: List[DeviationWitness] = field(default_factory=list)
    profiles_checked: int = 0
    deviations_checked: int = 0


def opponent_profiles(m: Mechanism, i: int, valuations, seed: int = 0, samples: int = 16,
                      lattice=(0, Fraction(1, 2), 1, 2, 3)) -> List[Tuple[Fraction, ...]]:
    """Deterministic opponent bid profiles for agent ``i``.

    The truthful opponents come first, then every profile on ``lattice`` (when
    that stays small) and ``samples`` seeded rationals in [0, 10].
    """
    vals = _check_bids(valuations, m.n)
    k = m.n - 1
    profiles = [tuple(v for j, v in enumerate(vals) if j != i)]
    lattice = [as_fraction(v) for v in lattice]
    if len(lattice) ** k <= 4096:
        profiles.extend(product(lattice, repeat=k))
    rng = random.Random(seed * 7919 + i)
    for _ in range(samples):
        profiles.append(tuple(Fraction(rng.randint(0, 40), 4) for _ in range(k)))
    seen, out = set(), []
    for p in profiles:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _full_profile(i, own, opponents):
    return opponents[:i] + (own,) + opponents[i:]


def verify_truthfulness(m: Mechanism, valuations: Sequence, deviation_grid=None, tol=0,
                        profiles=None, seed: int = 0, samples: int = 16) -> TruthfulnessReport:
    """Search for a profitable unilateral deviation on a grid.

    ``profiles`` may map an agent index to its list of opponent profiles;
    otherwise :func:`opponent_profiles` supplies them.
    """
    vals = _check_bids(valuations, m.n)
    grid = DEVIATION_GRID if deviation_grid is None else deviation_grid
    tol = as_fraction(tol)
    witnesses = []
    n_profiles = n_devs = 0
    for i in range(m.n):
        opp_list = profiles[i] if profiles is not None else opponent_profiles(m, i, vals, seed, samples)
        v = vals[i]
        for opp in opp_list:
            opp = tuple(as_fraction(b) for b in opp)
            bids = _full_profile(i, v, opp)
            f = m.allocation_curve(i, bids)
            g = m.payment_curve(i, bids)
            truthful = v * f(v) - g.evaluate(v).value
            n_profiles += 1
            for b in as_points(grid, f):
                n_devs += 1
                u = v * f(b) - g.evaluate(b).value
                if u > truthful + tol:
                    witnesses.append(DeviationWitness(i, opp, v, b, truthful, u))
    witnesses.sort(key=lambda w: (w.agent, w.opponents, w.deviation))
    return TruthfulnessReport(not witnesses, witnesses, n_profiles, n_devs)
