from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from myerson.curves import (
    Cantor,
    PiecewiseConstant,
    PiecewisePolynomial,
    StepSeries,
    Sum,
    constant,
    identity,
    integrate,
    monomial,
    step,
)
from myerson.grid import STANDARD_GRID
from myerson.payment import (
    DirectPayment,
    NaiveFormulaUndefined,
    NotMonotone,
    eval_payment,
    myerson_payment,
    naive_by_parts_payment,
)

from conftest import rational_in

HALF = Fraction(1, 2)
KINKED = PiecewisePolynomial([1], [(0, 1), (HALF, 0, HALF)])
EXACT_CURVES = [step(HALF), PiecewiseConstant([Fraction(1, 4), 1], [0, 2, 3]), identity(), monomial(2), KINKED,
                StepSeries(), Sum(step(1), identity())]


def test_step_payment_piecewise():
    g = myerson_payment(step(HALF))
    assert eval_payment(g, Fraction(1, 4)).value == 0
    assert eval_payment(g, HALF).value == 0
    assert eval_payment(g, Fraction(3, 5)).value == HALF
    assert eval_payment(g, 1).value == HALF


@given(rational_in(0, 4))
def test_identity_payment_is_half_square(x):
    assert eval_payment(myerson_payment(identity()), x).value == x * x / 2


@given(rational_in(0, 4), rational_in(0, 10))
def test_zero_allocation_charges_pivot(x, c):
    assert eval_payment(myerson_payment(constant(0), c), x).value == c


@pytest.mark.parametrize("f", EXACT_CURVES + [Cantor()], ids=lambda f: type(f).__name__)
def test_payment_at_zero_is_pivot(f):
    assert eval_payment(myerson_payment(f, Fraction(7, 2)), 0).contains(Fraction(7, 2), 1e-12)


def test_cantor_payment_at_one():
    b = eval_payment(myerson_payment(Cantor()), 1)
    assert b.contains(0.5, 1e-6) and b.width <= 1e-6


def test_payment_exactness_follows_curve():
    assert myerson_payment(step(HALF)).form == "closed"
    assert myerson_payment(Cantor()).form == "bracketed"
    assert eval_payment(myerson_payment(StepSeries()), 1).exact


def test_step_series_payment_at_one():
    # 1 * f(1) - int_0^1 f = 1 - 1/3
    assert eval_payment(myerson_payment(StepSeries()), 1).value == Fraction(2, 3)


def test_non_monotone_curve_rejected():
    with pytest.raises(NotMonotone) as exc:
        myerson_payment(PiecewiseConstant([1], [1, 0]))
    x, y = exc.value.witness
    assert x < y


def test_unchecked_formula_is_still_available():
    g = myerson_payment(PiecewiseConstant([1], [1, 0]), check=False)
    assert eval_payment(g, 2).value == -1  # q * jump = 1 * (0 - 1)


@pytest.mark.parametrize("f", EXACT_CURVES + [Cantor()], ids=lambda f: type(f).__name__)
def test_closed_form_matches_definition(f):
    g = myerson_payment(f, Fraction(7, 2), tol=1e-7)
    for x in STANDARD_GRID.base_points()[::10]:
        lhs = eval_payment(g, x) - Fraction(7, 2)
        rhs = x * f(x) - integrate(f, 0, x) if f.exact else float(x) * f(x) - integrate(f, 0, x, tol=1e-7)
        assert lhs.lower <= rhs.upper + 1e-7 and rhs.lower <= lhs.upper + 1e-7
        if f.exact:
            assert lhs.value == rhs.value


def test_jump_sum_matches_definition_at_every_breakpoint():
    f = PiecewiseConstant([Fraction(1, 3), HALF, 1], [0, 1, 3, 4], point_values=[1, 1, 4])
    g = myerson_payment(f)
    for x in [0, Fraction(1, 3), Fraction(2, 5), HALF, Fraction(3, 4), 1, 2]:
        x = Fraction(x)
        assert eval_payment(g, x).value == x * f(x) - integrate(f, 0, x).value


@pytest.mark.parametrize("f", EXACT_CURVES, ids=lambda f: type(f).__name__)
@given(x=rational_in(0, 2), c=rational_in(0, 10))
def test_pivot_shift_is_exact(f, x, c):
    assert eval_payment(myerson_payment(f, c), x).value == eval_payment(myerson_payment(f), x).value + c


@given(q=rational_in(0, 3), x=rational_in(0, 5))
def test_by_parts_gap_is_minus_q(q, x):
    if x <= q:
        return
    f = step(q)
    gap = naive_by_parts_payment(f, x).value - eval_payment(myerson_payment(f), x).value
    assert gap == -q


def test_naive_payment_examples():
    assert naive_by_parts_payment(step(HALF), 1).value == 0
    assert naive_by_parts_payment(Cantor(), 1).value == 0
    assert naive_by_parts_payment(identity(), 1).value == HALF


@pytest.mark.parametrize("f", [identity(), monomial(2), monomial(3, 2), KINKED], ids=str)
def test_naive_equals_myerson_for_smooth_curves(f):
    g = myerson_payment(f)
    for x in STANDARD_GRID.base_points():
        assert abs(naive_by_parts_payment(f, x).value - eval_payment(g, x).value) <= 1e-9


def test_naive_payment_undefined_for_unknown_curves():
    class Opaque(type(identity()).__mro__[1]):
        exact = True

        def __call__(self, x):
            return x

    with pytest.raises(NaiveFormulaUndefined):
        naive_by_parts_payment(Opaque(), 1)


def test_direct_and_perturbed_payments():
    g = myerson_payment(step(HALF))
    bumped = g + step(Fraction(3, 4))
    assert bumped.evaluate(1).value == Fraction(3, 2)
    assert (g + 5).evaluate(0).value == 5
    assert DirectPayment(identity()).evaluate(Fraction(3)).value == 3


def test_tabulate_matches_evaluate():
    for f in [step(HALF), monomial(2), Cantor(), Sum(step(1), Cantor())]:
        g = myerson_payment(f, 1, tol=1e-7)
        pts = [Fraction(k, 7) for k in range(15)]
        table = g.tabulate(pts, 1e-7)
        for i, p in enumerate(pts):
            a, b = table.bracket(i), g.evaluate(p)
            assert a.lower <= b.upper + 1e-7 and b.lower <= a.upper + 1e-7
