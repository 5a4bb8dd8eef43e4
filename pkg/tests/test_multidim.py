import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from myerson.curves import PiecewiseConstant, PiecewisePolynomial, identity, monomial, step
from myerson.grid import GridSpec
from myerson.ic_check import check_ic_pairs
from myerson.multidim import (
    BundleTable,
    Diagonal,
    Linear,
    NotRayMonotone,
    VectorMyersonPayment,
    check_ic_nd,
    is_ray_monotone,
    myerson_payment_nd,
    ray_reduce,
    sample_pairs,
    sample_vectors,
)
from myerson.numbers import IntervalBound
from myerson.payment import eval_payment, myerson_payment

from conftest import rational_in

HALF = Fraction(1, 2)
vec2 = st.tuples(rational_in(0, 5, 16), rational_in(0, 5, 16))

# separable: each good's allocation depends on its own quantity only
BUNDLE = BundleTable(((1, 2), (1,)), {(i, j): (i, 2 * j) for i in range(3) for j in range(2)})
# ray-monotone, but the second good reacts to the first good's quantity
CROSS = BundleTable(
    ((1, 2), (1,)),
    {(0, 0): (0, 0), (1, 0): (1, 0), (2, 0): (2, 0), (0, 1): (0, 1), (1, 1): (1, 1), (2, 1): (2, 2)},
)
VARIANTS = {
    "linear_identity": Linear.identity(2),
    "linear_sym": Linear(((2, 1), (1, 3))),
    "diag_steps": Diagonal((step(HALF), step(HALF))),
    "diag_mixed": Diagonal((step(1), identity())),
    "diag_poly": Diagonal((monomial(2), PiecewisePolynomial([1], [(0, 1), (HALF, 0, HALF)]))),
    "bundle": BUNDLE,
}


def test_linear_ray_reduction():
    red = ray_reduce(Linear.identity(2), (1, 1))
    assert red.curve(Fraction(3)) == 6 and red.curve(1) == 2


def test_zero_ray_reduces_to_zero():
    for f in VARIANTS.values():
        c = ray_reduce(f, (0, 0)).curve
        assert all(c(t) == 0 for t in (0, 1, 5))


def test_diagonal_steps_on_diagonal():
    c = ray_reduce(Diagonal((step(HALF), step(HALF))), (1, 1)).curve
    assert c(HALF) == 0 and c(Fraction(3, 5)) == 2 and c(5) == 2


@pytest.mark.parametrize("name", sorted(VARIANTS))
@given(x=vec2, t=rational_in(0, 3, 16))
def test_ray_curve_matches_definition(name, x, t):
    f = VARIANTS[name]
    red = ray_reduce(f, x)
    direct = sum(a * b for a, b in zip(f(tuple(t * c for c in x)), x))
    assert red.curve(t) == direct


def test_linear_symmetric_is_ray_monotone():
    assert is_ray_monotone(Linear(((2, 1), (1, 3))), sample_vectors(2, 50, 1))


def test_decreasing_coordinate_is_caught_on_its_axis():
    f = Diagonal((PiecewiseConstant([1], [1, 0]), identity()))
    report = is_ray_monotone(f, [(1, 0), (0, 1)])
    assert not report.monotone
    assert [r for r, _ in report.witnesses] == [(1, 0)]
    with pytest.raises(NotRayMonotone):
        myerson_payment_nd(f, (2, 0))


def test_constant_allocation_is_ray_monotone_and_free():
    f = Diagonal((PiecewiseConstant([], [3]), PiecewiseConstant([], [1])))
    assert is_ray_monotone(f, [(1, 0), (1, 1)])
    assert myerson_payment_nd(f, (2, 5), C=Fraction(7, 3)).value == Fraction(7, 3)


def test_linear_identity_payment():
    assert myerson_payment_nd(Linear.identity(2), (1, 1)).value == 1


@given(rational_in(0, 10, 100))
def test_one_dimension_matches_scalar(x):
    for c in (step(HALF), monomial(2), identity()):
        assert myerson_payment_nd(Diagonal((c,)), (x,)).value == eval_payment(myerson_payment(c), x).value


@pytest.mark.parametrize("name", sorted(VARIANTS))
@given(x=vec2)
def test_zero_vector_pays_pivot(name, x):
    assert myerson_payment_nd(VARIANTS[name], (0, 0), C=Fraction(5, 2)).value == Fraction(5, 2)


@pytest.mark.parametrize("name", sorted(VARIANTS))
@given(x=vec2)
def test_substitution_identity(name, x):
    f = VARIANTS[name]
    c = ray_reduce(f, x).curve
    direct = sum(a * b for a, b in zip(f(x), x)) - c.integrate(0, 1).value
    assert myerson_payment_nd(f, x).value == direct


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_vector_ic_on_sampled_pairs(name):
    f = VARIANTS[name]
    assert check_ic_nd(f, VectorMyersonPayment(f), sample_pairs(2, 150, seed=4)).passed


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_vector_ic_implies_scalar_ic_on_rays(name):
    f = VARIANTS[name]
    grid = GridSpec(0, 2, Fraction(1, 10))
    for x in sample_vectors(2, 6, seed=9):
        red = ray_reduce(f, x)
        assert check_ic_pairs(red.curve, red.payment(), grid).passed


def test_pairs_on_one_ray_match_scalar_check():
    f = Diagonal((step(1), identity()))
    x = (Fraction(1), Fraction(2))
    bump_ray = x

    def g(v):
        base = myerson_payment_nd(f, v)
        on_ray = v[0] * bump_ray[1] == v[1] * bump_ray[0]
        if on_ray and v[0] > Fraction(3, 2):
            return base + IntervalBound.point(Fraction(1))
        return base

    ts = [Fraction(k, 4) for k in range(0, 12)]
    pairs = [(tuple(s * c for c in x), tuple(t * c for c in x)) for s in ts for t in ts]
    vec = check_ic_nd(f, g, pairs, ray_scalars=())
    assert not vec.passed
    assert all(w.x[0] * x[1] == w.x[1] * x[0] for w in vec.witnesses)
    # the same verdict from the scalar checker on (f_x, g_x)
    red = ray_reduce(f, x)
    scalar = check_ic_pairs(red.curve, red.payment() + step(Fraction(3, 2)), ts)
    assert not scalar.passed
    assert {(w.x, w.y) for w in scalar.witnesses} == {(w.x[0], w.y[0]) for w in vec.witnesses}


def test_diagonal_pairs_pass_trivially():
    f = Linear.identity(2)
    pts = sample_vectors(2, 20, seed=3)
    assert check_ic_nd(f, VectorMyersonPayment(f), [(p, p) for p in pts], ray_scalars=()).passed


def test_sampling_is_deterministic():
    assert sample_pairs(3, 50, seed=1) == sample_pairs(3, 50, seed=1)
    vecs = sample_vectors(2, 5)
    assert vecs[:3] == [(1, 0), (0, 1), (1, 1)]
    assert all(0 <= c <= 10 for v in vecs for c in v)


def test_bundle_table_validation():
    with pytest.raises(ValueError):
        BundleTable(((1,),), {(0,): (0,)})
    with pytest.raises(ValueError):
        BundleTable(((0,),), {(0,): (0,), (1,): (1,)})


def test_non_monotone_bundle_table_is_flagged():
    bad = BundleTable(((1,), (1,)), {(0, 0): (1, 1), (1, 0): (0, 0), (0, 1): (0, 0), (1, 1): (0, 0)})
    assert not is_ray_monotone(bad, [(1, 1)])


@pytest.mark.parametrize("f", [CROSS, Linear(((1, 1), (0, 1)))], ids=["cross_bundle", "skew_linear"])
def test_ray_monotone_is_not_enough_off_ray(f):
    assert is_ray_monotone(f, sample_vectors(2, 100, seed=3))
    report = check_ic_nd(f, VectorMyersonPayment(f), sample_pairs(2, 300, seed=4))
    assert not report.passed
    # every failure pairs two different rays; the ray route itself is clean
    assert {w.side for w in report.witnesses} == {"vector"}
    assert all(w.x[0] * w.y[1] != w.x[1] * w.y[0] for w in report.witnesses)
    for w in report.witnesses[:5]:
        gx, gy = myerson_payment_nd(f, w.x).value, myerson_payment_nd(f, w.y).value
        fx, fy = f(w.x), f(w.y)
        assert gy - gx < sum((b - a) * c for a, b, c in zip(fx, fy, w.x))
