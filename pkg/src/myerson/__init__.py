"""Incentive-compatible payment rules for monotone allocation curves."""

from .curves import (
    AllocationCurve,
    Cantor,
    MonotonicityReport,
    PiecewiseConstant,
    PiecewisePolynomial,
    Scale,
    StepSeries,
    Sum,
    constant,
    discontinuities,
    evaluate,
    identity,
    integrate,
    is_monotone,
    monomial,
    step,
)
from .discontinuity import classify_species, derived_set
from .grid import GridSpec
from .ic_check import (
    InconclusiveBracket,
    PointAtBreakpoint,
    PreconditionNotIC,
    ViolationReport,
    check_derivative_identity,
    check_ic_pairs,
    check_monotone_necessity,
    check_revenue_equivalence,
    check_sandwich,
)
from .mechanisms import Mechanism, Outcome, run, verify_truthfulness
from .multidim import (
    BundleTable,
    Diagonal,
    Linear,
    check_ic_nd,
    is_ray_monotone,
    myerson_payment_nd,
    ray_reduce,
)
from .numbers import IntervalBound
from .payment import (
    DirectPayment,
    MyersonPayment,
    NotMonotone,
    eval_payment,
    myerson_payment,
    naive_by_parts_payment,
)

myerson = myerson_payment

__version__ = "0.1.0"
