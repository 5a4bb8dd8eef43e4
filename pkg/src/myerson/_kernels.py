"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The numba versions are used when numba imports cleanly and the environment
variable ``MYERSON_DISABLE_NUMBA`` is unset (or ``0``).  Both flavours are
always importable under explicit names so tests and the benchmark can compare
them.  Object-dtype inputs (exact Fractions) always take the numpy path.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("MYERSON_DISABLE_NUMBA", "0") in ("", "0")

PASS, VIOLATION, INCONCLUSIVE = 0, 1, 2


# ----------------------------------------------------------------------------
# Cantor function at lattice points K / 2**shift
# ----------------------------------------------------------------------------

def cantor_lattice_numpy(k, shift, depth):
    k = np.asarray(k, dtype=np.int64).copy()
    one = np.int64(1) << np.int64(shift)
    mask = one - 1
    values = np.zeros(k.shape, dtype=np.float64)
    exact = np.zeros(k.shape, dtype=np.bool_)
    above = k >= one
    values[above] = 1.0
    exact[above] = True
    live = ~above
    bit = 0.5
    for _ in range(depth):
        if not live.any():
            break
        k[live] *= 3
        digit = k >> np.int64(shift)
        k &= mask
        hit_one = live & (digit == 1)
        hit_two = live & (digit == 2)
        values[hit_one | hit_two] += bit
        exact[hit_one] = True
        exact[live & (k == 0)] = True
        live &= ~exact
        bit *= 0.5
    return values, exact


def _cantor_lattice_loop(k, shift, depth):
    n = k.shape[0]
    one = np.int64(1) << np.int64(shift)
    mask = one - 1
    values = np.empty(n, dtype=np.float64)
    exact = np.empty(n, dtype=np.bool_)
    for i in range(n):
        num = k[i]
        if num >= one:
            values[i] = 1.0
            exact[i] = True
            continue
        v = 0.0
        bit = 0.5
        done = num == 0
        for _ in range(depth):
            if done:
                break
            num *= 3
            digit = num >> shift
            num &= mask
            if digit == 1:
                v += bit
                done = True
            else:
                if digit == 2:
                    v += bit
                if num == 0:
                    done = True
            bit *= 0.5
        values[i] = v
        exact[i] = done
    return values, exact


# ----------------------------------------------------------------------------
# All-pairs scans of the incentive inequality g(y) - g(x) >= x (f(y) - f(x))
#
# Payments are given as base - integral with the integral bracketed by
# cumulative lower/upper sums on one shared partition, so a pair difference
# is [dA - max(dL, dU), dA - min(dL, dU)].
# ----------------------------------------------------------------------------

def pair_status_numpy(x, f, a, lo, hi, tol):
    d_a = a[None, :] - a[:, None]
    d_lo = lo[None, :] - lo[:, None]
    d_hi = hi[None, :] - hi[:, None]
    lhs_lo = d_a - np.maximum(d_lo, d_hi)
    lhs_hi = d_a - np.minimum(d_lo, d_hi)
    rhs = x[:, None] * (f[None, :] - f[:, None]) - tol
    status = np.zeros(lhs_lo.shape, dtype=np.int8)
    status[lhs_lo < rhs] = INCONCLUSIVE
    status[lhs_hi < rhs] = VIOLATION
    return status


def _pair_status_loop(x, f, a, lo, hi, tol):
    n = x.shape[0]
    status = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for j in range(n):
            d_a = a[j] - a[i]
            d_lo = lo[j] - lo[i]
            d_hi = hi[j] - hi[i]
            rhs = x[i] * (f[j] - f[i]) - tol
            if d_a - min(d_lo, d_hi) < rhs:
                status[i, j] = VIOLATION
            elif d_a - max(d_lo, d_hi) < rhs:
                status[i, j] = INCONCLUSIVE
    return status


def sandwich_status_numpy(x, f, a, lo, hi, tol):
    d_a = a[None, :] - a[:, None]
    d_lo = lo[None, :] - lo[:, None]
    d_hi = hi[None, :] - hi[:, None]
    g_lo = d_a - np.maximum(d_lo, d_hi)
    g_hi = d_a - np.minimum(d_lo, d_hi)
    d_f = f[None, :] - f[:, None]
    below = x[:, None] * d_f - tol
    above = x[None, :] * d_f + tol
    status = np.zeros(g_lo.shape, dtype=np.int8)
    status[(g_lo < below) | (g_hi > above)] = INCONCLUSIVE
    status[(g_hi < below) | (g_lo > above)] = VIOLATION
    return status


def _sandwich_status_loop(x, f, a, lo, hi, tol):
    n = x.shape[0]
    status = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for j in range(n):
            d_a = a[j] - a[i]
            d_lo = lo[j] - lo[i]
            d_hi = hi[j] - hi[i]
            g_lo = d_a - max(d_lo, d_hi)
            g_hi = d_a - min(d_lo, d_hi)
            d_f = f[j] - f[i]
            below = x[i] * d_f - tol
            above = x[j] * d_f + tol
            if g_hi < below or g_lo > above:
                status[i, j] = VIOLATION
            elif g_lo < below or g_hi > above:
                status[i, j] = INCONCLUSIVE
    return status


if HAVE_NUMBA:
    cantor_lattice_numba = njit(cache=True)(_cantor_lattice_loop)
    pair_status_numba = njit(cache=True)(_pair_status_loop)
    sandwich_status_numba = njit(cache=True)(_sandwich_status_loop)
else:  # pragma: no cover
    cantor_lattice_numba = cantor_lattice_numpy
    pair_status_numba = pair_status_numpy
    sandwich_status_numba = sandwich_status_numpy


def _is_float_input(*arrays):
    return all(np.asarray(arr).dtype == np.float64 for arr in arrays)


def cantor_lattice(k, shift, depth):
    """Cantor function at ``k / 2**shift``, truncated after ``depth`` ternary digits.

    Returns ``(values, exact)``; where ``exact`` is false the true value lies in
    ``[value, value + 2**-depth]``.  Requires ``shift <= 61``.
    """
    if shift > 61:
        raise ValueError("lattice shift must be at most 61 to avoid int64 overflow")
    k = np.ascontiguousarray(k, dtype=np.int64)
    if USE_NUMBA:
        return cantor_lattice_numba(k, shift, depth)
    return cantor_lattice_numpy(k, shift, depth)


def pair_status(x, f, a, lo, hi, tol):
    """Status matrix ``s[i, j]`` for the pair (x = x[i], y = x[j])."""
    if USE_NUMBA and _is_float_input(x, f, a, lo, hi):
        return pair_status_numba(x, f, a, lo, hi, float(tol))
    return pair_status_numpy(x, f, a, lo, hi, tol)


def sandwich_status(x, f, a, lo, hi, tol):
    if USE_NUMBA and _is_float_input(x, f, a, lo, hi):
        return sandwich_status_numba(x, f, a, lo, hi, float(tol))
    return sandwich_status_numpy(x, f, a, lo, hi, tol)
