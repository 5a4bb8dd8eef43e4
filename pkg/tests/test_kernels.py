"""The compiled kernels and the numpy fallback must agree bit for bit."""

import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from myerson import _kernels
from myerson.curves import Cantor

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
@given(hnp.arrays(np.int64, st.integers(1, 50), elements=st.integers(0, 2**41)))
def test_cantor_lattice_paths_agree(k):
    a_val, a_exact = _kernels.cantor_lattice_numpy(k, 40, 64)
    b_val, b_exact = _kernels.cantor_lattice_numba(k, 40, 64)
    assert np.array_equal(a_val, b_val) and np.array_equal(a_exact, b_exact)


@given(st.integers(0, 3**10))
def test_cantor_lattice_matches_scalar_evaluation(n):
    # k / 2^40 is the lattice point; compare against the Fraction evaluator
    k = np.array([n * 2**20], dtype=np.int64)
    vals, _ = _kernels.cantor_lattice(k, 40, 64)
    assert abs(vals[0] - Cantor()(Fraction(int(k[0]), 2**40))) <= 2.0**-52


def _tables(n, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 2, n))
    f = np.cumsum(rng.uniform(0, 1, n)) * (rng.uniform() < 0.8) + rng.uniform(0, 0.3, n)
    a = rng.normal(size=n)
    lo = np.cumsum(rng.uniform(0, 0.1, n))
    hi = lo + rng.uniform(0, 1e-3, n)
    return x, f, a, lo, hi


@needs_numba
@given(st.integers(1, 60), st.integers(0, 2**16), st.sampled_from([0.0, 1e-9, 1e-3]))
def test_pair_status_paths_agree(n, seed, tol):
    args = _tables(n, seed)
    assert np.array_equal(_kernels.pair_status_numpy(*args, tol), _kernels.pair_status_numba(*args, tol))


@needs_numba
@given(st.integers(1, 60), st.integers(0, 2**16), st.sampled_from([0.0, 1e-9, 1e-3]))
def test_sandwich_status_paths_agree(n, seed, tol):
    args = _tables(n, seed)
    assert np.array_equal(_kernels.sandwich_status_numpy(*args, tol), _kernels.sandwich_status_numba(*args, tol))


def test_object_arrays_use_numpy_path():
    x = np.array([Fraction(0), Fraction(1)], dtype=object)
    f = np.array([Fraction(0), Fraction(1)], dtype=object)
    z = np.array([Fraction(0), Fraction(0)], dtype=object)
    a = np.array([Fraction(0), Fraction(1, 2)], dtype=object)
    s = _kernels.pair_status(x, f, a, z, z, Fraction(0))
    # g(1) - g(0) = 1/2 >= 0 * 1 and g(0) - g(1) = -1/2 >= 1 * (0 - 1)
    assert (s == _kernels.PASS).all()


def test_diagonal_is_never_a_violation():
    x, f, a, lo, hi = _tables(30, 7)
    s = _kernels.pair_status(x, f, a, lo, hi, 0.0)
    assert (np.diag(s) == _kernels.PASS).all()


def test_env_flag_disables_numba():
    code = "from myerson import _kernels; print(_kernels.USE_NUMBA)"
    env = dict(os.environ, MYERSON_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
