"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--points 401] [--lattice 1000000] [--repeats 5]

Each kernel is timed through both implementations on identical inputs, after
one warm-up call that absorbs JIT compilation, and the outputs are compared.
The last section times a full Cantor IC check in whichever mode the
``MYERSON_DISABLE_NUMBA`` flag selects; run the script twice to compare.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from myerson import _kernels
from myerson.curves import Cantor
from myerson.grid import GridSpec
from myerson.ic_check import check_ic_pairs
from myerson.payment import MyersonPayment


def best_time(fn, repeats):
    fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def pair_inputs(n, seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 2.0, n)
    f = np.sort(rng.random(n))
    a = x * f
    lo = np.cumsum(f) * (x[1] - x[0])
    hi = lo + 1e-12
    return x, f, a, lo, hi


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=401, help="grid size for the pair kernels")
    parser.add_argument("--lattice", type=int, default=1_000_000, help="lattice points for the Cantor kernel")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy timings are meaningful")

    k = np.arange(args.lattice, dtype=np.int64) * ((1 << 40) // args.lattice)
    arrays = pair_inputs(args.points, args.seed)
    cases = [
        ("cantor_lattice", _kernels.cantor_lattice_numba, _kernels.cantor_lattice_numpy, (k, 40, 64)),
        ("pair_status", _kernels.pair_status_numba, _kernels.pair_status_numpy, (*arrays, 1e-9)),
        ("sandwich_status", _kernels.sandwich_status_numba, _kernels.sandwich_status_numpy, (*arrays, 1e-9)),
    ]

    print(f"{'kernel':<16} {'size':>10} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}  agree")
    for name, fast, slow, inputs in cases:
        t_fast = best_time(lambda: fast(*inputs), args.repeats)
        t_slow = best_time(lambda: slow(*inputs), args.repeats)
        out_fast, out_slow = fast(*inputs), slow(*inputs)
        if isinstance(out_fast, tuple):
            agree = all(np.array_equal(p, q) for p, q in zip(out_fast, out_slow))
        else:
            agree = np.array_equal(out_fast, out_slow)
        size = len(inputs[0]) if name == "cantor_lattice" else len(inputs[0]) ** 2
        print(f"{name:<16} {size:>10} {t_fast * 1e3:>10.2f} {t_slow * 1e3:>10.2f} "
              f"{t_slow / t_fast:>7.1f}x  {'yes' if agree else 'NO'}")

    mode = "numba" if _kernels.USE_NUMBA else "numpy"
    grid = GridSpec.parse("0:2:1/100")
    f = Cantor()
    t0 = time.perf_counter()
    report = check_ic_pairs(f, MyersonPayment(f), grid)
    elapsed = time.perf_counter() - t0
    print(f"\nCantor IC check on 0:2:1/100 ({mode} mode): {elapsed:.2f} s, "
          f"{report.pairs_checked} pairs, passed={report.passed}")


if __name__ == "__main__":
    main()
