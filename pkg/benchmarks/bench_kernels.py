#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Run directly: ``python benchmarks/bench_kernels.py``. The same comparison is
what the DCTFIELD_DISABLE_NUMBA environment flag switches between at import
time.
"""

import time

import numpy as np

from dctfield import _kernels
from dctfield.dct import _cosine_basis
from dctfield.metrics import _gaussian_kernel_1d


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    rows = []

    n = 100
    field = rng.normal(size=(n, n))
    basis = np.asarray(_cosine_basis(n))
    coeffs = _kernels.dct2_direct_numpy(field, basis, basis)

    img = rng.normal(size=(100, 100))
    k1d = _gaussian_kernel_1d(11, 1.5)

    cases = [
        ("dct2_direct 100x100", (field, basis, basis),
         getattr(_kernels, "dct2_direct_numba", None), _kernels.dct2_direct_numpy),
        ("idct2_direct 100x100", (coeffs, basis, basis),
         getattr(_kernels, "idct2_direct_numba", None), _kernels.idct2_direct_numpy),
        ("filter_valid 100x100 w11", (img, k1d),
         getattr(_kernels, "filter_valid_numba", None), _kernels.filter_valid_numpy),
    ]

    for name, args, jitted, plain in cases:
        t_np = timeit(plain, *args)
        if jitted is not None:
            jitted(*args)  # compile outside the timed region
            t_nb = timeit(jitted, *args)
            err = float(np.max(np.abs(jitted(*args) - plain(*args))))
            rows.append((name, t_nb, t_np, t_np / t_nb, err))
        else:
            rows.append((name, float("nan"), t_np, float("nan"), 0.0))

    print(f"numba available: {_kernels.NUMBA_ENABLED}")
    print(f"{'kernel':<28} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, t_nb, t_np, speed, err in rows:
        print(f"{name:<28} {1e3 * t_nb:>11.3f} {1e3 * t_np:>11.3f} {speed:>8.2f} {err:>11.2e}")


if __name__ == "__main__":
    main()
