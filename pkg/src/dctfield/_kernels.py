"""Hot numeric kernels: direct cosine-transform sums and valid-mode separable filtering.

Each kernel exists in two interchangeable implementations: a numba ``@njit``
version (explicit loops) and a pure-numpy version (vectorized evaluation of
the same sums). The active implementation is chosen at import time; set the
environment variable ``DCTFIELD_DISABLE_NUMBA=1`` to force the numpy path.
``benchmarks/bench_kernels.py`` times the two side by side.
"""

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_ENV_FLAG = "DCTFIELD_DISABLE_NUMBA"


def _numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


def dct2_direct_numpy(field: np.ndarray, bx: np.ndarray, by: np.ndarray) -> np.ndarray:
    """Forward 2D cosine transform as the defining double sum, vectorized.

    ``bx[u, ix]`` and ``by[v, iy]`` are the normalized cosine basis tables;
    the result is ``C[u, v] = sum_ix sum_iy field[ix, iy] * bx[u, ix] * by[v, iy]``.
    """
    return bx @ field @ by.T


def idct2_direct_numpy(coeffs: np.ndarray, bx: np.ndarray, by: np.ndarray) -> np.ndarray:
    """Inverse 2D cosine transform, vectorized form of the defining double sum."""
    return bx.T @ coeffs @ by


def filter_valid_numpy(img: np.ndarray, k1d: np.ndarray) -> np.ndarray:
    """Separable 2D correlation with a 1D kernel, valid region only."""
    n = k1d.size
    tmp = np.tensordot(sliding_window_view(img, n, axis=0), k1d, axes=([2], [0]))
    return np.tensordot(sliding_window_view(tmp, n, axis=1), k1d, axes=([2], [0]))


NUMBA_ENABLED = False

if not _numba_disabled():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        NUMBA_ENABLED = True

        @njit(cache=True)
        def dct2_direct_numba(field, bx, by):
            # the defining double sum, factored separably: contract the x axis
            # against bx, then the y axis against by
            nx, ny = field.shape
            tmp = np.zeros((nx, ny))
            for u in range(nx):
                for ix in range(nx):
                    b = bx[u, ix]
                    for iy in range(ny):
                        tmp[u, iy] += b * field[ix, iy]
            out = np.zeros((nx, ny))
            for u in range(nx):
                for v in range(ny):
                    acc = 0.0
                    for iy in range(ny):
                        acc += tmp[u, iy] * by[v, iy]
                    out[u, v] = acc
            return out

        @njit(cache=True)
        def idct2_direct_numba(coeffs, bx, by):
            nx, ny = coeffs.shape
            tmp = np.zeros((nx, ny))
            for ix in range(nx):
                for u in range(nx):
                    b = bx[u, ix]
                    for v in range(ny):
                        tmp[ix, v] += b * coeffs[u, v]
            out = np.zeros((nx, ny))
            for ix in range(nx):
                for iy in range(ny):
                    acc = 0.0
                    for v in range(ny):
                        acc += tmp[ix, v] * by[v, iy]
                    out[ix, iy] = acc
            return out

        @njit(cache=True)
        def filter_valid_numba(img, k1d):
            h, w = img.shape
            n = k1d.size
            oh = h - n + 1
            ow = w - n + 1
            tmp = np.empty((oh, w))
            for i in range(oh):
                for j in range(w):
                    acc = 0.0
                    for m in range(n):
                        acc += k1d[m] * img[i + m, j]
                    tmp[i, j] = acc
            out = np.empty((oh, ow))
            for i in range(oh):
                for j in range(ow):
                    acc = 0.0
                    for m in range(n):
                        acc += k1d[m] * tmp[i, j + m]
                    out[i, j] = acc
            return out


if NUMBA_ENABLED:
    dct2_direct = dct2_direct_numba
    idct2_direct = idct2_direct_numba
    filter_valid = filter_valid_numba
else:
    dct2_direct = dct2_direct_numpy
    idct2_direct = idct2_direct_numpy
    filter_valid = filter_valid_numpy
