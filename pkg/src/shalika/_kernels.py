"""Exact finite Fourier kernels on integer group-ring arrays.

An array of shape (pre, L, post, R) holds, at each sample, the coefficients
of sum_r c_r zeta_R^r.  ``axis_dft`` replaces the middle axis by its
transform: out[a, X, b, r + s X Y] += in[a, Y, b, r] (indices mod R).
SHALIKA_KERNEL selects ``numba`` (default when importable) or ``numpy``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _axis_dft_numpy(arr: np.ndarray, s: int) -> np.ndarray:
    pre, L, post, R = arr.shape
    out = np.zeros_like(arr)
    for X in range(L):
        acc = out[:, X]
        for Y in range(L):
            sh = (s * X * Y) % R
            if sh:
                acc += np.roll(arr[:, Y], sh, axis=-1)
            else:
                acc += arr[:, Y]
    return out


if numba is not None:

    @numba.njit(cache=True)
    def _axis_dft_numba_impl(arr, s):
        pre, L, post, R = arr.shape
        out = np.zeros_like(arr)
        for a in range(pre):
            for X in range(L):
                for Y in range(L):
                    sh = (s * X * Y) % R
                    for b in range(post):
                        for r in range(R):
                            v = arr[a, Y, b, r]
                            if v != 0:
                                out[a, X, b, (r + sh) % R] += v
        return out

    def _axis_dft_numba(arr: np.ndarray, s: int) -> np.ndarray:
        return _axis_dft_numba_impl(np.ascontiguousarray(arr), s)
else:  # pragma: no cover
    _axis_dft_numba = None


def kernel_name() -> str:
    name = os.environ.get("SHALIKA_KERNEL", "numba" if numba is not None else "numpy")
    if name not in ("numba", "numpy"):
        raise ValueError(f"SHALIKA_KERNEL must be numba or numpy, got {name!r}")
    if name == "numba" and numba is None:
        return "numpy"
    return name


def axis_dft(arr: np.ndarray, s: int, kernel: str | None = None) -> np.ndarray:
    kernel = kernel or kernel_name()
    if kernel == "numba":
        return _axis_dft_numba(arr, s)
    return _axis_dft_numpy(arr, s)


def full_dft(arr: np.ndarray, ndim: int, L: int, s: int, kernel: str | None = None) -> np.ndarray:
    """Transform every one of the first ``ndim`` axes (each of length L) of an
    array shaped (L,)*ndim + (R,)."""
    R = arr.shape[-1]
    out = arr
    for k in range(ndim):
        pre = L ** k
        post = L ** (ndim - k - 1)
        out = axis_dft(out.reshape(pre, L, post, R), s, kernel).reshape(arr.shape)
    return out
