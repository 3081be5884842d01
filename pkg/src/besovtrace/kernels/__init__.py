"""Hot numeric kernels, dispatched to numba or numpy.

The backend is fixed at import time from ``BESOVTRACE_BACKEND``; both
implementations stay importable as ``kernels._numpy`` / ``kernels._numba``
so tests and the benchmark can compare them side by side.
"""
import numpy as np

from besovtrace._backend import requested_backend

BACKEND = requested_backend()

if BACKEND == "numba":
    from besovtrace.kernels import _numba as _impl
else:
    from besovtrace.kernels import _numpy as _impl


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def ball_sums(D, nu, f, p, radii):
    radii = _f64(radii)
    if np.any(np.diff(radii) < 0):
        raise ValueError("radii must be ascending")
    return _impl.ball_sums(_f64(D), _f64(nu), _f64(f), float(p), radii)


def double_integral_rows(D, nu, f, p, ap):
    return _impl.double_integral_rows(_f64(D), _f64(nu), _f64(f), float(p), float(ap))


def local_lip(indptr, indices, dist, u):
    return _impl.local_lip(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        _f64(dist),
        _f64(u),
    )
