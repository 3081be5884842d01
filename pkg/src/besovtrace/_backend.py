"""Backend selection for the hot kernels.

Set ``BESOVTRACE_BACKEND=numpy`` to force the pure-numpy path.  The default
is ``numba`` when numba imports cleanly, else ``numpy``.
"""
import os

ENV_VAR = "BESOVTRACE_BACKEND"


def numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def requested_backend():
    name = os.environ.get(ENV_VAR, "").strip().lower()
    if name in ("", "auto"):
        return "numba" if numba_available() else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not numba_available():
        raise ImportError(f"{ENV_VAR}=numba but numba is not importable")
    return name
