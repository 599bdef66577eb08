"""Numba switch.

Kernels are compiled with numba when it is importable and the environment
variable ``LOOPY_SPECTRA_DISABLE_JIT`` is unset (or ``0``). Otherwise the
vectorized numpy implementations in :mod:`loopy_spectra.kernels` are used.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


JIT_DISABLED = _flag("LOOPY_SPECTRA_DISABLE_JIT")
USE_NUMBA = HAVE_NUMBA and not JIT_DISABLED


def njit(func):
    """``numba.njit`` with the package's options, or the plain function."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True, error_model="numpy")(func)


def max_workers():
    """Worker cap from ``LOOPY_SPECTRA_THREADS`` (default: all cores)."""
    raw = os.environ.get("LOOPY_SPECTRA_THREADS", "").strip()
    cores = os.cpu_count() or 1
    if not raw:
        return cores
    try:
        value = int(raw)
    except ValueError:
        return cores
    return max(1, min(value, cores))


def default_backend():
    return "numba" if USE_NUMBA else "numpy"
