"""Backend selection for the dense kernels.

The compiled module is used when it was built; otherwise the numpy-sliced
fallback takes over.  Setting FROBSPLIT_PURE_PYTHON=1 forces the fallback.
"""
import os

from frobsplit import _kernels_py

try:
    if os.environ.get("FROBSPLIT_PURE_PYTHON"):
        raise ImportError("fallback forced by environment")
    from frobsplit import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

mul_trunc = _impl.mul_trunc
top_pairing = _impl.top_pairing


def backends():
    """Available backends as {name: module}; used by the benchmark and tests."""
    found = {"python": _kernels_py}
    if _compiled is not None:
        found["cython"] = _compiled
    return found
