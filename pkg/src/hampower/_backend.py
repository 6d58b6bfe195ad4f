"""Pick the search kernel at import: compiled if available, else pure Python.

Set ``HAMPOWER_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernel_py

try:
    if os.environ.get("HAMPOWER_PURE_PYTHON"):
        raise ImportError("pure-Python kernel forced")
    from . import _kernel as compiled
except ImportError:
    compiled = None

BACKEND = "cython" if compiled is not None else "python"
COMPILED_MAX_N = 64


def kernel_for(n: int):
    """Kernel module for an ``n``-vertex search (the compiled one caps n at 64)."""
    if compiled is not None and n <= COMPILED_MAX_N:
        return compiled
    return _kernel_py
