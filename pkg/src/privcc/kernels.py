"""Kernel selection: the compiled extension when available, numpy otherwise.

Set PRIVCC_PURE_PYTHON=1 to force the numpy versions.
"""

import os

from . import _kernels_py

if os.environ.get("PRIVCC_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

minplus_square = _impl.minplus_square
basic_line_batch = _impl.basic_line_batch

__all__ = ["BACKEND", "minplus_square", "basic_line_batch"]
