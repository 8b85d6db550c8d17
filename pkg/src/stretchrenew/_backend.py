"""Kernel backend selection.

The compiled (numba) kernels are used when numba is importable, unless the
environment variable ``STRETCHRENEW_NO_NUMBA`` is set (to anything nonempty),
which forces the pure-numpy path.  Both backends satisfy the same contract
and agree to a few ulps for identical buffers.
"""

from __future__ import annotations

import os

from . import _kernels_np

__all__ = ["get_kernels", "backend_name"]

_FORCE_NUMPY = bool(os.environ.get("STRETCHRENEW_NO_NUMBA"))

if _FORCE_NUMPY:
    _impl = _kernels_np
    _name = "numpy"
else:
    try:
        from . import _kernels_nb as _impl

        _name = "numba"
    except ImportError:
        _impl = _kernels_np
        _name = "numpy"


def get_kernels():
    return _impl


def backend_name() -> str:
    return _name
