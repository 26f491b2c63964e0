"""Hot loops over composition tables.

The compiled extension is used when it was built; setting the environment
variable ``GROUPOIDKK_PURE=1`` forces the numpy fallback.
"""

import os

from . import _fallback

if os.environ.get("GROUPOIDKK_PURE"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

associativity_violations = _impl.associativity_violations
convolve = _impl.convolve
regular_matrix = _impl.regular_matrix

__all__ = ["BACKEND", "associativity_violations", "convolve", "regular_matrix", "_fallback"]
