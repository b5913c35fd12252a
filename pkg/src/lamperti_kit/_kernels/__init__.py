"""Hot path kernels with backend selection at import time.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when the environment variable LAMPERTI_KIT_PURE_PYTHON is set to
a non-empty value.  `BACKEND` reports which one is active.
"""

import os

if os.environ.get("LAMPERTI_KIT_PURE_PYTHON"):
    from . import _fallback as _impl
else:
    try:
        from . import _native as _impl
    except ImportError:
        from . import _fallback as _impl

BACKEND = _impl.BACKEND
trapezoid_cumsum = _impl.trapezoid_cumsum
interp_right = _impl.interp_right
first_nonpositive = _impl.first_nonpositive

__all__ = ["BACKEND", "trapezoid_cumsum", "interp_right", "first_nonpositive"]
