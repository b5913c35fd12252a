"""Pure-numpy implementations of the hot path kernels.

Used when the compiled extension is unavailable or when
LAMPERTI_KIT_PURE_PYTHON is set.  Semantics match `_native` exactly; see
tests/test_kernels.py for the cross-backend agreement checks.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def trapezoid_cumsum(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral of samples w over abscissae x; out[0] = 0.

    Zero-width intervals (duplicated abscissae carrying one-sided values at a
    discontinuity) contribute nothing, which is the intended reading of the
    integral of a piecewise function.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.empty_like(x)
    out[0] = 0.0
    if x.shape[0] > 1:
        np.cumsum(0.5 * (w[1:] + w[:-1]) * (x[1:] - x[:-1]), out=out[1:])
    return out


def interp_right(q: np.ndarray, xp: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation, right-continuous at duplicated knots.

    At a query equal to a duplicated abscissa the later knot wins, so values
    that jump (stored as left/right pairs at one abscissa) evaluate to their
    right limit.  Queries beyond the ends clamp to the end values.
    """
    q = np.asarray(q, dtype=float)
    xp = np.asarray(xp, dtype=float)
    fp = np.asarray(fp, dtype=float)
    j = np.searchsorted(xp, q, side="right") - 1
    j = np.clip(j, 0, xp.shape[0] - 2)
    x0 = xp[j]
    dx = xp[j + 1] - x0
    theta = np.where(dx > 0.0, (q - x0) / np.where(dx > 0.0, dx, 1.0), 1.0)
    theta = np.clip(theta, 0.0, 1.0)
    return fp[j] * (1.0 - theta) + fp[j + 1] * theta


def first_nonpositive(w: np.ndarray) -> int:
    """Index of the first entry <= 0, or -1 when all entries are positive."""
    idx = np.nonzero(np.asarray(w) <= 0.0)[0]
    return int(idx[0]) if idx.size else -1
