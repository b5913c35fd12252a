"""Perron-Frobenius analysis of the characteristic exponent matrix.

The exponent matrix is Metzler for every valid argument, so after shifting
by (1 + max |diagonal|) it is nonnegative with positive diagonal, hence
primitive when the chain support graph is strongly connected; deterministic
power iteration (uniform start, left and right) then converges to the
leading eigenpair.  Growth rates are one-sided finite-difference derivatives
of the leading eigenvalue along a direction, taken on whichever side of 0
the mgf domains allow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionError, DomainError, ReducibleError
from .model import MapSpec, directional_exponent

__all__ = [
    "leading_eigenvalue",
    "stationary_distribution",
    "chi_derivative",
    "classify",
    "ClassificationReport",
    "LIFETIME_FINITE",
    "LIFETIME_INFINITE",
    "LIMIT_ZERO",
    "LIMIT_UNDETERMINED",
]

LIFETIME_FINITE = "FiniteAS"
LIFETIME_INFINITE = "InfiniteAS"
LIMIT_ZERO = "ZeroAS"
LIMIT_UNDETERMINED = "Undetermined"

# one-sided O(h^4) stencil on nodes 0, h, 2h, 3h, 4h
_STENCIL = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_METZLER_TOL = 1e-12


def _support_strongly_connected(m: np.ndarray) -> bool:
    """Strong connectivity of the off-diagonal support graph (two BFS passes)."""
    n = m.shape[0]
    if n == 1:
        return True
    adj = (np.abs(m) > 0.0) & ~np.eye(n, dtype=bool)

    def reaches_all(graph):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for j in np.nonzero(graph[i])[0]:
                    if not seen[j]:
                        seen[j] = True
                        nxt.append(int(j))
            frontier = nxt
        return bool(seen.all())

    return reaches_all(adj) and reaches_all(adj.T)


def leading_eigenvalue(m, tol: float = 1e-14, max_iter: int = 200_000):
    """Leading (real) eigenvalue of a Metzler matrix with its eigenvectors.

    Returns (chi, right, left) with right > 0 normalised to sum 1 and
    left . right = 1.  Raises ReducibleError when the support graph is not
    strongly connected and ValueError when the matrix is not Metzler.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.any(np.isnan(m)):
        raise ValueError("matrix contains NaN entries")
    n = m.shape[0]
    off = m[~np.eye(n, dtype=bool)]
    if off.size and off.min() < -_METZLER_TOL:
        raise ValueError(f"matrix is not Metzler (off-diagonal {off.min():.3g})")
    if not _support_strongly_connected(m):
        raise ReducibleError("support graph of the matrix is not strongly connected")

    if n == 1:
        return float(m[0, 0]), np.array([1.0]), np.array([1.0])

    shift = 1.0 + float(np.abs(np.diag(m)).max())
    b = m + shift * np.eye(n)
    x = np.full(n, 1.0 / n)
    y = np.full(n, 1.0 / n)
    lam = 0.0
    scale = max(1.0, float(np.abs(b).max()))
    for _ in range(max_iter):
        bx = b @ x
        by = b.T @ y
        lam = float(y @ bx) / float(y @ x)
        res = max(np.abs(bx - lam * x).max(), np.abs(by - lam * y).max())
        x = bx / bx.sum()
        y = by / by.sum()
        if res <= tol * scale:
            break
    else:
        raise ArithmeticError("power iteration did not converge")
    right = x / x.sum()
    left = y / float(y @ right)
    return lam - shift, right, left


def stationary_distribution(q) -> np.ndarray:
    """Invariant probability vector of an irreducible intensity matrix."""
    q = np.asarray(q, dtype=float)
    _, _, left = leading_eigenvalue(q)
    pi = left / left.sum()
    return pi


def _chi_at(spec: MapSpec, v: np.ndarray, u: float) -> float:
    mat = directional_exponent(spec, v, u)
    if not mat.all_valid:
        raise DomainError(f"exponent matrix invalid at u={u} along {v.tolist()}")
    chi, _, _ = leading_eigenvalue(mat.entries)
    return chi


def default_step(spec: MapSpec) -> float:
    """Finite-difference step scaled down by the largest drift magnitude."""
    bmax = max(float(np.abs(b.drift).max()) for b in spec.blocks)
    return 1e-3 / (1.0 + bmax)


def _one_sided(spec, v, h, sign):
    """Stencil derivative on one side; shrinks h when the domain is smaller.

    Returns (value, h_used, probes) or None when no usable h exists on this
    side.  Probes are the (u, chi) pairs actually evaluated.
    """
    for _ in range(60):
        try:
            probes = [(sign * k * h, _chi_at(spec, v, sign * k * h)) for k in range(5)]
        except DomainError:
            h *= 0.5
            continue
        chis = np.array([c for _, c in probes])
        return sign * float(_STENCIL @ chis) / h, h, probes
    return None


def chi_derivative(spec: MapSpec, v, h: float | None = None, _detail: bool = False):
    """One-sided derivative at 0 of the leading eigenvalue along direction v.

    With v a unit axis vector this is the almost-sure linear growth rate of
    that coordinate; with v = alpha it is the growth rate of <alpha, xi>.
    Both sides are averaged when the mgf domains allow both; DomainError when
    neither side admits any probe points (the per-axis validity condition
    fails).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if h is None:
        h = default_step(spec)
    if not _support_strongly_connected(spec.Q):
        raise ReducibleError("chain intensity matrix is not irreducible")
    right = _one_sided(spec, v, h, +1.0)
    left = _one_sided(spec, v, h, -1.0)
    if right is None and left is None:
        raise DomainError(f"no valid finite-difference probes along {v.tolist()}")
    if right is not None and left is not None:
        value, side = 0.5 * (right[0] + left[0]), "both"
        used = (right, left)
    elif right is not None:
        value, side = right[0], "right"
        used = (right,)
    else:
        value, side = left[0], "left"
        used = (left,)
    if _detail:
        return value, side, used
    return value


@dataclass
class ClassificationReport:
    """Spectral growth rates and the asymptotic verdicts they imply."""

    kappa_alpha: float | None
    chi_prime: list | None
    chi_prime_sides: list | None
    lifetime: str | None
    limit: str | None
    conditions: dict
    tol: float
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def conditions_ok(self) -> bool:
        return all(self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "kappa_alpha": self.kappa_alpha,
            "chi_prime": self.chi_prime,
            "chi_prime_sides": self.chi_prime_sides,
            "lifetime": self.lifetime,
            "limit": self.limit,
            "conditions": self.conditions,
            "tol": self.tol,
            "warnings": self.warnings,
            "diagnostics": self.diagnostics,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def classify(
    spec: MapSpec,
    alpha=None,
    tol: float = 1e-7,
    h: float | None = None,
    on_condition_failure: str = "raise",
) -> ClassificationReport:
    """Asymptotic classification of the transformed process.

    Verdicts: lifetime is FiniteAS exactly when the growth rate of
    <alpha, xi> is below -tol (at or above, the clock integral diverges and
    the lifetime is InfiniteAS); the path converges to the absorbing point
    (ZeroAS) when some axis rate is decisively nonzero, or when all axis
    rates vanish but the weighted rate does not; otherwise Undetermined.

    Preconditions: (a) no killing, (b) irreducible chain, (c) per-axis mgf
    validity.  On failure either raises ConditionError (default) or, with
    on_condition_failure="report", returns the report with the failed flags
    and no verdicts.
    """
    alpha = spec.alpha if alpha is None else np.atleast_1d(np.asarray(alpha, dtype=float))
    if h is None:
        h = default_step(spec)
    d = spec.dim

    cond_a = spec.is_conservative
    cond_b = _support_strongly_connected(spec.Q)

    chi_prime = [None] * d
    sides = [None] * d
    details = [None] * d
    cond_c = True
    if cond_b:
        for k in range(d):
            v = np.zeros(d)
            v[k] = 1.0
            try:
                chi_prime[k], sides[k], details[k] = chi_derivative(spec, v, h, _detail=True)
            except DomainError:
                cond_c = False
    conditions = {"a_no_killing": cond_a, "b_irreducible": cond_b, "c_mgf_domains": cond_c}

    if not (cond_a and cond_b and cond_c):
        failed = [name for name, ok in conditions.items() if not ok]
        if on_condition_failure == "raise":
            raise ConditionError(failed)
        return ClassificationReport(
            kappa_alpha=None,
            chi_prime=None,
            chi_prime_sides=None,
            lifetime=None,
            limit=None,
            conditions=conditions,
            tol=tol,
        )

    kappa, kappa_side, kappa_detail = chi_derivative(spec, alpha, h, _detail=True)

    lifetime = LIFETIME_FINITE if kappa < -tol else LIFETIME_INFINITE
    axes_decisive = [abs(c) > tol for c in chi_prime]
    if any(axes_decisive):
        limit = LIMIT_ZERO
    elif abs(kappa) > tol:
        limit = LIMIT_ZERO
    else:
        limit = LIMIT_UNDETERMINED

    warnings = []
    if abs(kappa) <= tol:
        warnings.append(f"near-critical: |kappa_alpha| = {abs(kappa):.3g} <= tol")
    for k, c in enumerate(chi_prime):
        if 0.0 < abs(c) <= tol:
            warnings.append(f"near-critical: |chi'_{k}(0)| = {abs(c):.3g} <= tol")

    probe_eigs = {}
    for u, _ in kappa_detail[0][2]:
        mat = directional_exponent(spec, alpha, u)
        if mat.all_valid:
            eig = np.linalg.eigvals(mat.entries)
            probe_eigs[f"{u:.6g}"] = [[float(z.real), float(z.imag)] for z in eig]
    diagnostics = {
        "h": h,
        "kappa_side": kappa_side,
        "alpha": alpha.tolist(),
        "stationary": stationary_distribution(spec.Q).tolist(),
        "weighted_exponent_eigenvalues": probe_eigs,
    }

    return ClassificationReport(
        kappa_alpha=float(kappa),
        chi_prime=[float(c) for c in chi_prime],
        chi_prime_sides=sides,
        lifetime=lifetime,
        limit=limit,
        conditions=conditions,
        tol=tol,
        warnings=warnings,
        diagnostics=diagnostics,
    )
