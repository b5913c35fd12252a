"""Statistical and pathwise verification harness.

Distributional identities are checked through two-sample tests on values at
fixed times (per-coordinate Kolmogorov-Smirnov with Bonferroni correction,
plus a chi-squared comparison of orthant occupancy); pathwise identities are
checked at tight numeric tolerances.  Paths that end before the queried time
are dropped and the drop fraction is reported; a report fails automatically
when drops exceed 5%.

Every report is a deterministic function of (spec, parameters, seed):
replication r of a named experiment draws from the stream
(derive_seed(seed, experiment tag), r), so thread count and scheduling
cannot change any number in the report.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp_special

from ._kernels import trapezoid_cumsum
from .errors import ConfigError, PartitionError
from .lamperti import (
    Partition,
    agglomerate_map_path,
    agglomerate_spec,
    forward_transform,
    forward_value_at,
    phi_inverse,
    project_path,
)
from .model import MapSpec
from .rng import derive_seed, make_rng
from .sampler import SimConfig, _endpoint_sample, sample_map_path
from .spectral import LIFETIME_FINITE, classify

__all__ = [
    "TestReport",
    "ks_two_sample",
    "verify_scaling",
    "verify_agglomeration",
    "verify_lln",
    "verify_lifetime",
    "e0_statistic",
]

MAX_DROP_FRACTION = 0.05


@dataclass
class TestReport:
    """Outcome of one verification experiment."""

    name: str
    passed: bool
    statistics: dict = field(default_factory=dict)
    p_values: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    sample_sizes: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    drop_fraction: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _native(
            {
                "name": self.name,
                "passed": self.passed,
                "statistics": self.statistics,
                "p_values": self.p_values,
                "thresholds": self.thresholds,
                "sample_sizes": self.sample_sizes,
                "seeds": self.seeds,
                "drop_fraction": self.drop_fraction,
                "details": self.details,
            }
        )

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _native(obj):
    if isinstance(obj, dict):
        return {str(k): _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _write_per_path_csv(target, header, rows) -> str:
    """Per-path summary statistics for external plotting."""
    with open(target, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return str(target)


def _replication_map(fn, n: int, threads: int = 1) -> list:
    """fn(replication) for r in 0..n-1, in replication order regardless of scheduling."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, range(n)))
    return [fn(r) for r in range(n)]


def _kolmogorov_sf(lam: float) -> float:
    """Asymptotic survival function of the Kolmogorov statistic."""
    if lam < 1e-3:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-14:
            break
    return float(min(max(total, 0.0), 1.0))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    Uses the small-sample-corrected effective size (Stephens), adequate for
    the sample sizes the harness works with (both inputs must have >= 20
    points).
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n1, n2 = a.shape[0], b.shape[0]
    if n1 < 20 or n2 < 20:
        raise ValueError(f"need at least 20 points per sample, got {n1} and {n2}")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / n1
    cdf_b = np.searchsorted(b, grid, side="right") / n2
    d = float(np.abs(cdf_a - cdf_b).max())
    ne = n1 * n2 / (n1 + n2)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    return d, _kolmogorov_sf(lam)


def _chi_square_homogeneity(counts_a: np.ndarray, counts_b: np.ndarray) -> tuple[float, float]:
    """Chi-squared test that two count vectors come from one distribution."""
    table = np.vstack([counts_a, counts_b]).astype(float)
    keep = table.sum(axis=0) > 0
    table = table[:, keep]
    if table.shape[1] < 2:
        return 0.0, 1.0
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row @ col / table.sum()
    stat = float(((table - expected) ** 2 / expected).sum())
    dof = table.shape[1] - 1
    return stat, float(sp_special.chdtrc(dof, stat))


def _quantize(x: np.ndarray, digits: int = 12) -> np.ndarray:
    """Round to `digits` significant digits.

    Applied to both arms of a two-sample comparison so that atoms of a
    discrete marginal, evaluated through different float paths (one arm
    bakes the scaling into the start point, the other multiplies
    afterwards), coincide exactly instead of splitting the KS statistic by
    an ulp-level artefact.  Genuine discrepancies are orders of magnitude
    above the rounding scale.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0.0
    mag = np.floor(np.log10(np.abs(x[nz])))
    scale = 10.0 ** (digits - 1 - mag)
    out[nz] = np.round(x[nz] * scale) / scale
    return out


def e0_statistic(values: np.ndarray) -> np.ndarray:
    """Per-row compactified-convergence statistic min_i min(|x_i|, 1/|x_i|).

    Tends to 0 exactly when the point escapes to the absorbing end of the
    one-point compactification (some coordinate to 0 or to infinity).
    """
    a = np.abs(np.asarray(values, dtype=float))
    with np.errstate(divide="ignore"):
        return np.min(np.minimum(a, 1.0 / a), axis=-1)


def _start_of(spec: MapSpec, point: np.ndarray):
    signs, z = phi_inverse(point)
    try:
        return spec.states.index(signs), z
    except KeyError:
        raise ConfigError(f"start point {point.tolist()} lies outside the spec's orthants")


def _sample_values_at(spec, start_point, query, n_paths, seed, horizon, dt, threads):
    """Transformed-path values/orthants at one query time over n_paths paths."""
    state0, z0 = _start_of(spec, start_point)

    def one(r):
        path = sample_map_path(spec, SimConfig(horizon, dt, seed, r), state0, z0)
        vals, labels, ok = forward_value_at(path, spec.alpha, [query])
        return vals[0], int(labels[0]), bool(ok[0])

    rows = _replication_map(one, n_paths, threads)
    values = np.array([r[0] for r in rows])
    labels = np.array([r[1] for r in rows])
    ok = np.array([r[2] for r in rows])
    return values, labels, ok


def verify_scaling(
    spec: MapSpec,
    x,
    c,
    t: float,
    n_paths: int,
    seed: int,
    *,
    horizon: float = 12.0,
    dt: float = 0.005,
    level: float = 0.01,
    clock_scale: float = 1.0,
    independent_arms: bool = True,
    threads: int = 1,
    per_path_out=None,
) -> TestReport:
    """Two-arm check of the multi-scaling identity at one time point.

    Arm A starts at c*x and reads the path at time (prod c_i^alpha_i) * t;
    arm B starts at x and scales its value at time t by c.  Per-coordinate
    KS tests (Bonferroni across coordinates) plus a chi-squared comparison
    of orthant occupancy.

    `clock_scale` multiplies arm A's query time; values other than 1 are a
    deliberate corruption used to confirm the harness rejects a broken time
    change.  `independent_arms=False` reuses arm A's streams for arm B,
    which couples the arms exactly when c is the unit vector.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(c <= 0):
        raise ConfigError("scaling factors must be positive")
    c_alpha = float(np.prod(c ** spec.alpha))

    seed_a = derive_seed(seed, "scaling-arm-a")
    seed_b = seed_a if not independent_arms else derive_seed(seed, "scaling-arm-b")

    vals_a, lab_a, ok_a = _sample_values_at(
        spec, c * x, clock_scale * c_alpha * t, n_paths, seed_a, horizon, dt, threads
    )
    vals_b, lab_b, ok_b = _sample_values_at(spec, x, t, n_paths, seed_b, horizon, dt, threads)
    vals_b = vals_b * c

    drop = float(max(1.0 - ok_a.mean(), 1.0 - ok_b.mean()))
    d = spec.dim
    p_values, statistics = {}, {}
    for k in range(d):
        stat, p = ks_two_sample(_quantize(vals_a[ok_a][:, k]), _quantize(vals_b[ok_b][:, k]))
        statistics[f"ks_coord_{k}"] = stat
        p_values[f"ks_coord_{k}"] = p
    counts_a = np.bincount(lab_a[ok_a], minlength=spec.n)
    counts_b = np.bincount(lab_b[ok_b], minlength=spec.n)
    chi_stat, chi_p = _chi_square_homogeneity(counts_a, counts_b)
    statistics["orthant_chi2"] = chi_stat
    p_values["orthant_chi2"] = chi_p

    ks_level = level / d
    passed = (
        all(p_values[f"ks_coord_{k}"] >= ks_level for k in range(d))
        and chi_p >= level
        and drop <= MAX_DROP_FRACTION
    )
    details_extra = {}
    if per_path_out is not None:
        rows = []
        for arm, vals, labs, oks in (("a", vals_a, lab_a, ok_a), ("b", vals_b, lab_b, ok_b)):
            for r in range(n_paths):
                rows.append([r, arm, int(oks[r]), int(labs[r])] + [f"{v:.17g}" for v in vals[r]])
        header = ["replication", "arm", "kept", "orthant_index"] + [f"X{k + 1}" for k in range(d)]
        details_extra["per_path_csv"] = _write_per_path_csv(per_path_out, header, rows)
    return TestReport(
        name="scaling",
        passed=bool(passed),
        statistics=statistics,
        p_values=p_values,
        thresholds={"ks_level": ks_level, "chi2_level": level, "max_drop": MAX_DROP_FRACTION},
        sample_sizes={"paths_per_arm": n_paths, "kept_a": int(ok_a.sum()), "kept_b": int(ok_b.sum())},
        seeds={"seed": seed, "arm_a": seed_a, "arm_b": seed_b},
        drop_fraction=drop,
        details={
            "x": x.tolist(),
            "c": c.tolist(),
            "t": t,
            "c_alpha": c_alpha,
            "clock_scale": clock_scale,
            "orthant_counts_a": counts_a.tolist(),
            "orthant_counts_b": counts_b.tolist(),
            **details_extra,
        },
    )


def verify_agglomeration(
    spec: MapSpec,
    partition: Partition,
    horizon: float,
    dt: float,
    n_paths: int,
    seed: int,
    *,
    t_marginal: float = 0.5,
    level: float = 0.01,
    pathwise_tol: float = 1e-9,
    threads: int = 1,
    per_path_out=None,
) -> TestReport:
    """Commutation of coordinate products with the time-change pipeline.

    Pathwise: projecting the transformed path equals transforming the
    block-summed pair, per grid point, because both clocks integrate the same
    weighted coordinate sum.  Distributionally: KS comparison of the
    projected marginals against the agglomerated spec run with independent
    streams.  An inadmissible partition is surfaced in the report.
    """
    try:
        alpha_new = partition.check_alpha(spec.alpha)
        spec_agg = agglomerate_spec(spec, partition)
    except PartitionError as exc:
        return TestReport(
            name="agglomeration",
            passed=False,
            details={"error": f"PartitionError: {exc}"},
            seeds={"seed": seed},
        )

    seed_path = derive_seed(seed, "agglomeration-pathwise")

    def one(r):
        path = sample_map_path(spec, SimConfig(horizon, dt, seed_path, r))
        projected = project_path(forward_transform(path, spec.alpha), partition)
        direct = forward_transform(agglomerate_map_path(path, partition), alpha_new)
        live = projected.alive()
        dev = np.abs(projected.values[live] - direct.value_at(projected.times[live])).max()
        return float(dev)

    devs = _replication_map(one, n_paths, threads)
    max_dev = float(np.max(devs))

    seed_m1 = derive_seed(seed, "agglomeration-marginal-full")
    seed_m2 = derive_seed(seed, "agglomeration-marginal-agg")
    x0 = np.ones(spec.dim)
    vals1, _, ok1 = _sample_values_at(spec, x0, t_marginal, n_paths, seed_m1, horizon, dt, threads)
    proj1 = np.stack([vals1[:, list(b)].prod(axis=1) for b in partition.blocks], axis=1)
    x0_agg = np.array([np.prod(x0[list(b)]) for b in partition.blocks])
    vals2, _, ok2 = _sample_values_at(spec_agg, x0_agg, t_marginal, n_paths, seed_m2, horizon, dt, threads)

    drop = float(max(1.0 - ok1.mean(), 1.0 - ok2.mean()))
    dp = partition.d_prime
    p_values, statistics = {}, {}
    for k in range(dp):
        stat, p = ks_two_sample(_quantize(proj1[ok1][:, k]), _quantize(vals2[ok2][:, k]))
        statistics[f"ks_coord_{k}"] = stat
        p_values[f"ks_coord_{k}"] = p
    ks_level = level / dp
    passed = (
        max_dev <= pathwise_tol
        and all(p >= ks_level for p in p_values.values())
        and drop <= MAX_DROP_FRACTION
    )
    statistics["pathwise_max_deviation"] = max_dev
    details_extra = {}
    if per_path_out is not None:
        rows = [[r, f"{dev:.17g}"] for r, dev in enumerate(devs)]
        details_extra["per_path_csv"] = _write_per_path_csv(
            per_path_out, ["replication", "pathwise_max_deviation"], rows
        )
    return TestReport(
        name="agglomeration",
        passed=bool(passed),
        statistics=statistics,
        p_values=p_values,
        thresholds={"pathwise_tol": pathwise_tol, "ks_level": ks_level, "max_drop": MAX_DROP_FRACTION},
        sample_sizes={"paths": n_paths},
        seeds={"seed": seed, "pathwise": seed_path, "marginal_full": seed_m1, "marginal_agg": seed_m2},
        drop_fraction=drop,
        details={"blocks": [list(b) for b in partition.blocks], "t_marginal": t_marginal,
                 **details_extra},
    )


def verify_lln(
    spec: MapSpec,
    alpha,
    horizon: float,
    n_paths: int,
    seed: int,
    *,
    threads: int = 1,
    per_path_out=None,
) -> TestReport:
    """Long-run growth rate of the weighted coordinate sum against the
    spectral prediction: the path average over [0, T] must sit within four
    standard errors of the derivative-based rate."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    report = classify(spec, alpha)
    kappa = report.kappa_alpha

    seed_lln = derive_seed(seed, "lln")

    def one(r):
        rng = make_rng(seed_lln, r)
        _, xi, _ = _endpoint_sample(spec, horizon, rng)
        return float(alpha @ xi) / horizon

    values = np.array(_replication_map(one, n_paths, threads))
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
    # guard for degenerate (deterministic) specs where the SE collapses to 0
    tol = max(4.0 * se, 1e-9 * (1.0 + abs(kappa)))
    passed = abs(mean - kappa) <= tol
    details_extra = {}
    if per_path_out is not None:
        rows = [[r, f"{v:.17g}"] for r, v in enumerate(values)]
        details_extra["per_path_csv"] = _write_per_path_csv(
            per_path_out, ["replication", "mean_rate"], rows
        )
    return TestReport(
        name="lln",
        passed=bool(passed),
        statistics={"mean_rate": mean, "stderr": se, "kappa_alpha": kappa},
        thresholds={"tolerance": tol},
        sample_sizes={"paths": n_paths},
        seeds={"seed": seed, "stream": seed_lln},
        details={"horizon": horizon, "classify": report.to_dict(), **details_extra},
    )


def verify_lifetime(
    spec: MapSpec,
    alpha,
    horizons,
    n_paths: int,
    seed: int,
    *,
    dt: float = 0.02,
    threads: int = 1,
    per_path_out=None,
) -> TestReport:
    """Growth of the clock integral across doubling horizons against the
    lifetime verdict.

    A finite-lifetime prediction requires the median relative increment of
    the accumulated clock to fall below 5% at the largest horizon pair; an
    infinite-lifetime prediction requires the median growth ratio to exceed
    1.5 there.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    horizons = sorted(float(h) for h in horizons)
    if len(horizons) < 2:
        raise ConfigError("need at least two horizons")
    report = classify(spec, alpha)

    seed_lt = derive_seed(seed, "lifetime")

    def one(r):
        path = sample_map_path(spec, SimConfig(horizons[-1], dt, seed_lt, r))
        s, xi, _ = path.grid()
        big_f = trapezoid_cumsum(s, np.exp(xi @ alpha))
        return np.interp(horizons, s, big_f)

    zhat = np.array(_replication_map(one, n_paths, threads))
    ratios = zhat[:, 1:] / zhat[:, :-1]
    medians = np.median(ratios, axis=0)
    last = float(medians[-1])

    details_extra = {}
    if per_path_out is not None:
        header = ["replication"] + [f"clock_at_{h:g}" for h in horizons]
        rows = [[r] + [f"{v:.17g}" for v in zhat[r]] for r in range(n_paths)]
        details_extra["per_path_csv"] = _write_per_path_csv(per_path_out, header, rows)

    finite_ok = last - 1.0 <= 0.05
    infinite_ok = last >= 1.5
    if report.lifetime == LIFETIME_FINITE:
        passed, criterion = finite_ok, "median ratio - 1 <= 0.05"
    else:
        passed, criterion = infinite_ok, "median ratio >= 1.5"
    return TestReport(
        name="lifetime",
        passed=bool(passed),
        statistics={
            "median_ratios": medians.tolist(),
            "last_median_ratio": last,
            "kappa_alpha": report.kappa_alpha,
        },
        thresholds={"finite_max_increment": 0.05, "infinite_min_ratio": 1.5},
        sample_sizes={"paths": n_paths},
        seeds={"seed": seed, "stream": seed_lt},
        details={"horizons": horizons, "dt": dt, "verdict": report.lifetime,
                 "criterion": criterion, **details_extra},
    )
