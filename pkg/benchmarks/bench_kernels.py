"""Benchmark the compiled path kernels against the numpy fallback.

Runs each kernel on representative path-grid sizes and prints a timing
table plus the speedup.  Also times one realistic composite: the forward
time change of a sampled pair path.

Usage: python benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from lamperti_kit._kernels import _fallback

try:
    from lamperti_kit._kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    rows = []
    for m in (1_000, 10_000, 100_000):
        x = np.cumsum(rng.uniform(0.5e-4, 1.5e-4, m))
        w = np.exp(rng.normal(0.0, 0.5, m))
        big_f = _fallback.trapezoid_cumsum(x, w)
        q = np.sort(rng.uniform(0, big_f[-1], m))

        cases = [
            (f"trapezoid_cumsum[{m}]", lambda impl, x=x, w=w: impl.trapezoid_cumsum(x, w)),
            (f"interp_right[{m}]", lambda impl, q=q, F=big_f, x=x: impl.interp_right(q, F, x)),
            (f"first_nonpositive[{m}]", lambda impl, w=w: impl.first_nonpositive(w - 0.999 * w[-1])),
        ]
        for name, fn in cases:
            t_py = timeit(lambda: fn(_fallback), repeats)
            t_c = timeit(lambda: fn(_native), repeats) if _native else np.nan
            rows.append((name, t_py, t_c))
    return rows


def bench_composite(repeats):
    """Forward time change of one sampled path under each backend."""
    from lamperti_kit import LevyBlock, MapSpec, SimConfig, StateSet, forward_transform, sample_map_path

    states = StateSet([(1, 1), (-1, 1)])
    blocks = [
        LevyBlock(drift=[0.3, -0.1], covariance=0.05 * np.eye(2)),
        LevyBlock(drift=[0.1, -0.1], covariance=0.05 * np.eye(2)),
    ]
    spec = MapSpec(states, [[-1.0, 1.0], [1.0, -1.0]], blocks, alpha=[1.0, 1.0])
    path = sample_map_path(spec, SimConfig(horizon=5.0, dt=1e-4, seed=1))

    out = {}
    import lamperti_kit.lamperti as lam

    for impl, label in ((_fallback, "python"), (_native, "native")):
        if impl is None:
            continue
        lam.trapezoid_cumsum, lam.interp_right = impl.trapezoid_cumsum, impl.interp_right
        out[label] = timeit(lambda: forward_transform(path, spec.alpha), max(3, repeats // 20))
    lam.trapezoid_cumsum = (_native or _fallback).trapezoid_cumsum
    lam.interp_right = (_native or _fallback).interp_right
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    if _native is None:
        print("compiled kernels not available; timing the fallback only\n")
    print(f"{'kernel':32s} {'python':>12s} {'native':>12s} {'speedup':>9s}")
    for name, t_py, t_c in bench_kernels(args.repeats):
        speed = f"{t_py / t_c:8.1f}x" if np.isfinite(t_c) else "      --"
        t_c_str = f"{t_c * 1e6:10.1f}us" if np.isfinite(t_c) else "        --"
        print(f"{name:32s} {t_py * 1e6:10.1f}us {t_c_str} {speed}")

    comp = bench_composite(args.repeats)
    print(f"\n{'forward_transform (50k-knot path)':40s}", end="")
    for label, t in comp.items():
        print(f"  {label}: {t * 1e3:.2f}ms", end="")
    if len(comp) == 2:
        print(f"  speedup: {comp['python'] / comp['native']:.1f}x")
    else:
        print()


if __name__ == "__main__":
    main()
