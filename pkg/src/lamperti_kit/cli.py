"""Command-line entry point.

Config files hold process descriptions; flags hold run parameters.  Every
run writes its outputs next to a manifest that records the resolved
parameters, the seed, the tool version and the files written, which is
enough to reproduce the run exactly.

Exit codes: 0 success, 1 validation/configuration error, 2 verification
failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, LampertiKitError, ParseError
from .lamperti import Partition, forward_transform, inverse_transform
from .pathio import read_map_path, read_mssmp_path, write_map_path, write_mssmp_path
from .reference import SpiderConfig, example_chain_scaling, example_drift_scaling, example_jumping_spider
from .sampler import SimConfig, sample_map_path
from .serialize import save_spec, spec_from_dict, spec_to_dict
from .spectral import classify
from .verify import verify_agglomeration, verify_lifetime, verify_lln, verify_scaling
from .model import validate_spec

__all__ = ["main", "dispatch", "load_config", "RunManifest"]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_TEST_FAILED = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    # accept comma-joined tuples with a leading minus as values rather than
    # flags, so start points in negative orthants parse (--x -1,2)
    _tuple_matcher = re.compile(r"^-\d+(\.\d*)?([,eE][-+\d.,]*)?$")

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = self._tuple_matcher

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunManifest:
    """Reproducibility record written atomically alongside every run's outputs."""

    command: str
    config: str | None
    parameters: dict
    seed: int
    version: str = __version__
    outputs: list = field(default_factory=list)
    duration_seconds: float = 0.0

    def write(self, target: Path) -> str:
        doc = {
            "command": self.command,
            "config": self.config,
            "parameters": self.parameters,
            "seed": self.seed,
            "version": self.version,
            "outputs": self.outputs,
            "duration_seconds": self.duration_seconds,
        }
        tmp = target.with_suffix(target.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, target)
        return str(target)


def load_config(path):
    """Parse a config file into ("spec", MapSpec), ("spider", SpiderConfig)
    or ("verify_request", dict); all validation errors carry the file name."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc

    kind = doc.get("kind", "map_spec")
    if kind == "spider":
        from .model import StateSet

        try:
            cfg = SpiderConfig(
                states=StateSet(doc["states"]),
                q=doc["Q"],
                alpha=doc["alpha"],
                x=doc["x"],
                dt=doc.get("dt", 1e-4),
                horizon=doc.get("horizon", 1.0),
                seed=doc.get("seed", 0),
            )
        except KeyError as exc:
            raise ParseError(f"{path}: spider config missing field {exc}") from exc
        return "spider", cfg
    if kind == "verify_request":
        if "check" not in doc or "spec" not in doc:
            raise ParseError(f"{path}: verify request needs 'check' and 'spec' fields")
        spec = _validated_spec(doc["spec"], path)
        return "verify_request", {"check": doc["check"], "spec": spec, "params": doc.get("params", {})}
    spec = _validated_spec(doc, path)
    return "spec", spec


def _validated_spec(doc, path):
    from .errors import SpecError

    spec = spec_from_dict(doc)
    violations = validate_spec(spec)
    if violations:
        raise SpecError(f"{path}: " + "; ".join(violations))
    return spec


def _spec_for(args, check: str | None = None):
    """Spec from --config, accepting a matching verify request; returns
    (spec, params-from-file)."""
    kind, obj = load_config(args.config)
    if kind == "spec":
        return obj, {}
    if kind == "verify_request" and check is not None and obj["check"] == check:
        return obj["spec"], obj["params"]
    raise ConfigError(f"{args.config}: expected a spec config for this command, got {kind}")


def _floats(text) -> np.ndarray:
    return np.array([float(v) for v in str(text).split(",")])


def _partition(text) -> Partition:
    blocks = [tuple(int(i) for i in b.split(",")) for b in str(text).split(";")]
    return Partition.of(*blocks)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    seed = int(np.random.SeedSequence().entropy & ((1 << 63) - 1))
    print(f"seed: {seed} (chosen at random; pass --seed to reproduce)")
    return seed


def _threads_default() -> int:
    env = os.environ.get("LAMPERTI_KIT_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish_dir(out: Path, manifest: RunManifest, t0: float) -> None:
    manifest.duration_seconds = time.perf_counter() - t0
    manifest.outputs.append(str(out / "manifest.json"))
    manifest.write(out / "manifest.json")


def _finish_file(target: Path, manifest: RunManifest, t0: float) -> None:
    manifest.duration_seconds = time.perf_counter() - t0
    side = target.parent / (target.name + ".manifest.json")
    manifest.outputs.append(str(side))
    manifest.write(side)


def _params(args, names) -> dict:
    return {n: getattr(args, n.replace("-", "_"), None) for n in names}


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _start_for(spec, point):
    """Map a start point to (state index, log-coordinates); clean error when
    its orthant is not part of the state set."""
    from .lamperti import phi_inverse

    signs, z = phi_inverse(point)
    try:
        return spec.states.index(signs), z
    except KeyError:
        raise ConfigError(
            f"start point {point.tolist()} lies in orthant {signs.signs}, "
            f"which is not in the state set"
        )


def _cmd_simulate_map(args) -> int:
    t0 = time.perf_counter()
    spec, _ = _spec_for(args)
    seed = _resolve_seed(args)
    cfg = SimConfig(horizon=args.horizon, dt=args.dt, seed=seed, replication=args.replication)
    if args.start_x is not None:
        start_state, start_xi = _start_for(spec, _floats(args.start_x))
    else:
        start_state, start_xi = 0, None
    path = sample_map_path(spec, cfg, start_state, start_xi)
    out = _out_dir(args)
    written = write_map_path(path, out / "map_path.csv")
    manifest = RunManifest(
        command="simulate-map",
        config=args.config,
        parameters=_params(args, ["horizon", "dt", "replication", "start_x"]),
        seed=seed,
        outputs=written,
    )
    _finish_dir(out, manifest, t0)
    print(f"wrote {written[0]}")
    return EXIT_OK


def _cmd_simulate_mssmp(args) -> int:
    t0 = time.perf_counter()
    spec, _ = _spec_for(args)
    seed = _resolve_seed(args)
    start_state, start_xi = _start_for(spec, _floats(args.x))
    cfg = SimConfig(horizon=args.horizon, dt=args.dt, seed=seed, replication=args.replication)
    path = sample_map_path(spec, cfg, start_state, start_xi)
    mssmp = forward_transform(path, spec.alpha)
    out = _out_dir(args)
    written = write_mssmp_path(mssmp, out / "mssmp_path.csv")
    manifest = RunManifest(
        command="simulate-mssmp",
        config=args.config,
        parameters=_params(args, ["horizon", "dt", "replication", "x"]),
        seed=seed,
        outputs=written,
    )
    _finish_dir(out, manifest, t0)
    print(f"wrote {written[0]}")
    return EXIT_OK


def _cmd_transform(args) -> int:
    t0 = time.perf_counter()
    path = read_map_path(args.map_path)
    mssmp = forward_transform(path, _floats(args.alpha))
    target = Path(args.out)
    target.parent.mkdir(parents=True, exist_ok=True)
    written = write_mssmp_path(mssmp, target)
    manifest = RunManifest(
        command="transform",
        config=args.map_path,
        parameters=_params(args, ["alpha"]),
        seed=0,
        outputs=written,
    )
    _finish_file(target, manifest, t0)
    print(f"wrote {written[0]}")
    return EXIT_OK


def _cmd_inverse_transform(args) -> int:
    t0 = time.perf_counter()
    mssmp = read_mssmp_path(args.mssmp_path)
    path = inverse_transform(mssmp, _floats(args.alpha))
    target = Path(args.out)
    target.parent.mkdir(parents=True, exist_ok=True)
    written = write_map_path(path, target)
    manifest = RunManifest(
        command="inverse-transform",
        config=args.mssmp_path,
        parameters=_params(args, ["alpha"]),
        seed=0,
        outputs=written,
    )
    _finish_file(target, manifest, t0)
    print(f"wrote {written[0]}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    t0 = time.perf_counter()
    spec, _ = _spec_for(args)
    report = classify(spec, tol=args.tol, h=args.h)
    print(report.to_json())
    if args.out is not None:
        out = _out_dir(args)
        target = out / "classification.json"
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
            fh.write("\n")
        manifest = RunManifest(
            command="classify",
            config=args.config,
            parameters=_params(args, ["tol", "h"]),
            seed=0,
            outputs=[str(target)],
        )
        _finish_dir(out, manifest, t0)
    return EXIT_OK


def _cmd_agglomerate(args) -> int:
    t0 = time.perf_counter()
    spec, _ = _spec_for(args)
    from .lamperti import agglomerate_spec

    new_spec = agglomerate_spec(spec, _partition(args.partition))
    target = Path(args.out)
    target.parent.mkdir(parents=True, exist_ok=True)
    save_spec(new_spec, target)
    manifest = RunManifest(
        command="agglomerate",
        config=args.config,
        parameters=_params(args, ["partition"]),
        seed=0,
        outputs=[str(target)],
    )
    _finish_file(target, manifest, t0)
    print(f"wrote {target}")
    return EXIT_OK


def _report_out(args, report, command, seed, t0, extra_params) -> int:
    print(report.to_json())
    if args.out is not None:
        out = _out_dir(args)
        target = out / "report.json"
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
            fh.write("\n")
        written = [str(target)]
        if report.details.get("per_path_csv"):
            written.append(report.details["per_path_csv"])
        manifest = RunManifest(
            command=command,
            config=args.config,
            parameters=extra_params,
            seed=seed,
            outputs=written,
        )
        _finish_dir(out, manifest, t0)
    print(f"{command}: {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_TEST_FAILED


def _cmd_verify_scaling(args) -> int:
    t0 = time.perf_counter()
    spec, file_params = _spec_for(args, check="scaling")
    seed = _resolve_seed(args)
    kwargs = dict(
        horizon=args.horizon,
        dt=args.dt,
        level=args.level,
        clock_scale=args.clock_scale,
        threads=args.threads,
        per_path_out=args.per_path_csv,
    )
    kwargs.update(file_params)
    report = verify_scaling(spec, _floats(args.x), _floats(args.c), args.t, args.paths, seed, **kwargs)
    return _report_out(
        args, report, "verify-scaling", seed, t0,
        _params(args, ["x", "c", "t", "paths", "horizon", "dt", "level", "clock_scale", "threads"]),
    )


def _cmd_verify_agglomeration(args) -> int:
    t0 = time.perf_counter()
    spec, file_params = _spec_for(args, check="agglomeration")
    seed = _resolve_seed(args)
    kwargs = dict(t_marginal=args.t_marginal, level=args.level, threads=args.threads,
                  per_path_out=args.per_path_csv)
    kwargs.update(file_params)
    report = verify_agglomeration(
        spec, _partition(args.partition), args.horizon, args.dt, args.paths, seed, **kwargs
    )
    return _report_out(
        args, report, "verify-agglomeration", seed, t0,
        _params(args, ["partition", "horizon", "dt", "paths", "t_marginal", "level", "threads"]),
    )


def _cmd_verify_lln(args) -> int:
    t0 = time.perf_counter()
    spec, file_params = _spec_for(args, check="lln")
    seed = _resolve_seed(args)
    alpha = spec.alpha if args.alpha is None else _floats(args.alpha)
    kwargs = dict(threads=args.threads, per_path_out=args.per_path_csv)
    kwargs.update(file_params)
    report = verify_lln(spec, alpha, args.horizon, args.paths, seed, **kwargs)
    return _report_out(
        args, report, "verify-lln", seed, t0,
        _params(args, ["alpha", "horizon", "paths", "threads"]),
    )


def _cmd_verify_lifetime(args) -> int:
    t0 = time.perf_counter()
    spec, file_params = _spec_for(args, check="lifetime")
    seed = _resolve_seed(args)
    alpha = spec.alpha if args.alpha is None else _floats(args.alpha)
    horizons = [float(v) for v in args.horizons.split(",")]
    kwargs = dict(dt=args.dt, threads=args.threads, per_path_out=args.per_path_csv)
    kwargs.update(file_params)
    report = verify_lifetime(spec, alpha, horizons, args.paths, seed, **kwargs)
    return _report_out(
        args, report, "verify-lifetime", seed, t0,
        _params(args, ["alpha", "horizons", "paths", "dt", "threads"]),
    )


def _cmd_example(args) -> int:
    t0 = time.perf_counter()
    kind, obj = load_config(args.config)
    seed = _resolve_seed(args)
    if args.kind == "spider":
        if kind != "spider":
            raise ConfigError(f"{args.config}: spider example needs a spider config")
        cfg = replace(obj, seed=seed)
        mssmp = example_jumping_spider(cfg)
    else:
        if kind != "spec":
            raise ConfigError(f"{args.config}: chain/drift examples need a spec config")
        spec = obj
        x = _floats(args.x) if args.x is not None else np.ones(spec.dim)
        gen = example_chain_scaling if args.kind == "chain-scaling" else example_drift_scaling
        mssmp = gen(x, spec.alpha, spec.Q, spec.states, args.horizon, args.dt, seed)
    out = _out_dir(args)
    written = write_mssmp_path(mssmp, out / "example_path.csv")
    manifest = RunManifest(
        command="example",
        config=args.config,
        parameters=_params(args, ["kind", "x", "horizon", "dt"]),
        seed=seed,
        outputs=written,
    )
    _finish_dir(out, manifest, t0)
    print(f"wrote {written[0]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="lamperti-kit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lamperti-kit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(fn=fn)
        return p

    p = add("simulate-map", _cmd_simulate_map, help="sample one pair path to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--start-x", help="start point in the orthant space (comma-separated)")
    p.add_argument("--out", required=True)

    p = add("simulate-mssmp", _cmd_simulate_mssmp, help="sample and time-change a path to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--x", required=True, help="start point (comma-separated, nonzero coordinates)")
    p.add_argument("--out", required=True)

    p = add("transform", _cmd_transform, help="time-change a stored pair path")
    p.add_argument("--map-path", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--out", required=True, help="output CSV file")

    p = add("inverse-transform", _cmd_inverse_transform, help="recover the pair path")
    p.add_argument("--mssmp-path", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--out", required=True, help="output CSV file")

    p = add("classify", _cmd_classify, help="spectral classification report")
    p.add_argument("--config", required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--h", type=float)
    p.add_argument("--out")

    p = add("agglomerate", _cmd_agglomerate, help="block-product spec")
    p.add_argument("--config", required=True)
    p.add_argument("--partition", required=True, help='blocks like "0,1" or "0;1"')
    p.add_argument("--out", required=True, help="output spec JSON file")

    p = add("verify-scaling", _cmd_verify_scaling, help="multi-scaling identity test")
    p.add_argument("--config", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=float, default=12.0)
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--level", type=float, default=0.01)
    p.add_argument("--clock-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--per-path-csv", help="also write per-path summary statistics")
    p.add_argument("--out")

    p = add("verify-agglomeration", _cmd_verify_agglomeration, help="product-commutation test")
    p.add_argument("--config", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("--dt", type=float, default=0.001)
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-marginal", type=float, default=0.5)
    p.add_argument("--level", type=float, default=0.01)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--per-path-csv", help="also write per-path summary statistics")
    p.add_argument("--out")

    p = add("verify-lln", _cmd_verify_lln, help="long-run growth rate test")
    p.add_argument("--config", required=True)
    p.add_argument("--alpha")
    p.add_argument("--horizon", type=float, default=500.0)
    p.add_argument("--paths", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--per-path-csv", help="also write per-path summary statistics")
    p.add_argument("--out")

    p = add("verify-lifetime", _cmd_verify_lifetime, help="lifetime trichotomy test")
    p.add_argument("--config", required=True)
    p.add_argument("--alpha")
    p.add_argument("--horizons", default="8,16,32,64,128")
    p.add_argument("--paths", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--per-path-csv", help="also write per-path summary statistics")
    p.add_argument("--out")

    p = add("example", _cmd_example, help="closed-form reference path to CSV")
    p.add_argument("--kind", required=True, choices=["chain-scaling", "drift-scaling", "spider"])
    p.add_argument("--config", required=True)
    p.add_argument("--x")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)

    return parser


def dispatch(argv) -> int:
    """Run one command; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except LampertiKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
