"""CSV + sidecar-JSON persistence for sampled paths.

Pair paths: header `t,state_index,J1..Jd,xi1..xid`, one row per grid point
(chain-jump instants appear twice, carrying both one-sided values), with a
sidecar JSON holding the chain jumps, the kill time and the state labels.

Transformed paths: header `t,X1..Xd,orthant_index` with a sidecar holding
the absorption time (a number, or "censored"), the orthant labels and the
partition used, if any.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .lamperti import ABSORBED, MssmpPath
from .model import StateSet
from .sampler import ChainJump, MapPath, Segment

__all__ = [
    "write_map_path",
    "read_map_path",
    "write_mssmp_path",
    "read_mssmp_path",
    "sidecar_path",
]


def sidecar_path(csv_file) -> Path:
    p = Path(csv_file)
    return p.with_suffix(p.suffix + ".json") if p.suffix != ".csv" else p.with_suffix(".json")


def write_map_path(path: MapPath, csv_file) -> list[str]:
    """Write the pair path; returns the files written."""
    csv_file = Path(csv_file)
    times, xi, idx = path.grid()
    d = path.dim
    signs = path.states.sign_matrix()
    with open(csv_file, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "state_index"] + [f"J{k + 1}" for k in range(d)] + [f"xi{k + 1}" for k in range(d)])
        for row in range(times.shape[0]):
            j = signs[idx[row]].astype(int)
            writer.writerow(
                [f"{times[row]:.17g}", int(idx[row])] + list(j) + [f"{v:.17g}" for v in xi[row]]
            )
    side = sidecar_path(csv_file)
    meta = {
        "states": [list(s.signs) for s in path.states],
        "horizon": path.horizon,
        "killed_at": path.killed_at,
        "chain_jumps": [
            {
                "time": jmp.time,
                "from_state": jmp.from_state,
                "to_state": jmp.to_state,
                "increment": np.asarray(jmp.increment).tolist(),
            }
            for jmp in path.chain_jumps
        ],
    }
    with open(side, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return [str(csv_file), str(side)]


def read_map_path(csv_file) -> MapPath:
    """Rebuild a pair path from its CSV + sidecar."""
    csv_file = Path(csv_file)
    side = sidecar_path(csv_file)
    if not side.exists():
        raise ParseError(f"missing sidecar {side}")
    with open(side, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    states = StateSet(meta["states"], require_distinct=False)
    d = states.dim

    times, idx, xi = [], [], []
    with open(csv_file, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 2 + 2 * d:
            raise ParseError(f"{csv_file}: header has {len(header)} columns, expected {2 + 2 * d}")
        for row in reader:
            times.append(float(row[0]))
            idx.append(int(row[1]))
            xi.append([float(v) for v in row[2 + d:2 + 2 * d]])
    times = np.array(times)
    idx = np.array(idx, dtype=np.int64)
    xi = np.array(xi)

    # segment boundaries: duplicated time (both one-sided values) or a state flip
    breaks = np.nonzero((np.diff(times) == 0.0) | (np.diff(idx) != 0))[0] + 1
    bounds = np.concatenate([[0], breaks, [times.shape[0]]])
    segments = [
        Segment(state=int(idx[b0]), start=float(times[b0]), times=times[b0:b1], xi=xi[b0:b1])
        for b0, b1 in zip(bounds[:-1], bounds[1:])
        if b1 > b0
    ]
    jumps = [
        ChainJump(
            time=j["time"],
            from_state=j["from_state"],
            to_state=j["to_state"],
            increment=np.array(j["increment"], dtype=float),
        )
        for j in meta.get("chain_jumps", [])
    ]
    return MapPath(
        states=states,
        segments=segments,
        chain_jumps=jumps,
        horizon=float(meta["horizon"]),
        killed_at=meta.get("killed_at"),
    )


def write_mssmp_path(path: MssmpPath, csv_file, partition=None) -> list[str]:
    """Write a transformed path; returns the files written."""
    csv_file = Path(csv_file)
    d = path.dim
    with open(csv_file, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"X{k + 1}" for k in range(d)] + ["orthant_index"])
        for row in range(path.times.shape[0]):
            writer.writerow(
                [f"{path.times[row]:.17g}"]
                + [f"{v:.17g}" for v in path.values[row]]
                + [int(path.orthants[row])]
            )
    side = sidecar_path(csv_file)
    meta = {
        "zeta": "censored" if path.zeta_censored else path.zeta,
        "censoring_bound": path.zeta if path.zeta_censored else None,
        "orthants": [list(s.signs) for s in path.states],
        "partition": None if partition is None else [list(b) for b in partition.blocks],
    }
    with open(side, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return [str(csv_file), str(side)]


def read_mssmp_path(csv_file) -> MssmpPath:
    csv_file = Path(csv_file)
    side = sidecar_path(csv_file)
    if not side.exists():
        raise ParseError(f"missing sidecar {side}")
    with open(side, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    states = StateSet(meta["orthants"], require_distinct=False)
    d = states.dim

    times, values, labels = [], [], []
    with open(csv_file, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 2 + d:
            raise ParseError(f"{csv_file}: header has {len(header)} columns, expected {2 + d}")
        for row in reader:
            times.append(float(row[0]))
            values.append([float(v) for v in row[1:1 + d]])
            labels.append(int(row[1 + d]))
    if meta["zeta"] == "censored":
        zeta, censored = float(meta["censoring_bound"]), True
    else:
        zeta, censored = float(meta["zeta"]), False
    return MssmpPath(
        times=np.array(times),
        values=np.array(values),
        zeta=zeta,
        zeta_censored=censored,
        orthants=np.array(labels, dtype=np.int64),
        states=states,
    )
