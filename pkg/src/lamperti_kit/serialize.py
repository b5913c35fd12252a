"""JSON schema for process descriptions.

A spec document carries `dimension`, `states` (list of +-1 vectors), `Q`
(row-major), `alpha`, `blocks` (drift / covariance / jump_rate / jump_law /
killing_rate per state) and `transition_jumps` (a map "i->j" -> law
descriptor).  Law descriptors use the tags point_mass / gaussian /
two_sided_exp / zero, plus the combinators independent (vector of
independent scalar components) and sum (convolution, produced by
agglomeration).
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError, SpecError
from .laws import law_from_descriptor
from .model import LevyBlock, MapSpec, StateSet, validate_spec

__all__ = ["spec_to_dict", "spec_from_dict", "save_spec", "load_spec"]


def spec_to_dict(spec: MapSpec) -> dict:
    return {
        "dimension": spec.dim,
        "states": [list(s.signs) for s in spec.states],
        "Q": spec.Q.tolist(),
        "alpha": spec.alpha.tolist(),
        "blocks": [b.to_descriptor() for b in spec.blocks],
        "transition_jumps": {f"{i}->{j}": law.to_descriptor() for (i, j), law in spec.jumps.items()},
    }


def spec_from_dict(doc: dict) -> MapSpec:
    """Build and structurally check a spec from its document form.

    Missing block fields default to the trivial choice (zero covariance, no
    jumps, no killing); semantic invariants are still enforced by
    `validate_spec` on the result.
    """
    try:
        states = StateSet(doc["states"])
        dim = states.dim
        if "dimension" in doc and int(doc["dimension"]) != dim:
            raise SpecError(
                f"dimension field {doc['dimension']} does not match states of dimension {dim}"
            )
        blocks = []
        for raw in doc["blocks"]:
            blocks.append(
                LevyBlock(
                    drift=raw.get("drift", np.zeros(dim)),
                    covariance=raw.get("covariance"),
                    jump_rate=raw.get("jump_rate", 0.0),
                    jump_law=(
                        law_from_descriptor(raw["jump_law"], dim) if "jump_law" in raw else None
                    ),
                    killing_rate=raw.get("killing_rate", 0.0),
                )
            )
        jumps = {}
        for key, desc in doc.get("transition_jumps", {}).items():
            i, j = key.split("->")
            jumps[(int(i), int(j))] = law_from_descriptor(desc, dim)
        return MapSpec(
            states=states,
            Q=doc["Q"],
            blocks=blocks,
            jumps=jumps,
            alpha=doc.get("alpha"),
        )
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed spec document: {exc}") from exc


def save_spec(spec: MapSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_spec(path) -> MapSpec:
    """Load a spec file; SpecError lists every violated invariant."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    spec = spec_from_dict(doc)
    violations = validate_spec(spec)
    if violations:
        raise SpecError(f"{path}: " + "; ".join(violations))
    return spec
