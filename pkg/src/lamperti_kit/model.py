"""Data model for Markov additive processes on {-1,1}^d x R^d.

A process is described by a modulating chain on a set of sign vectors,
one finite-activity Levy block per chain state (drift + Brownian part +
compound Poisson jumps + killing rate), transition-jump laws, and the
scaling index alpha.  The module evaluates the characteristic exponent
matrix of the pair exactly from the closed-form block exponents and the
transition-jump mgfs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SpecError
from .laws import Law, Zero, psd_factor

__all__ = [
    "SignState",
    "StateSet",
    "LevyBlock",
    "MapSpec",
    "ExponentMatrix",
    "mgf",
    "psi",
    "exponent_matrix",
    "directional_exponent",
    "validate_spec",
]

ROW_SUM_TOL = 1e-12
PSD_FLOOR = -1e-10


@dataclass(frozen=True)
class SignState:
    """A sign vector in {-1, +1}^d labelling one open orthant."""

    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.signs) < 1:
            raise SpecError("sign state needs dimension >= 1")
        if any(s not in (-1, 1) for s in self.signs):
            raise SpecError(f"sign state entries must be -1 or +1, got {self.signs}")

    @property
    def dim(self) -> int:
        return len(self.signs)

    def as_array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)

    def __mul__(self, other: "SignState") -> "SignState":
        return SignState(tuple(a * b for a, b in zip(self.signs, other.signs)))


def _coerce_state(s) -> SignState:
    if isinstance(s, SignState):
        return s
    return SignState(tuple(int(v) for v in s))


class StateSet:
    """Ordered list of sign states; the index order fixes all matrix indexing.

    Agglomeration can collapse several states onto one sign pattern, in which
    case the chain keeps its distinct indices and only the labels coincide;
    `require_distinct=False` admits that.
    """

    def __init__(self, states, require_distinct: bool = True):
        self.states = [_coerce_state(s) for s in states]
        if not self.states:
            raise SpecError("state set must be nonempty")
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise SpecError("all sign states must share one dimension")
        self.dim = dims.pop()
        self.require_distinct = require_distinct
        if require_distinct and len(set(self.states)) != len(self.states):
            raise SpecError("duplicate sign states")
        self._index = {}
        for i, s in enumerate(self.states):
            self._index.setdefault(s.signs, i)

    @property
    def n(self) -> int:
        return len(self.states)

    def index(self, signs) -> int:
        """Index of a sign pattern (first match when labels collapsed)."""
        key = _coerce_state(signs).signs
        if key not in self._index:
            raise KeyError(f"sign pattern {key} not in state set")
        return self._index[key]

    def sign_matrix(self) -> np.ndarray:
        """(n, d) array of the sign vectors."""
        return np.array([s.signs for s in self.states], dtype=float)

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i) -> SignState:
        return self.states[i]

    def __eq__(self, other):
        return isinstance(other, StateSet) and self.states == other.states

    def __repr__(self):
        return f"StateSet({[s.signs for s in self.states]})"


class LevyBlock:
    """Finite-activity Levy triplet plus killing for one chain state.

    drift b, covariance sigma (d x d, PSD), compound-Poisson jump rate and
    jump-size law, and killing rate lambda.  The Laplace exponent is
    psi(u) = <b, u> + u' sigma u / 2 + rate * (m_jump(u) - 1) - kill.
    """

    def __init__(self, drift, covariance=None, jump_rate=0.0, jump_law: Law | None = None, killing_rate=0.0):
        self.drift = np.atleast_1d(np.asarray(drift, dtype=float))
        self.dim = self.drift.shape[0]
        if covariance is None:
            covariance = np.zeros((self.dim, self.dim))
        self.covariance = np.asarray(covariance, dtype=float)
        if self.covariance.shape != (self.dim, self.dim):
            raise SpecError(
                f"covariance shape {self.covariance.shape} does not match drift of length {self.dim}"
            )
        self.jump_rate = float(jump_rate)
        self.jump_law = jump_law if jump_law is not None else Zero(self.dim)
        if self.jump_law.dim != self.dim:
            raise SpecError("jump law dimension does not match block dimension")
        self.killing_rate = float(killing_rate)
        self._chol = None

    def cov_factor(self) -> np.ndarray:
        """Cached factor L with L L' = covariance (raises if not PSD)."""
        if self._chol is None:
            self._chol = psd_factor(self.covariance, floor=PSD_FLOOR)
        return self._chol

    @property
    def has_noise(self) -> bool:
        return bool(np.any(self.covariance != 0.0))

    def to_descriptor(self) -> dict:
        return {
            "drift": self.drift.tolist(),
            "covariance": self.covariance.tolist(),
            "jump_rate": self.jump_rate,
            "jump_law": self.jump_law.to_descriptor(),
            "killing_rate": self.killing_rate,
        }

    def __eq__(self, other):
        return isinstance(other, LevyBlock) and self.to_descriptor() == other.to_descriptor()

    def __repr__(self):
        return (
            f"LevyBlock(drift={self.drift.tolist()}, jump_rate={self.jump_rate}, "
            f"killing_rate={self.killing_rate})"
        )


class MapSpec:
    """Full generative description of a Markov additive process.

    Parameters
    ----------
    states : StateSet or iterable of sign vectors
    Q : (n, n) intensity matrix of the modulating chain (rows sum to zero)
    blocks : one LevyBlock per state
    jumps : mapping (i, j) -> Law for the additive jump at an i->j chain
        transition; pairs left out default to a point mass at 0
    alpha : scaling index, nonnegative d-vector
    """

    def __init__(self, states, Q, blocks, jumps=None, alpha=None):
        self.states = states if isinstance(states, StateSet) else StateSet(states)
        self.Q = np.asarray(Q, dtype=float)
        n, d = self.states.n, self.states.dim
        if self.Q.shape != (n, n):
            raise SpecError(f"Q has shape {self.Q.shape}, expected ({n}, {n})")
        self.blocks = list(blocks)
        if len(self.blocks) != n:
            raise SpecError(f"{len(self.blocks)} blocks for {n} states")
        for b in self.blocks:
            if b.dim != d:
                raise SpecError("block dimension does not match state dimension")
        self.jumps = {}
        for (i, j), law in (jumps or {}).items():
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise SpecError(f"transition jump index ({i}, {j}) out of range")
            if law.dim != d:
                raise SpecError(f"transition jump law ({i}, {j}) has wrong dimension")
            self.jumps[(int(i), int(j))] = law
        if alpha is None:
            alpha = np.ones(d)
        self.alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        if self.alpha.shape != (d,):
            raise SpecError(f"alpha has shape {self.alpha.shape}, expected ({d},)")

    @property
    def n(self) -> int:
        return self.states.n

    @property
    def dim(self) -> int:
        return self.states.dim

    @property
    def is_conservative(self) -> bool:
        return all(b.killing_rate == 0.0 for b in self.blocks)

    def jump_law(self, i: int, j: int) -> Law:
        """Transition-jump law for i -> j (point mass at 0 when unspecified)."""
        return self.jumps.get((i, j), Zero(self.dim))

    def __repr__(self):
        return f"MapSpec(n={self.n}, d={self.dim}, alpha={self.alpha.tolist()})"


@dataclass
class ExponentMatrix:
    """Evaluated characteristic exponent matrix with per-entry validity flags."""

    u: np.ndarray
    entries: np.ndarray
    valid: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.valid is None:
            self.valid = np.ones_like(self.entries, dtype=bool)

    @property
    def all_valid(self) -> bool:
        return bool(self.valid.all())

    def require_valid(self) -> np.ndarray:
        if not self.all_valid:
            bad = np.argwhere(~self.valid)
            raise DomainError(f"exponent matrix invalid at entries {bad.tolist()} for u={self.u}")
        return self.entries


def mgf(law: Law, u) -> float:
    """Moment generating function of a catalog law at u (DomainError outside)."""
    return law.mgf(u)


def psi(block: LevyBlock, u) -> float:
    """Laplace exponent of one block: <b,u> + u'Su/2 + r(m(u)-1) - kill."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (block.dim,):
        raise ValueError(f"argument has shape {u.shape}, block has dimension {block.dim}")
    val = float(block.drift @ u + 0.5 * u @ block.covariance @ u) - block.killing_rate
    if block.jump_rate > 0.0:
        val += block.jump_rate * (block.jump_law.mgf(u) - 1.0)
    return val


def exponent_matrix(spec: MapSpec, u) -> ExponentMatrix:
    """Characteristic exponent matrix A(u).

    Diagonal entries are psi_i(u) + q_ii, off-diagonal entries q_ij * G_ij(u).
    Entries whose mgf argument falls outside its finiteness domain are
    flagged invalid (NaN value) instead of raising.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = spec.n
    entries = np.zeros((n, n))
    valid = np.ones((n, n), dtype=bool)
    for i in range(n):
        try:
            entries[i, i] = psi(spec.blocks[i], u) + spec.Q[i, i]
        except DomainError:
            entries[i, i] = np.nan
            valid[i, i] = False
        for j in range(n):
            if j == i:
                continue
            q = spec.Q[i, j]
            if q == 0.0:
                continue
            try:
                entries[i, j] = q * spec.jump_law(i, j).mgf(u)
            except DomainError:
                entries[i, j] = np.nan
                valid[i, j] = False
    return ExponentMatrix(u=u, entries=entries, valid=valid)


def directional_exponent(spec: MapSpec, v, u: float) -> ExponentMatrix:
    """A(u * v): axis exponents for v = e_k, the index-weighted one for v = alpha."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return exponent_matrix(spec, float(u) * v)


def validate_spec(spec: MapSpec) -> list[str]:
    """All invariant violations of a spec, one message each (empty when valid)."""
    out = []
    n, d = spec.n, spec.dim

    seen = {}
    for i, s in enumerate(spec.states):
        if s.signs in seen and spec.states.require_distinct:
            out.append(f"states: entry {i} duplicates entry {seen[s.signs]} ({s.signs})")
        seen.setdefault(s.signs, i)

    for i in range(n):
        row = spec.Q[i]
        off = np.delete(row, i)
        if np.any(off < 0):
            out.append(f"Q row {i} has a negative off-diagonal entry")
        s = row.sum()
        if abs(s) > ROW_SUM_TOL:
            out.append(f"Q row {i} sums to {s:.6g}, expected 0")

    for k, b in enumerate(spec.blocks):
        if not np.allclose(b.covariance, b.covariance.T, atol=1e-12):
            out.append(f"block {k} covariance not symmetric")
        else:
            evals = np.linalg.eigvalsh(b.covariance)
            if evals.min() < PSD_FLOOR:
                out.append(f"block {k} covariance not PSD (eigenvalue {evals.min():.3g})")
        if b.jump_rate < 0:
            out.append(f"block {k} jump rate {b.jump_rate} < 0")
        if b.killing_rate < 0:
            out.append(f"block {k} killing rate {b.killing_rate} < 0")

    for (i, j), law in spec.jumps.items():
        if spec.Q[i, j] == 0.0:
            out.append(f"transition jump ({i}, {j}) given but q_ij = 0")
        if law.dim != d:
            out.append(f"transition jump ({i}, {j}) has dimension {law.dim}, expected {d}")

    if np.any(spec.alpha < 0):
        out.append(f"alpha {spec.alpha.tolist()} has negative entries")

    return out
