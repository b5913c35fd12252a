"""Time changes between Markov additive processes and multi-self-similar paths.

The forward direction maps a pair (J, xi) to X via the state map
phi(y, z) = (y_i exp(z_i)) and the clock F(s) = integral of exp(<alpha, xi>);
the inverse direction undoes both.  The clock is accumulated by trapezoid
rule on the path grid (chain-jump instants carry both one-sided values, so
the discontinuous integrand is handled exactly at segment ends) and inverted
monotonically with linear interpolation.

Also implements the multiplicative agglomeration of coordinates over a
partition, at the spec level, the MAP-path level and the transformed-path
level; the three commute pathwise because the clock only depends on
<alpha, xi>, which block sums preserve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import interp_right, trapezoid_cumsum
from .errors import DomainError, GridError, PartitionError
from .laws import block_sum_matrix
from .model import LevyBlock, MapSpec, SignState, StateSet
from .sampler import ChainJump, MapPath, Segment

__all__ = [
    "MssmpPath",
    "Partition",
    "phi",
    "phi_inverse",
    "forward_transform",
    "inverse_transform",
    "forward_value_at",
    "agglomerate_spec",
    "agglomerate_map_path",
    "project_path",
    "check_mssmp_path",
]

ABSORBED = -1  # orthant label at and after absorption


@dataclass
class MssmpPath:
    """Grid record of a multi-self-similar path on a union of open orthants.

    `zeta` is the absorption time when `zeta_censored` is False; otherwise it
    is the end of the observation window (the path had not been absorbed).
    `orthants[k]` indexes `states`, with ABSORBED (-1) at and after zeta.
    """

    times: np.ndarray
    values: np.ndarray
    zeta: float
    zeta_censored: bool
    orthants: np.ndarray
    states: StateSet

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def alive(self) -> np.ndarray:
        """Boolean mask of grid points strictly before absorption."""
        if self.zeta_censored:
            return np.ones(self.times.shape[0], dtype=bool)
        return self.times < self.zeta

    def value_at(self, t) -> np.ndarray:
        """Linear interpolation of the coordinates at query times."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.shape[0], self.dim))
        for k in range(self.dim):
            out[:, k] = interp_right(t, self.times, self.values[:, k])
        return out


def phi(y, z) -> np.ndarray:
    """State map (y, z) -> (y_i exp(z_i)): lands in the orthant labelled y."""
    y_arr = y.as_array() if isinstance(y, SignState) else np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    return y_arr * np.exp(z)


def phi_inverse(x) -> tuple[SignState, np.ndarray]:
    """Inverse state map x -> (sign(x_i), log|x_i|); x must avoid every axis."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise DomainError(f"phi_inverse undefined at {x.tolist()}: zero coordinate")
    signs = SignState(tuple(int(v) for v in np.sign(x)))
    return signs, np.log(np.abs(x))


def _output_grid(total: float, dt_in: float, w_min: float, m_in: int) -> np.ndarray:
    """Uniform output times in [0, total).

    Step min(dt_in * w_min, dt_in) follows the slowest stretch of the clock
    so every input knot is resolved; the point count is capped at 10x the
    input grid and floored at the input grid size.
    """
    step = min(dt_in * w_min, dt_in)
    n = int(np.ceil(total / step)) if step > 0 else 10 * m_in
    n = int(np.clip(n, m_in, 10 * m_in))
    return (total / n) * np.arange(n)


def forward_transform(path: MapPath, alpha, out_dt: float | None = None) -> MssmpPath:
    """Time-change a MAP path into the corresponding multi-self-similar path.

    The output grid is uniform in transformed time over [0, F(end)); when the
    input path was killed the absorption point (F(end), 0) is appended and
    `zeta` is exact, otherwise `zeta` reports the censoring bound F(end).
    """
    alpha = np.asarray(alpha, dtype=float)
    s_grid, xi, state_idx = path.grid()
    if s_grid.shape[0] < 2:
        raise GridError("path grid has fewer than 2 points")
    xbar = xi @ alpha
    w = np.exp(xbar)
    big_f = trapezoid_cumsum(s_grid, w)
    total = float(big_f[-1])
    if not total > 0.0:
        raise GridError("clock integral is not positive; degenerate path grid")

    diffs = np.diff(s_grid)
    pos = diffs[diffs > 0]
    dt_in = float(np.median(pos)) if out_dt is None else float(out_dt)
    out_times = _output_grid(total, dt_in, float(np.exp(xbar.min())), s_grid.shape[0])

    tau = interp_right(out_times, big_f, s_grid)
    d = xi.shape[1]
    xi_tau = np.empty((out_times.shape[0], d))
    for k in range(d):
        xi_tau[:, k] = interp_right(tau, s_grid, xi[:, k])
    idx = np.clip(np.searchsorted(s_grid, tau, side="right") - 1, 0, s_grid.shape[0] - 1)
    labels = state_idx[idx]
    values = path.states.sign_matrix()[labels] * np.exp(xi_tau)

    if path.killed_at is not None:
        out_times = np.append(out_times, total)
        values = np.vstack([values, np.zeros(d)])
        labels = np.append(labels, ABSORBED)
        censored = False
    else:
        censored = True
    return MssmpPath(
        times=out_times,
        values=values,
        zeta=total,
        zeta_censored=censored,
        orthants=labels,
        states=path.states,
    )


def forward_value_at(path: MapPath, alpha, t_query):
    """Transformed-path values and orthant labels at query times, plus a mask
    of queries still inside the observed clock range (False entries are
    censored or past absorption)."""
    alpha = np.asarray(alpha, dtype=float)
    t_query = np.atleast_1d(np.asarray(t_query, dtype=float))
    s_grid, xi, state_idx = path.grid()
    if s_grid.shape[0] < 2:
        raise GridError("path grid has fewer than 2 points")
    w = np.exp(xi @ alpha)
    big_f = trapezoid_cumsum(s_grid, w)
    total = float(big_f[-1])
    ok = t_query < total
    tau = interp_right(t_query, big_f, s_grid)
    d = xi.shape[1]
    xi_tau = np.empty((t_query.shape[0], d))
    for k in range(d):
        xi_tau[:, k] = interp_right(tau, s_grid, xi[:, k])
    idx = np.clip(np.searchsorted(s_grid, tau, side="right") - 1, 0, s_grid.shape[0] - 1)
    labels = state_idx[idx]
    values = path.states.sign_matrix()[labels] * np.exp(xi_tau)
    return values, labels, ok


def inverse_transform(path: MssmpPath, alpha, out_dt: float | None = None) -> MapPath:
    """Recover the pair (J, xi) from a transformed path.

    Pre-absorption coordinates must avoid every axis (DomainError otherwise;
    values are never clipped).  When the input was absorbed, the recovered
    path is killed at the accumulated inverse clock G(zeta); when censored it
    simply ends there.
    """
    alpha = np.asarray(alpha, dtype=float)
    live = path.alive()
    t_pre = path.times[live]
    vals = path.values[live]
    labels = path.orthants[live]
    if t_pre.shape[0] < 2:
        raise GridError("fewer than 2 grid points before absorption")
    if np.any(vals == 0.0):
        raise DomainError("zero coordinate before absorption; not a valid orthant path")

    logabs = np.log(np.abs(vals))
    g = np.exp(-(logabs @ alpha))
    big_g = trapezoid_cumsum(t_pre, g)
    total = float(big_g[-1])
    if not total > 0.0:
        raise GridError("inverse clock integral is not positive")

    diffs = np.diff(t_pre)
    pos = diffs[diffs > 0]
    dt_in = float(np.median(pos)) if out_dt is None else float(out_dt)
    out_times = _output_grid(total, dt_in, float(g.min()), t_pre.shape[0])

    a_of_t = interp_right(out_times, big_g, t_pre)
    d = vals.shape[1]
    xi = np.empty((out_times.shape[0], d))
    for k in range(d):
        xi[:, k] = interp_right(a_of_t, t_pre, logabs[:, k])
    idx = np.clip(np.searchsorted(t_pre, a_of_t, side="right") - 1, 0, t_pre.shape[0] - 1)
    out_state = labels[idx].astype(np.int64)

    # split into constant-state segments; jump instants are known only at
    # grid resolution here, so the boundary point is not duplicated
    breaks = np.nonzero(np.diff(out_state) != 0)[0] + 1
    bounds = np.concatenate([[0], breaks, [out_times.shape[0]]])
    segments = []
    chain_jumps = []
    for b0, b1 in zip(bounds[:-1], bounds[1:]):
        segments.append(
            Segment(
                state=int(out_state[b0]),
                start=float(out_times[b0]),
                times=out_times[b0:b1],
                xi=xi[b0:b1],
            )
        )
    for b in breaks:
        chain_jumps.append(
            ChainJump(
                time=float(out_times[b]),
                from_state=int(out_state[b - 1]),
                to_state=int(out_state[b]),
                increment=xi[b] - xi[b - 1],
            )
        )
    killed_at = None if path.zeta_censored else total
    return MapPath(
        states=path.states,
        segments=segments,
        chain_jumps=chain_jumps,
        horizon=total,
        killed_at=killed_at,
    )


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks covering the coordinate indices 0..d-1."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [i for b in self.blocks for i in b]
        if not flat:
            raise PartitionError("partition has no blocks")
        if sorted(flat) != list(range(len(flat))):
            raise PartitionError(f"blocks {self.blocks} do not partition 0..{max(flat, default=0)}")

    @classmethod
    def of(cls, *blocks) -> "Partition":
        return cls(tuple(tuple(int(i) for i in b) for b in blocks))

    @classmethod
    def identity(cls, d: int) -> "Partition":
        return cls(tuple((i,) for i in range(d)))

    @property
    def dim(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def d_prime(self) -> int:
        return len(self.blocks)

    def matrix(self) -> np.ndarray:
        return block_sum_matrix(self.blocks, self.dim)

    def check_alpha(self, alpha) -> np.ndarray:
        """Reduced index vector; PartitionError unless alpha is constant per block.

        Block-constant alpha is exactly what keeps the agglomerated process
        Markovian, so a violation is rejected rather than averaged over.
        """
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.dim,):
            raise PartitionError(f"alpha has length {alpha.shape[0]}, partition covers {self.dim}")
        out = np.empty(self.d_prime)
        for i, b in enumerate(self.blocks):
            vals = alpha[list(b)]
            if np.any(vals != vals[0]):
                raise PartitionError(
                    f"alpha {alpha.tolist()} not constant on block {tuple(j for j in b)}"
                )
            out[i] = vals[0]
        return out


def _agglomerated_states(states: StateSet, partition: Partition) -> StateSet:
    signs = []
    for s in states:
        arr = np.array(s.signs)
        signs.append(SignState(tuple(int(np.prod(arr[list(b)])) for b in partition.blocks)))
    distinct = len(set(signs)) == len(signs)
    return StateSet(signs, require_distinct=distinct)


def agglomerate_spec(spec: MapSpec, partition: Partition) -> MapSpec:
    """Spec of the coordinate-product process over the partition blocks.

    The chain and its intensity matrix are unchanged; sign labels become the
    per-block products (labels may collapse, the chain indices do not), the
    additive part is block-summed exactly through the law catalog, and the
    index vector drops to one value per block.
    """
    alpha_new = partition.check_alpha(spec.alpha)
    m = partition.matrix()
    blocks = [
        LevyBlock(
            drift=m @ b.drift,
            covariance=m @ b.covariance @ m.T,
            jump_rate=b.jump_rate,
            jump_law=b.jump_law.sum_over_blocks(partition.blocks),
            killing_rate=b.killing_rate,
        )
        for b in spec.blocks
    ]
    jumps = {key: law.sum_over_blocks(partition.blocks) for key, law in spec.jumps.items()}
    return MapSpec(
        states=_agglomerated_states(spec.states, partition),
        Q=spec.Q.copy(),
        blocks=blocks,
        jumps=jumps,
        alpha=alpha_new,
    )


def agglomerate_map_path(path: MapPath, partition: Partition) -> MapPath:
    """Block-sum the additive coordinates of a sampled path (chain unchanged)."""
    m = partition.matrix()
    segments = [
        Segment(state=s.state, start=s.start, times=s.times, xi=s.xi @ m.T) for s in path.segments
    ]
    jumps = [
        ChainJump(time=j.time, from_state=j.from_state, to_state=j.to_state, increment=m @ j.increment)
        for j in path.chain_jumps
    ]
    return MapPath(
        states=_agglomerated_states(path.states, partition),
        segments=segments,
        chain_jumps=jumps,
        horizon=path.horizon,
        killed_at=path.killed_at,
    )


def project_path(path: MssmpPath, partition: Partition, alpha=None) -> MssmpPath:
    """Coordinatewise product over the partition blocks at every grid time.

    When `alpha` is supplied the partition is checked for admissibility
    (PartitionError otherwise); absorption data are preserved.
    """
    if alpha is not None:
        partition.check_alpha(alpha)
    cols = [path.values[:, list(b)].prod(axis=1) for b in partition.blocks]
    values = np.stack(cols, axis=1)
    return MssmpPath(
        times=path.times,
        values=values,
        zeta=path.zeta,
        zeta_censored=path.zeta_censored,
        orthants=path.orthants.copy(),
        states=_agglomerated_states(path.states, partition),
    )


def check_mssmp_path(path: MssmpPath) -> list[str]:
    """Structural invariant violations of a transformed path (empty when clean)."""
    out = []
    if np.any(np.diff(path.times) <= 0):
        out.append("grid times not strictly increasing")
    live = path.alive()
    vals = path.values
    if np.any(vals[live] == 0.0):
        out.append("zero coordinate before absorption")
    sign_rows = path.states.sign_matrix()
    for k in np.nonzero(live)[0]:
        lab = path.orthants[k]
        if lab == ABSORBED:
            out.append(f"live point {k} labelled absorbed")
            break
        if not np.array_equal(np.sign(vals[k]), sign_rows[lab]):
            out.append(f"point {k}: sign {np.sign(vals[k]).tolist()} != orthant label {lab}")
            break
    if not path.zeta_censored:
        dead = ~live
        if np.any(vals[dead] != 0.0):
            out.append("nonzero coordinate at or after absorption")
        if np.any(path.orthants[dead] != ABSORBED):
            out.append("orthant label not ABSORBED after absorption")
    return out
