"""Path simulation for Markov additive processes.

The chain is simulated event-by-event with exact exponential clocks; jump
times are never rounded onto the step grid.  Between chain events the
additive part advances on a uniform grid with exactly sampled increments
(drift + Brownian + aggregated compound-Poisson).  Killing is resolved per
segment against one exponential clock.

Paths are deterministic functions of (spec, config): all randomness comes
from the stream keyed by (seed, replication).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError
from .model import LevyBlock, MapSpec, StateSet, validate_spec
from .rng import make_rng

__all__ = ["SimConfig", "Segment", "ChainJump", "MapPath", "sample_map_path", "empirical_exponent"]


@dataclass(frozen=True)
class SimConfig:
    """Simulation window, grid step and stream key; (seed, replication) fixes the path."""

    horizon: float
    dt: float
    seed: int
    replication: int = 0

    def __post_init__(self):
        if not self.horizon > 0:
            raise SpecError(f"horizon must be positive, got {self.horizon}")
        if not 0 < self.dt <= self.horizon:
            raise SpecError(f"dt must lie in (0, horizon], got {self.dt}")


@dataclass
class Segment:
    """One constant-state stretch of the pair (J, xi).

    `times[0]` is the segment start (value right-continuous there) and
    `times[-1]` its end carrying the left limit; the transition increment is
    applied at the start of the next segment, so the grid stores both
    one-sided values at each chain jump.
    """

    state: int
    start: float
    times: np.ndarray
    xi: np.ndarray


@dataclass
class ChainJump:
    time: float
    from_state: int
    to_state: int
    increment: np.ndarray


@dataclass
class MapPath:
    """Piecewise record of a modulating chain and its additive part."""

    states: StateSet
    segments: list[Segment]
    chain_jumps: list[ChainJump]
    horizon: float
    killed_at: float | None = None
    _grid_cache: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.states.dim

    def grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated (times, xi, state index) over all segments.

        Chain-jump instants appear twice, once with the left limit and once
        with the right-continuous value; times are otherwise strictly
        increasing.
        """
        if self._grid_cache is None:
            times = np.concatenate([s.times for s in self.segments])
            xi = np.concatenate([s.xi for s in self.segments], axis=0)
            idx = np.concatenate(
                [np.full(s.times.shape[0], s.state, dtype=np.int64) for s in self.segments]
            )
            self._grid_cache = (times, xi, idx)
        return self._grid_cache

    @property
    def end_time(self) -> float:
        return float(self.segments[-1].times[-1])


def _segment_grid(start: float, end: float, dt: float) -> np.ndarray:
    """Grid start, start+dt, ... with the exact end point appended."""
    n_inner = max(0, int(np.floor((end - start) / dt - 1e-12)))
    times = start + dt * np.arange(n_inner + 1)
    if end - times[-1] > 1e-12 * max(1.0, abs(end)):
        times = np.append(times, end)
    else:
        times[-1] = end
    return times


def _segment_increments(block: LevyBlock, dtimes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exact increments of the additive part over consecutive step widths.

    Draw order per segment is fixed (Gaussian, Poisson counts, jump sizes)
    so that paths are reproducible; draws for absent components are skipped
    entirely.
    """
    m = dtimes.shape[0]
    d = block.dim
    inc = block.drift * dtimes[:, None]
    if block.has_noise:
        fac = block.cov_factor()
        z = rng.standard_normal((m, fac.shape[1]))
        inc = inc + np.sqrt(dtimes)[:, None] * (z @ fac.T)
    if block.jump_rate > 0.0:
        counts = rng.poisson(block.jump_rate * dtimes)
        total = int(counts.sum())
        if total:
            sizes = block.jump_law.sample(rng, total)
            jumps = np.zeros((m, d))
            np.add.at(jumps, np.repeat(np.arange(m), counts), sizes)
            inc = inc + jumps
    return inc


def sample_map_path(
    spec: MapSpec,
    cfg: SimConfig,
    start_state: int = 0,
    start_xi=None,
) -> MapPath:
    """Simulate one path of the pair (J, xi) on [0, horizon].

    Raises SpecError when the spec fails validation.  The optional start
    overrides the default start (state 0, xi = 0).
    """
    violations = validate_spec(spec)
    if violations:
        raise SpecError("invalid spec: " + "; ".join(violations))
    rng = make_rng(cfg.seed, cfg.replication)
    return _sample_path_with_rng(spec, cfg.horizon, cfg.dt, rng, start_state, start_xi)


def _sample_path_with_rng(spec, horizon, dt, rng, start_state=0, start_xi=None) -> MapPath:
    d = spec.dim
    xi = np.zeros(d) if start_xi is None else np.asarray(start_xi, dtype=float).copy()
    state = int(start_state)
    t = 0.0
    segments: list[Segment] = []
    jumps: list[ChainJump] = []
    killed_at = None

    while True:
        block = spec.blocks[state]
        q_ii = spec.Q[state, state]
        hold = rng.exponential(1.0 / -q_ii) if q_ii < 0.0 else np.inf
        kill = rng.exponential(1.0 / block.killing_rate) if block.killing_rate > 0.0 else np.inf
        end = min(t + hold, t + kill, horizon)

        times = _segment_grid(t, end, dt)
        inc = _segment_increments(block, np.diff(times), rng)
        values = np.empty((times.shape[0], d))
        values[0] = xi
        np.cumsum(inc, axis=0, out=values[1:])
        values[1:] += xi
        segments.append(Segment(state=state, start=t, times=times, xi=values))
        xi = values[-1].copy()

        if kill < hold and t + kill <= horizon:
            killed_at = end
            break
        if end >= horizon:
            break

        # chain transition at the exact event time
        row = spec.Q[state].copy()
        row[state] = 0.0
        probs = row / -q_ii
        nxt = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        nxt = min(nxt, spec.n - 1)
        delta = spec.jump_law(state, nxt).sample(rng)
        jumps.append(ChainJump(time=end, from_state=state, to_state=nxt, increment=delta))
        xi = xi + delta
        state = nxt
        t = end

    return MapPath(
        states=spec.states,
        segments=segments,
        chain_jumps=jumps,
        horizon=horizon,
        killed_at=killed_at,
    )


def _endpoint_sample(spec, t, rng, start_state=0):
    """Exact draw of (J_t, xi_t, alive) without a step grid.

    Between chain events the additive increment over a window of length h is
    drift*h + N(0, sigma*h) + compound Poisson(rate*h), sampled in one shot;
    the law at the fixed time t is exact for finite-activity blocks.
    """
    d = spec.dim
    xi = np.zeros(d)
    state = int(start_state)
    s = 0.0
    while True:
        block = spec.blocks[state]
        q_ii = spec.Q[state, state]
        hold = rng.exponential(1.0 / -q_ii) if q_ii < 0.0 else np.inf
        kill = rng.exponential(1.0 / block.killing_rate) if block.killing_rate > 0.0 else np.inf
        end = min(s + hold, s + kill, t)
        h = end - s
        if h > 0.0:
            xi = xi + _segment_increments(block, np.array([h]), rng)[0]
        if kill < hold and s + kill <= t:
            return state, xi, False
        if end >= t:
            return state, xi, True
        row = spec.Q[state].copy()
        row[state] = 0.0
        nxt = int(np.searchsorted(np.cumsum(row / -q_ii), rng.random(), side="right"))
        nxt = min(nxt, spec.n - 1)
        xi = xi + spec.jump_law(state, nxt).sample(rng)
        state = nxt
        s = end


def empirical_exponent(spec, u, t, N, seed, with_stderr=False):
    """Monte Carlo estimate of E_i[exp(<u, xi_t>); J_t = j] for all (i, j).

    Rows index the start state.  To be compared entrywise with the matrix
    exponential of t * A(u).  With `with_stderr=True` also returns the
    matrix of Monte Carlo standard errors.
    """
    violations = validate_spec(spec)
    if violations:
        raise SpecError("invalid spec: " + "; ".join(violations))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = spec.n
    est = np.zeros((n, n))
    se = np.zeros((n, n))
    for i in range(n):
        weights = np.zeros((N, n))
        for r in range(N):
            rng = make_rng(seed, r, "empirical-exponent", i)
            if t == 0.0:
                state, xi, alive = i, np.zeros(spec.dim), True
            else:
                state, xi, alive = _endpoint_sample(spec, t, rng, start_state=i)
            if alive:
                weights[r, state] = np.exp(u @ xi)
        est[i] = weights.mean(axis=0)
        se[i] = weights.std(axis=0, ddof=1) / np.sqrt(N)
    if with_stderr:
        return est, se
    return est
