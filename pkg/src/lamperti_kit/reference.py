"""Closed-form multi-self-similar path generators used as pipeline oracles.

Three constructions on top of a modulating chain started at the all-plus
state: pure chain modulation with a power time change, deterministic radial
growth with log-time chain modulation, and the "jumping spider": a reflected
Brownian radius with chain-driven orthant switching, absorbed when the
radius hits zero.

Powers of a starting point are taken through coordinate absolute values
(prod |x_i|^alpha_i), the symmetric reading of the scaling relation, so
negative-orthant starts behave the same as their mirror images.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import first_nonpositive, interp_right, trapezoid_cumsum
from .errors import ConfigError
from .lamperti import ABSORBED, MssmpPath
from .model import SignState, StateSet
from .rng import make_rng

__all__ = [
    "SpiderConfig",
    "sample_chain",
    "chain_state_at",
    "example_chain_scaling",
    "example_drift_scaling",
    "example_jumping_spider",
]


def sample_chain(states: StateSet, q, horizon: float, rng, start_index: int = 0):
    """Event times and visited state indices of the chain on [0, horizon].

    Returns (jump_times, indices) with jump_times[0] = 0 and indices[k] the
    state on [jump_times[k], jump_times[k+1]).  Extending the horizon extends
    the draw sequence without changing its prefix.
    """
    q = np.asarray(q, dtype=float)
    times = [0.0]
    idx = [int(start_index)]
    t, state = 0.0, int(start_index)
    while True:
        q_ii = q[state, state]
        if q_ii >= 0.0:
            break
        t = t + rng.exponential(1.0 / -q_ii)
        if t >= horizon:
            break
        row = q[state].copy()
        row[state] = 0.0
        state = int(np.searchsorted(np.cumsum(row / -q_ii), rng.random(), side="right"))
        state = min(state, q.shape[0] - 1)
        times.append(t)
        idx.append(state)
    return np.array(times), np.array(idx, dtype=np.int64)


def chain_state_at(jump_times: np.ndarray, indices: np.ndarray, t_query) -> np.ndarray:
    """Right-continuous state lookup at query times."""
    t_query = np.atleast_1d(np.asarray(t_query, dtype=float))
    k = np.clip(np.searchsorted(jump_times, t_query, side="right") - 1, 0, indices.shape[0] - 1)
    return indices[k]


def _abs_power(x: np.ndarray, expo: np.ndarray) -> float:
    """prod |x_i| ** expo_i."""
    return float(np.prod(np.abs(x) ** expo))


def _start_index(states: StateSet) -> int:
    try:
        return states.index(SignState((1,) * states.dim))
    except KeyError:
        raise ConfigError("chain state set must contain the all-plus state (1, ..., 1)")


def _orthant_states(states: StateSet, x: np.ndarray) -> StateSet:
    """Chain states relabelled by the sign pattern of the start point."""
    sx = SignState(tuple(int(v) for v in np.sign(x)))
    signs = [sx * s for s in states]
    distinct = len(set(signs)) == len(signs)
    return StateSet(signs, require_distinct=distinct)


def _check_start(x: np.ndarray):
    if np.any(x == 0.0):
        raise ConfigError("start point must avoid every axis")


def example_chain_scaling(x, alpha, q, states: StateSet, horizon: float, dt: float,
                          seed: int, replication: int = 0) -> MssmpPath:
    """Pure chain modulation: X_i(t) = x_i * (chain sign i at time t / |x|^alpha).

    Never absorbed; the chain starts at the all-plus state.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    _check_start(x)
    scale = _abs_power(x, alpha)
    rng = make_rng(seed, replication, "chain-scaling")
    jump_times, idx = sample_chain(states, q, horizon / scale + 1e-12, rng, _start_index(states))

    times = np.arange(int(np.floor(horizon / dt)) + 1) * dt
    labels = chain_state_at(jump_times, idx, times / scale)
    values = x * states.sign_matrix()[labels]
    return MssmpPath(
        times=times,
        values=values,
        zeta=horizon,
        zeta_censored=True,
        orthants=labels,
        states=_orthant_states(states, x),
    )


def example_drift_scaling(x, alpha, q, states: StateSet, horizon: float, dt: float,
                          seed: int, replication: int = 0, chain=None) -> MssmpPath:
    """Radial growth R(t) = (1 + abar * t * |x|^-alpha)^(1/abar) with the chain
    read at time log R(t); coordinate i is x_i * R(t) * (chain sign i).

    `chain` optionally injects a pre-sampled (jump_times, indices) pair so the
    construction can be compared pathwise against the time-change pipeline on
    the same chain realisation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    _check_start(x)
    abar = float(alpha.sum())
    if abar <= 0.0:
        raise ConfigError("index must have positive total weight")
    inv_scale = _abs_power(x, -alpha)

    times = np.arange(int(np.floor(horizon / dt)) + 1) * dt
    radius = (1.0 + abar * times * inv_scale) ** (1.0 / abar)
    chain_times = np.log(radius)

    if chain is None:
        rng = make_rng(seed, replication, "drift-scaling")
        jump_times, idx = sample_chain(states, q, chain_times[-1] + 1e-12, rng, _start_index(states))
    else:
        jump_times, idx = chain
    labels = chain_state_at(jump_times, idx, chain_times)
    values = (x * states.sign_matrix()[labels]) * radius[:, None]
    return MssmpPath(
        times=times,
        values=values,
        zeta=horizon,
        zeta_censored=True,
        orthants=labels,
        states=_orthant_states(states, x),
    )


@dataclass(frozen=True)
class SpiderConfig:
    """Spider run description; the index must satisfy sum(alpha) == 2."""

    states: StateSet
    q: np.ndarray = field(repr=False)
    alpha: np.ndarray
    x: np.ndarray
    dt: float
    horizon: float
    seed: int
    replication: int = 0

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        abar = float(self.alpha.sum())
        if abs(abar - 2.0) > 1e-12:
            raise ConfigError(f"jumping spider requires sum(alpha) = 2, got {abar:.6g}")
        if self.dt <= 0 or self.horizon <= 0:
            raise ConfigError("dt and horizon must be positive")
        _check_start(self.x)


def example_jumping_spider(cfg: SpiderConfig) -> MssmpPath:
    """Reflected-Brownian radius with chain-driven orthant jumps.

    The radius is |W| for a Brownian motion W started at 1; absorption is the
    first grid step where W becomes nonpositive (the signed motion is used so
    coarse grids cannot miss a crossing of the reflected one).  The chain runs
    on the additive functional of R^-2, whose integrand is capped at 1/dt
    because it diverges logarithmically at the zero of R.
    """
    rng = make_rng(cfg.seed, cfg.replication, "spider")
    scale = _abs_power(cfg.x, cfg.alpha)
    s_end = cfg.horizon / scale
    m = int(np.ceil(s_end / cfg.dt))
    s_times = np.minimum(np.arange(m + 1) * cfg.dt, s_end)
    s_times[-1] = s_end

    steps = np.diff(s_times)
    w = np.empty(m + 1)
    w[0] = 1.0
    np.cumsum(np.sqrt(steps) * rng.standard_normal(m), out=w[1:])
    w[1:] += 1.0

    hit = first_nonpositive(w)
    last = hit if hit >= 0 else m + 1
    radius = np.abs(w[:last])
    s_live = s_times[:last]

    integrand = np.minimum(radius ** -2.0, 1.0 / cfg.dt)
    functional = trapezoid_cumsum(s_live, integrand)
    chain_rng = make_rng(cfg.seed, cfg.replication, "spider-chain")
    jump_times, idx = sample_chain(
        cfg.states, cfg.q, float(functional[-1]) + 1e-12, chain_rng, _start_index(cfg.states)
    )
    labels = chain_state_at(jump_times, idx, functional)
    values = (cfg.x * cfg.states.sign_matrix()[labels]) * radius[:, None]

    times = scale * s_live
    if hit >= 0:
        zeta = scale * float(s_times[hit])
        times = np.append(times, zeta)
        values = np.vstack([values, np.zeros(cfg.x.shape[0])])
        labels = np.append(labels, ABSORBED)
        censored = False
    else:
        zeta = cfg.horizon
        censored = True
    return MssmpPath(
        times=times,
        values=values,
        zeta=zeta,
        zeta_censored=censored,
        orthants=labels,
        states=_orthant_states(cfg.states, cfg.x),
    )
