"""Shared process descriptions used across the test suite.

Growth rates quoted in comments are the exact first-order values
(stationary-weighted drifts for pure-drift chains), which the spectral
module must reproduce.
"""

import numpy as np

from lamperti_kit import (
    Gaussian,
    IndependentProduct,
    LevyBlock,
    MapSpec,
    StateSet,
    TwoSidedExponential,
    Zero,
)

TWO_STATE_Q = [[-1.0, 1.0], [1.0, -1.0]]


def two_states():
    return StateSet([(1, 1), (-1, 1)])


def independent_drift_spec(b=(0.5, -0.2), alpha=(1.0, 1.0)):
    """Identical drift-only blocks, no transition jumps: A(u) = psi(u) I + Q."""
    b = np.asarray(b, dtype=float)
    blocks = [LevyBlock(drift=b), LevyBlock(drift=b)]
    return MapSpec(two_states(), TWO_STATE_Q, blocks, alpha=alpha)


def state_dependent_drift_spec(b0=(0.7, -0.2), b1=(0.3, -0.2), alpha=(1.0, 1.0)):
    """Drift depends on the chain state; rate = pi-weighted drift = mean of the two."""
    blocks = [LevyBlock(drift=b0), LevyBlock(drift=b1)]
    return MapSpec(two_states(), TWO_STATE_Q, blocks, alpha=alpha)


def brownian_spec(drift=(0.0, 0.0), var=(1.0, 1.0), alpha=(1.0, 1.0)):
    """Identical Brownian blocks with diagonal covariance."""
    cov = np.diag(var).astype(float)
    blocks = [LevyBlock(drift=drift, covariance=cov), LevyBlock(drift=drift, covariance=cov)]
    return MapSpec(two_states(), TWO_STATE_Q, blocks, alpha=alpha)


def jump_spec(alpha=(1.0, 1.0)):
    """Exercises every randomness source: Brownian part, compound Poisson
    block jumps and transition jumps with a bounded mgf domain."""
    cov = 0.04 * np.eye(2)
    jump = IndependentProduct(
        [TwoSidedExponential(8.0, 8.0, 0.6), TwoSidedExponential(8.0, 8.0, 0.5)]
    )
    blocks = [
        LevyBlock(drift=[0.25, -0.1], covariance=cov, jump_rate=0.5, jump_law=jump),
        LevyBlock(drift=[0.15, -0.1], covariance=cov, jump_rate=0.5, jump_law=jump),
    ]
    jumps = {
        (0, 1): Gaussian([0.05, 0.0], 0.01 * np.eye(2)),
        (1, 0): Gaussian([-0.05, 0.0], 0.01 * np.eye(2)),
    }
    return MapSpec(two_states(), TWO_STATE_Q, blocks, jumps=jumps, alpha=alpha)


def single_state_drift_spec(b, alpha=None):
    """One state, pure drift: the transformed path is fully deterministic."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = b.shape[0]
    states = StateSet([(1,) * d])
    if alpha is None:
        alpha = np.ones(d)
    return MapSpec(states, [[0.0]], [LevyBlock(drift=b)], alpha=alpha)


def killed_spec(lam=0.7, b=(0.5, -0.2), alpha=(1.0, 1.0)):
    blocks = [LevyBlock(drift=b, killing_rate=lam), LevyBlock(drift=b, killing_rate=lam)]
    return MapSpec(two_states(), TWO_STATE_Q, blocks, alpha=alpha)


def zero_spec(alpha=(1.0, 1.0)):
    """Frozen additive part: xi constant; growth rates all exactly zero."""
    blocks = [LevyBlock(drift=[0.0, 0.0]), LevyBlock(drift=[0.0, 0.0])]
    return MapSpec(two_states(), TWO_STATE_Q, blocks, alpha=alpha)


def symmetric_jump_only_spec(alpha=(1.0, 1.0)):
    """No drift, symmetric two-sided exponential block jumps: every growth
    rate vanishes but the path genuinely moves."""
    jump = IndependentProduct(
        [TwoSidedExponential(4.0, 4.0, 0.5), TwoSidedExponential(4.0, 4.0, 0.5)]
    )
    blocks = [
        LevyBlock(drift=[0.0, 0.0], jump_rate=1.0, jump_law=jump),
        LevyBlock(drift=[0.0, 0.0], jump_rate=1.0, jump_law=jump),
    ]
    return MapSpec(two_states(), TWO_STATE_Q, blocks, alpha=alpha)
