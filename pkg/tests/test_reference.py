import numpy as np
import pytest
from scipy.special import ndtr

import corpus
from lamperti_kit import (
    ConfigError,
    SpiderConfig,
    StateSet,
    check_mssmp_path,
    example_chain_scaling,
    example_drift_scaling,
    example_jumping_spider,
)
from lamperti_kit.reference import chain_state_at, sample_chain
from lamperti_kit.rng import make_rng

ZERO_Q = np.zeros((2, 2))
HIT_BY_ONE = 2.0 * (1.0 - ndtr(1.0))  # chance a unit-start Brownian motion hits 0 by t=1


def test_chain_scaling_frozen_chain():
    out = example_chain_scaling(
        [0.5, -2.0], [1.0, 1.0], ZERO_Q, corpus.two_states(), 2.0, 0.01, seed=0
    )
    assert np.allclose(out.values, [0.5, -2.0], atol=0, rtol=0)
    assert out.zeta_censored
    assert check_mssmp_path(out) == []


def test_chain_scaling_unit_start_is_plain_chain():
    states = corpus.two_states()
    out = example_chain_scaling([1.0, 1.0], [1.5, 0.5], corpus.TWO_STATE_Q, states, 3.0, 0.01, seed=7)
    # |x| = 1 makes the time change the identity; rebuild the same chain stream
    jt, idx = sample_chain(states, corpus.TWO_STATE_Q, 3.0 + 1e-12, make_rng(7, 0, "chain-scaling"))
    labels = chain_state_at(jt, idx, out.times)
    assert np.array_equal(out.orthants, labels)
    assert np.allclose(out.values, states.sign_matrix()[labels], atol=0, rtol=0)


def test_chain_scaling_time_dilation():
    # |x|^alpha = 4 with x = (2, 1), alpha = (2, 0): switch rate drops to 1/4
    states = corpus.two_states()
    n_paths, horizon = 400, 4.0
    switches = 0
    for r in range(n_paths):
        out = example_chain_scaling([2.0, 1.0], [2.0, 0.0], corpus.TWO_STATE_Q, states,
                                    horizon, 0.01, seed=40, replication=r)
        switches += int(np.count_nonzero(np.diff(out.orthants)))
    rate = switches / (n_paths * horizon)
    se = np.sqrt(0.25 / (n_paths * horizon))
    assert abs(rate - 0.25) <= 4 * se


def test_drift_scaling_frozen_chain_closed_form():
    out = example_drift_scaling([1.0, 1.0], [1.0, 1.0], ZERO_Q, corpus.two_states(), 2.0, 0.01, seed=0)
    expected = (1.0 + 2.0 * out.times) ** 0.5
    assert np.allclose(out.values, expected[:, None], rtol=1e-12)


def test_drift_scaling_starts_at_x():
    out = example_drift_scaling([0.7, -1.2], [1.0, 1.0], corpus.TWO_STATE_Q, corpus.two_states(),
                                1.0, 0.01, seed=3)
    assert np.allclose(out.values[0], [0.7, -1.2], atol=0, rtol=0)
    assert check_mssmp_path(out) == []


@pytest.mark.parametrize("generator", ["chain", "drift"])
def test_pathwise_scaling_regeneration(generator):
    # same seed, start c*x, time rescaled by c^alpha, space by c: the same path
    states = corpus.two_states()
    alpha = np.array([1.0, 1.0])
    x = np.array([1.0, -1.0])
    c = np.array([2.0, 0.5])
    c_alpha = float(np.prod(c**alpha))
    gen = example_chain_scaling if generator == "chain" else example_drift_scaling
    base = gen(x, alpha, corpus.TWO_STATE_Q, states, 2.0, 0.01, seed=11)
    scaled = gen(c * x, alpha, corpus.TWO_STATE_Q, states, c_alpha * 2.0, c_alpha * 0.01, seed=11)
    assert np.allclose(scaled.times, c_alpha * base.times, rtol=1e-12)
    assert np.allclose(scaled.values, c * base.values, rtol=1e-12)
    assert np.array_equal(scaled.orthants, base.orthants)


def spider_config(**kw):
    args = dict(
        states=corpus.two_states(),
        q=corpus.TWO_STATE_Q,
        alpha=[1.0, 1.0],
        x=[1.0, 1.0],
        dt=1e-3,
        horizon=1.0,
        seed=0,
    )
    args.update(kw)
    return SpiderConfig(**args)


def test_spider_requires_total_weight_two():
    with pytest.raises(ConfigError):
        spider_config(alpha=[2.0, 1.0])


def test_spider_frozen_chain_is_reflected_radius():
    cfg = spider_config(q=ZERO_Q, seed=5)
    out = example_jumping_spider(cfg)
    live = out.alive()
    # with the chain frozen at the all-plus state, X / x is the radius itself
    r0 = out.values[live][:, 0]
    r1 = out.values[live][:, 1]
    assert np.allclose(r0, r1, atol=0, rtol=0)
    assert np.all(r0 > 0)
    assert out.values[0, 0] == 1.0  # radius starts at 1


def test_spider_paths_stay_in_orthants():
    for r in range(20):
        out = example_jumping_spider(spider_config(seed=21, replication=r))
        assert check_mssmp_path(out) == []


def test_spider_scaling_regeneration():
    alpha = np.array([1.0, 1.0])
    x = np.array([1.0, 1.0])
    c = np.array([2.0, 0.5])
    c_alpha = float(np.prod(c**alpha))  # = 1: same internal grid, scaled output
    base = example_jumping_spider(spider_config(seed=9))
    scaled = example_jumping_spider(spider_config(x=c * x, seed=9))
    assert np.allclose(scaled.times, c_alpha * base.times, rtol=1e-12)
    assert np.allclose(scaled.values, c * base.values, rtol=1e-12)
    assert scaled.zeta_censored == base.zeta_censored
    assert scaled.zeta == pytest.approx(c_alpha * base.zeta, rel=1e-12)


def test_spider_absorption_probability():
    # reflection principle: P(first zero <= 1 | R_0 = 1) = 2 (1 - Phi(1))
    n_paths = 1500
    absorbed = 0
    for r in range(n_paths):
        out = example_jumping_spider(spider_config(dt=1e-3, seed=33, replication=r))
        absorbed += int(not out.zeta_censored)
    p_hat = absorbed / n_paths
    se = np.sqrt(HIT_BY_ONE * (1 - HIT_BY_ONE) / n_paths)
    assert abs(p_hat - HIT_BY_ONE) <= 4 * se


def test_spider_absorption_scales_with_start():
    # from x with |x|^alpha = 4 the absorption deadline dilates fourfold
    n_paths = 800
    absorbed = 0
    for r in range(n_paths):
        out = example_jumping_spider(
            spider_config(x=[2.0, 2.0], horizon=4.0, dt=4e-3, seed=51, replication=r)
        )
        absorbed += int(not out.zeta_censored)
    p_hat = absorbed / n_paths
    se = np.sqrt(HIT_BY_ONE * (1 - HIT_BY_ONE) / n_paths)
    assert abs(p_hat - HIT_BY_ONE) <= 4 * se


def test_spider_rejects_bad_start():
    with pytest.raises(ConfigError):
        spider_config(x=[1.0, 0.0])
    # no all-plus state for the chain to start from
    cfg = SpiderConfig(
        states=StateSet([(-1, 1)]),
        q=[[0.0]],
        alpha=[1.0, 1.0],
        x=[1.0, 1.0],
        dt=1e-3,
        horizon=1.0,
        seed=0,
    )
    with pytest.raises(ConfigError):
        example_jumping_spider(cfg)
