import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import corpus
from lamperti_kit import (
    DomainError,
    GridError,
    Partition,
    PartitionError,
    SignState,
    SimConfig,
    agglomerate_map_path,
    agglomerate_spec,
    check_mssmp_path,
    forward_transform,
    forward_value_at,
    inverse_transform,
    phi,
    phi_inverse,
    project_path,
    sample_map_path,
    spec_to_dict,
)
from lamperti_kit._kernels import interp_right, trapezoid_cumsum
from lamperti_kit.pathio import read_mssmp_path, write_mssmp_path
from lamperti_kit.reference import example_drift_scaling


def unit_drift_spec():
    import lamperti_kit as lk

    blocks = [lk.LevyBlock(drift=[1.0, 1.0]), lk.LevyBlock(drift=[1.0, 1.0])]
    return lk.MapSpec(corpus.two_states(), corpus.TWO_STATE_Q, blocks, alpha=[1.0, 1.0])


def chain_of(path):
    """(jump_times, state_indices) realisation extracted from a sampled path."""
    times = np.concatenate([[0.0], [j.time for j in path.chain_jumps]])
    idx = np.concatenate([[path.segments[0].state], [j.to_state for j in path.chain_jumps]])
    return times, idx.astype(np.int64)


# ---------------------------------------------------------------------------
# state maps
# ---------------------------------------------------------------------------


def test_phi_examples():
    assert np.allclose(phi(SignState((1, -1)), [0.0, 0.0]), [1.0, -1.0])
    assert np.allclose(phi(SignState((-1, 1)), [1.0, 2.0]), [-np.e, np.e**2])


def test_phi_inverse_examples():
    y, z = phi_inverse([1.0, 1.0, 1.0])
    assert y.signs == (1, 1, 1) and np.allclose(z, 0.0)
    y, z = phi_inverse([-np.e, np.e**2])
    assert y.signs == (-1, 1) and np.allclose(z, [1.0, 2.0])
    with pytest.raises(DomainError):
        phi_inverse([1.0, 0.0])


def test_phi_bijection_fixed_point():
    x = np.array([0.3, -7.2])
    y, z = phi_inverse(x)
    assert np.allclose(phi(y, z), x, rtol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=5))
def test_phi_bijection_property(z):
    z = np.asarray(z)
    d = z.shape[0]
    for signs in [(1,) * d, tuple(-1 if i % 2 else 1 for i in range(d))]:
        y = SignState(signs)
        y2, z2 = phi_inverse(phi(y, z))
        assert y2 == y
        assert np.allclose(z2, z, atol=1e-12)


# ---------------------------------------------------------------------------
# forward transform
# ---------------------------------------------------------------------------


def test_forward_matches_closed_form_radial_growth():
    # unit-drift pair on the same chain realisation as the closed form
    spec = unit_drift_spec()
    path = sample_map_path(spec, SimConfig(horizon=1.3, dt=1e-4, seed=42))
    ref = example_drift_scaling(
        [1.0, 1.0], [1.0, 1.0], spec.Q, spec.states, 5.0, 1e-3, 0, chain=chain_of(path)
    )
    vals, labels, ok = forward_value_at(path, spec.alpha, ref.times)
    assert ok.all()
    rel = np.abs(vals - ref.values) / np.abs(ref.values)
    assert rel.max() <= 1e-6
    assert np.array_equal(labels, ref.orthants)


def test_forward_constant_path():
    spec = corpus.single_state_drift_spec([0.0, 0.0])
    path = sample_map_path(spec, SimConfig(horizon=2.0, dt=0.01, seed=0), start_xi=[0.5, -0.3])
    x = phi(SignState((1, 1)), [0.5, -0.3])
    out = forward_transform(path, spec.alpha)
    assert np.allclose(out.values, x, atol=1e-12)
    assert out.zeta_censored


def test_forward_negative_rate_censors_at_total_mass():
    # <alpha, b> = -1 from x = 1: the clock integral tends to 1
    spec = corpus.single_state_drift_spec([-1.0], alpha=[1.0])
    path = sample_map_path(spec, SimConfig(horizon=20.0, dt=1e-3, seed=0))
    out = forward_transform(path, spec.alpha)
    assert out.zeta_censored  # a finite window can never prove absorption
    assert out.zeta == pytest.approx(1.0 - np.exp(-20.0), abs=1e-6)
    assert out.zeta == pytest.approx(1.0, abs=1e-6)


def test_forward_killed_path_absorbs_exactly():
    spec = corpus.killed_spec(lam=2.0)
    for r in range(30):
        path = sample_map_path(spec, SimConfig(horizon=4.0, dt=0.01, seed=17, replication=r))
        out = forward_transform(path, spec.alpha)
        assert check_mssmp_path(out) == []
        if path.killed_at is not None:
            assert not out.zeta_censored
            s, xi, _ = path.grid()
            total = trapezoid_cumsum(s, np.exp(xi @ spec.alpha))[-1]
            assert out.zeta == pytest.approx(total, rel=1e-12)
            assert np.all(out.values[-1] == 0.0)


def test_forward_orthant_preservation():
    spec = corpus.jump_spec()
    path = sample_map_path(spec, SimConfig(horizon=3.0, dt=0.01, seed=5))
    out = forward_transform(path, spec.alpha)
    assert check_mssmp_path(out) == []
    signs = spec.states.sign_matrix()
    live = out.alive()
    assert np.array_equal(np.sign(out.values[live]), signs[out.orthants[live]])


def test_forward_monotone_inversion_bounds():
    spec = corpus.brownian_spec(drift=(0.1, 0.0), var=(0.3, 0.3))
    path = sample_map_path(spec, SimConfig(horizon=2.0, dt=0.005, seed=9))
    s, xi, _ = path.grid()
    xbar = xi @ spec.alpha
    big_f = trapezoid_cumsum(s, np.exp(xbar))
    out = forward_transform(path, spec.alpha)
    tau = interp_right(out.times[out.alive()], big_f, s)
    assert np.all(np.diff(tau) >= 0)
    f_at_tau = interp_right(tau, s, big_f)
    t_out = out.times[out.alive()]
    slack = 0.005 * np.exp(xbar.max())
    assert np.all(f_at_tau >= t_out - 1e-9)
    assert np.all(f_at_tau <= t_out + slack + 1e-9)


def test_forward_grid_error():
    spec = corpus.single_state_drift_spec([1.0])
    path = sample_map_path(spec, SimConfig(horizon=1.0, dt=0.5, seed=0))
    path.segments[0].times = path.segments[0].times[:1]
    path.segments[0].xi = path.segments[0].xi[:1]
    path._grid_cache = None
    with pytest.raises(GridError):
        forward_transform(path, spec.alpha)


# ---------------------------------------------------------------------------
# inverse transform and round trips
# ---------------------------------------------------------------------------


def roundtrip_sup_error(spec, dt, seed=3, horizon=2.0):
    path = sample_map_path(spec, SimConfig(horizon=horizon, dt=dt, seed=seed))
    out = forward_transform(path, spec.alpha)
    back = inverse_transform(out, spec.alpha)
    t0, xi0, _ = path.grid()
    t1, xi1, _ = back.grid()
    err = 0.0
    for k in range(spec.dim):
        err = max(err, np.abs(interp_right(t1, t0, xi0[:, k]) - xi1[:, k]).max())
    return err


@pytest.mark.parametrize("dt", [1e-3, 1e-4])
def test_round_trip_drift_corpus(dt):
    for spec in (corpus.independent_drift_spec(), corpus.state_dependent_drift_spec()):
        assert roundtrip_sup_error(spec, dt) <= 5.0 * dt


def test_round_trip_order_of_convergence():
    spec = corpus.independent_drift_spec()
    e3 = roundtrip_sup_error(spec, 1e-3)
    e4 = roundtrip_sup_error(spec, 1e-4)
    assert e4 < e3
    assert e3 / max(e4, 1e-15) >= 10.0  # at least first order in dt


def test_inverse_constant_path():
    spec = corpus.single_state_drift_spec([0.0, 0.0])
    path = sample_map_path(spec, SimConfig(horizon=1.0, dt=0.01, seed=0), start_xi=[0.7, 0.2])
    back = inverse_transform(forward_transform(path, spec.alpha), spec.alpha)
    _, xi, idx = back.grid()
    assert np.allclose(xi, [0.7, 0.2], atol=1e-12)
    assert np.all(idx == 0)


def test_inverse_of_closed_form_recovers_linear_growth():
    # radial-growth path with unit drift: recovered <alpha, xi>(t) = abar * t
    spec = unit_drift_spec()
    ref = example_drift_scaling([1.0, 1.0], [1.0, 1.0], spec.Q, spec.states, 5.0, 1e-4, seed=12)
    back = inverse_transform(ref, [1.0, 1.0])
    t, xi, _ = back.grid()
    xbar = xi @ np.array([1.0, 1.0])
    assert np.abs(xbar - 2.0 * t).max() <= 1e-4


def test_inverse_rejects_zero_coordinates():
    spec = corpus.single_state_drift_spec([1.0, 1.0])
    path = sample_map_path(spec, SimConfig(horizon=1.0, dt=0.1, seed=0))
    out = forward_transform(path, spec.alpha)
    out.values[3, 1] = 0.0
    with pytest.raises(DomainError):
        inverse_transform(out, spec.alpha)


# ---------------------------------------------------------------------------
# deterministic multi-scaling identity
# ---------------------------------------------------------------------------


def test_pathwise_scaling_identity_single_state_drift():
    spec = corpus.single_state_drift_spec([0.6, -0.4], alpha=[1.0, 2.0])
    x = np.array([0.8, 1.3])
    c = np.array([2.0, 0.5])
    c_alpha = float(np.prod(c**spec.alpha))
    y, z = phi_inverse(x)
    yc, zc = phi_inverse(c * x)

    base = sample_map_path(spec, SimConfig(horizon=6.0, dt=1e-3, seed=0), start_xi=z)
    scaled = sample_map_path(spec, SimConfig(horizon=6.0, dt=1e-3, seed=0), start_xi=zc)
    t = np.linspace(0.0, 0.5, 101)
    v_base, _, ok1 = forward_value_at(base, spec.alpha, t)
    v_scaled, _, ok2 = forward_value_at(scaled, spec.alpha, c_alpha * t)
    assert ok1.all() and ok2.all()
    assert np.abs(v_scaled - c * v_base).max() <= 1e-9


# ---------------------------------------------------------------------------
# agglomeration
# ---------------------------------------------------------------------------


def test_partition_validation():
    with pytest.raises(PartitionError):
        Partition.of((0, 1), (1, 2))
    with pytest.raises(PartitionError):
        Partition.of((0, 2))
    p = Partition.of((0, 1), (2,))
    assert p.d_prime == 2 and p.dim == 3


def test_agglomerate_identity_partition():
    spec = corpus.jump_spec()
    out = agglomerate_spec(spec, Partition.identity(2))
    assert spec_to_dict(out) == spec_to_dict(spec)


def test_agglomerate_drift_example():
    spec = corpus.independent_drift_spec(b=(0.5, -0.2), alpha=(1.0, 1.0))
    out = agglomerate_spec(spec, Partition.of((0, 1)))
    assert out.dim == 1
    assert np.allclose(out.blocks[0].drift, [0.3])
    assert np.allclose(out.alpha, [1.0])
    assert [s.signs for s in out.states] == [(1,), (-1,)]
    assert np.array_equal(out.Q, spec.Q)


def test_agglomerate_inadmissible_alpha():
    spec = corpus.independent_drift_spec(alpha=(1.0, 2.0))
    with pytest.raises(PartitionError):
        agglomerate_spec(spec, Partition.of((0, 1)))


def test_project_path_identity_and_product():
    spec = corpus.jump_spec()
    path = sample_map_path(spec, SimConfig(horizon=1.0, dt=0.01, seed=2))
    out = forward_transform(path, spec.alpha)
    same = project_path(out, Partition.identity(2))
    assert np.allclose(same.values, out.values, atol=0, rtol=0)
    prod = project_path(out, Partition.of((0, 1)))
    assert np.allclose(prod.values[:, 0], out.values[:, 0] * out.values[:, 1], rtol=1e-15)


def test_project_path_fixed_point_value():
    row = np.array([[2.0, -3.0]])
    import lamperti_kit as lk

    path = lk.MssmpPath(
        times=np.array([0.0]),
        values=row,
        zeta=1.0,
        zeta_censored=True,
        orthants=np.array([0]),
        states=lk.StateSet([(1, -1)]),
    )
    out = project_path(path, Partition.of((0, 1)))
    assert out.values[0, 0] == -6.0


def test_agglomeration_commutes_pathwise():
    spec = corpus.jump_spec()
    part = Partition.of((0, 1))
    alpha_new = part.check_alpha(spec.alpha)
    for r in range(10):
        path = sample_map_path(spec, SimConfig(horizon=2.0, dt=0.002, seed=33, replication=r))
        projected = project_path(forward_transform(path, spec.alpha), part)
        direct = forward_transform(agglomerate_map_path(path, part), alpha_new)
        live = projected.alive()
        dev = np.abs(projected.values[live] - direct.value_at(projected.times[live])).max()
        assert dev <= 1e-9


def test_agglomerated_states_may_collapse():
    import lamperti_kit as lk

    states = lk.StateSet([(1, 1), (-1, -1)])
    spec = lk.MapSpec(
        states, corpus.TWO_STATE_Q, [lk.LevyBlock([0.1, 0.1]), lk.LevyBlock([0.1, 0.1])],
        alpha=[1.0, 1.0],
    )
    out = agglomerate_spec(spec, Partition.of((0, 1)))
    assert [s.signs for s in out.states] == [(1,), (1,)]  # labels collapse, chain keeps 2 states
    assert out.n == 2


# ---------------------------------------------------------------------------
# path persistence
# ---------------------------------------------------------------------------


def test_mssmp_csv_round_trip(tmp_path):
    spec = corpus.killed_spec(lam=1.5)
    path = sample_map_path(spec, SimConfig(horizon=3.0, dt=0.01, seed=8, replication=3))
    out = forward_transform(path, spec.alpha)
    write_mssmp_path(out, tmp_path / "x.csv")
    again = read_mssmp_path(tmp_path / "x.csv")
    assert np.allclose(again.times, out.times, atol=0, rtol=0)
    assert np.allclose(again.values, out.values, atol=0, rtol=0)
    assert np.array_equal(again.orthants, out.orthants)
    assert again.zeta == out.zeta and again.zeta_censored == out.zeta_censored
