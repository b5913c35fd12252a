import json

import numpy as np
import pytest

import corpus
from lamperti_kit import (
    ConditionError,
    ReducibleError,
    chi_derivative,
    classify,
    directional_exponent,
    leading_eigenvalue,
    stationary_distribution,
)
from lamperti_kit.spectral import (
    LIFETIME_FINITE,
    LIFETIME_INFINITE,
    LIMIT_UNDETERMINED,
    LIMIT_ZERO,
    _STENCIL,
)


def test_leading_eigenvalue_of_intensity_matrix():
    chi, right, left = leading_eigenvalue(np.array(corpus.TWO_STATE_Q))
    assert chi == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(right, [0.5, 0.5], atol=1e-12)
    assert left @ right == pytest.approx(1.0, rel=1e-12)


def test_leading_eigenvalue_quadratic_oracle():
    # 2x2 quadratic formula: (a+d)/2 + sqrt(((a-d)/2)^2 + bc)
    m = np.array([[-0.9, 1.0], [1.0, -1.1]])
    expected = -1.0 + np.sqrt(1.01)
    chi, right, left = leading_eigenvalue(m)
    assert chi == pytest.approx(expected, abs=1e-12)
    assert np.all(right > 0) and np.all(left > 0)
    assert np.allclose(m @ right, chi * right, atol=1e-10)
    assert np.allclose(left @ m, chi * left, atol=1e-10)


def test_leading_eigenvalue_reducible():
    with pytest.raises(ReducibleError):
        leading_eigenvalue(np.diag([2.0, 3.0]))


def test_leading_eigenvalue_rejects_non_metzler():
    with pytest.raises(ValueError):
        leading_eigenvalue(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_leading_eigenvalue_dominates_spectrum():
    for spec in (corpus.jump_spec(), corpus.state_dependent_drift_spec()):
        for u in (0.3, -0.3, 0.8):
            m = directional_exponent(spec, spec.alpha, u).require_valid()
            chi, _, _ = leading_eigenvalue(m)
            assert np.max(np.linalg.eigvals(m).real) <= chi + 1e-9


def test_stationary_distribution_examples():
    assert np.allclose(stationary_distribution(corpus.TWO_STATE_Q), [0.5, 0.5], atol=1e-12)
    assert np.allclose(
        stationary_distribution([[-2.0, 2.0], [1.0, -1.0]]), [1 / 3, 2 / 3], atol=1e-12
    )
    assert np.allclose(stationary_distribution([[0.0]]), [1.0])


def test_chi_derivative_independent_coupling():
    # commuting decomposition A(u) = psi(u) I + Q makes chi(u) = psi(u):
    # the derivative along any direction v is exactly <v, b>
    spec = corpus.independent_drift_spec(b=(0.5, -0.2), alpha=(1.0, 1.0))
    assert chi_derivative(spec, [1.0, 1.0]) == pytest.approx(0.3, abs=1e-6)
    assert chi_derivative(spec, [1.0, 0.0]) == pytest.approx(0.5, abs=1e-6)
    assert chi_derivative(spec, [0.0, 1.0]) == pytest.approx(-0.2, abs=1e-6)


def test_chi_derivative_state_dependent_drift():
    # stationary-weighted drift: pi = (1/2, 1/2) gives (0.5 + 0.1) / 2 = 0.3
    spec = corpus.state_dependent_drift_spec(b0=(0.7, -0.2), b1=(0.3, -0.2))
    assert chi_derivative(spec, [1.0, 1.0]) == pytest.approx(0.3, abs=1e-6)


def test_chi_derivative_symmetric_spec_vanishes():
    spec = corpus.symmetric_jump_only_spec()
    assert abs(chi_derivative(spec, [1.0, 1.0])) <= 1e-8
    assert abs(chi_derivative(spec, [1.0, 0.0])) <= 1e-8


def test_chi_derivative_reducible_chain():
    spec = corpus.independent_drift_spec()
    spec.Q = np.zeros((2, 2))
    with pytest.raises(ReducibleError):
        chi_derivative(spec, [1.0, 1.0])


def test_classify_positive_rate():
    report = classify(corpus.independent_drift_spec(b=(0.5, -0.2)))
    assert report.kappa_alpha == pytest.approx(0.3, abs=1e-6)
    assert report.lifetime == LIFETIME_INFINITE
    assert report.limit == LIMIT_ZERO  # chi'_1(0) = 0.5 is decisively nonzero
    assert report.conditions_ok


def test_classify_negative_rate():
    report = classify(corpus.independent_drift_spec(b=(-0.5, 0.2)))
    assert report.kappa_alpha == pytest.approx(-0.3, abs=1e-6)
    assert report.lifetime == LIFETIME_FINITE
    assert report.limit == LIMIT_ZERO


def test_classify_critical_case_undetermined():
    report = classify(corpus.symmetric_jump_only_spec())
    assert abs(report.kappa_alpha) <= 1e-7
    assert report.lifetime == LIFETIME_INFINITE  # rate zero still diverges the clock
    assert report.limit == LIMIT_UNDETERMINED
    assert any("near-critical" in w for w in report.warnings)


def test_classify_condition_failures():
    with pytest.raises(ConditionError) as exc:
        classify(corpus.killed_spec())
    assert any("a_no_killing" in f for f in exc.value.failed)

    spec = corpus.independent_drift_spec()
    spec.Q = np.zeros((2, 2))
    with pytest.raises(ConditionError) as exc:
        classify(spec)
    assert any("b_irreducible" in f for f in exc.value.failed)


def test_classify_report_mode_carries_flags():
    report = classify(corpus.killed_spec(), on_condition_failure="report")
    assert report.lifetime is None and report.limit is None
    assert report.conditions["a_no_killing"] is False
    assert report.kappa_alpha is None


def test_classify_report_serialises():
    report = classify(corpus.jump_spec())
    doc = json.loads(report.to_json())
    assert doc["lifetime"] in (LIFETIME_FINITE, LIFETIME_INFINITE)
    assert "weighted_exponent_eigenvalues" in doc["diagnostics"]
    assert doc["conditions"] == {"a_no_killing": True, "b_irreducible": True, "c_mgf_domains": True}


def test_convexity_along_weighted_direction():
    for spec in (corpus.jump_spec(), corpus.state_dependent_drift_spec()):
        us = np.linspace(-0.6, 0.6, 13)
        chis = []
        for u in us:
            m = directional_exponent(spec, spec.alpha, u).require_valid()
            chis.append(leading_eigenvalue(m)[0])
        chis = np.array(chis)
        # midpoint test on the uniform grid
        assert np.all(chis[1:-1] <= 0.5 * (chis[:-2] + chis[2:]) + 1e-9)


def test_finite_difference_order():
    spec = corpus.jump_spec()  # analytic, genuinely curved exponent
    h = 0.02
    k1 = chi_derivative(spec, spec.alpha, h)
    k2 = chi_derivative(spec, spec.alpha, h / 2)
    k3 = chi_derivative(spec, spec.alpha, h / 4)
    d1, d2 = abs(k1 - k2), abs(k2 - k3)
    assert d1 < 1e-5
    if d2 > 1e-13:  # above the rounding floor, the step halving shows the order
        assert np.log2(d1 / d2) >= 3.0


def test_weighted_direction_matches_manual_stencil():
    spec = corpus.jump_spec()
    h = 1e-3 / (1.0 + max(abs(b.drift).max() for b in spec.blocks))
    manual = []
    for sign in (+1.0, -1.0):
        chis = [
            leading_eigenvalue(directional_exponent(spec, spec.alpha, sign * k * h).require_valid())[0]
            for k in range(5)
        ]
        manual.append(sign * float(_STENCIL @ np.array(chis)) / h)
    assert chi_derivative(spec, spec.alpha) == pytest.approx(np.mean(manual), abs=1e-9)


def test_single_state_classification():
    spec = corpus.single_state_drift_spec([-1.0], alpha=[1.0])
    report = classify(spec)
    assert report.kappa_alpha == pytest.approx(-1.0, abs=1e-8)
    assert report.lifetime == LIFETIME_FINITE
