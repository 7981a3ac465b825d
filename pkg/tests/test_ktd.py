import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from mmktd import (InvalidArgumentError, MeasurementRow, NumericDegeneracyError, RbfSet,
                   StateModel, Transition, WeightBelief, build_features, build_measurement,
                   kalman_update, predict, q_value, state_value)
from mmktd.harness import RunConfig


def _row(h, r=0.0):
    return MeasurementRow(np.asarray(h, dtype=float), r, 0)


def test_predict_identity_adds_process_noise():
    b = predict(WeightBelief([1.0, 2.0], np.eye(2)), StateModel(2, q_scale=0.5))
    np.testing.assert_array_equal(b.theta, [1.0, 2.0])
    np.testing.assert_array_equal(b.cov, 1.5 * np.eye(2))


def test_predict_general_transition():
    F = np.array([[2.0, 0.0], [1.0, 1.0]])
    b = predict(WeightBelief([1.0, 1.0], np.eye(2)), StateModel(2, q_scale=0.0, transition=F))
    np.testing.assert_allclose(b.theta, [2.0, 2.0])
    np.testing.assert_allclose(b.cov, F @ F.T)


def test_state_model_collapses_identity():
    assert StateModel(3, transition=np.eye(3)).transition is None
    with pytest.raises(InvalidArgumentError):
        StateModel(2, transition=np.eye(3))


def test_scalar_update_example():
    post, nu, s = kalman_update(WeightBelief([0.0], [[1.0]]), _row([1.0], 1.0), 1.0)
    assert (nu, s) == (1.0, 2.0)
    assert post.theta[0] == pytest.approx(0.5, abs=1e-15)
    assert post.cov[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_zero_row_changes_nothing(rng):
    prior = WeightBelief(rng.normal(size=4), random_spd(rng, 4))
    post, _, _ = kalman_update(prior, _row(np.zeros(4), 3.0), 0.7)
    np.testing.assert_array_equal(post.theta, prior.theta)
    np.testing.assert_allclose(post.cov, prior.cov, atol=1e-15)


@pytest.mark.parametrize("r_var", [1e6, 1e12])
def test_huge_noise_is_nearly_ignored(rng, r_var):
    prior = WeightBelief(rng.normal(size=4), random_spd(rng, 4))
    post, _, _ = kalman_update(prior, _row(rng.normal(size=4), 2.0), r_var)
    tol = 1e-4 if r_var == 1e6 else 1e-10
    np.testing.assert_allclose(post.theta, prior.theta, atol=tol)
    np.testing.assert_allclose(post.cov, prior.cov, atol=tol)


def test_update_rejects_degenerate_inputs():
    b = WeightBelief([0.0], [[1.0]])
    with pytest.raises(InvalidArgumentError):
        kalman_update(b, _row([1.0]), 0.0)
    with pytest.raises(NumericDegeneracyError):
        kalman_update(WeightBelief([0.0], [[-5.0]]), _row([1.0]), 1.0)
    with pytest.raises(NumericDegeneracyError):
        kalman_update(WeightBelief([0.0], [[np.inf]]), _row([1.0]), 1.0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12),
       r_var=st.floats(1e-3, 1e3))
def test_joseph_form_matches_short_form(seed, n, r_var):
    rng = np.random.default_rng(seed)
    P = random_spd(rng, n)
    h = rng.normal(size=n)
    post, _, s = kalman_update(WeightBelief(np.zeros(n), P), _row(h, 1.0), r_var)
    K = P @ h / s
    short = P - np.outer(K, h @ P)
    np.testing.assert_allclose(post.cov, short, atol=1e-8 * max(1.0, np.abs(P).max()))


def test_posterior_variance_not_above_prior_along_row(rng):
    for _ in range(50):
        P = random_spd(rng, 5)
        h = rng.normal(size=5)
        post, _, _ = kalman_update(WeightBelief(np.zeros(5), P), _row(h), 0.3)
        assert h @ post.cov @ h <= h @ P @ h + 1e-12


def test_innovation_contracts(rng):
    prior = WeightBelief(rng.normal(size=3), random_spd(rng, 3))
    row = _row(rng.normal(size=3), 4.0)
    post, nu, _ = kalman_update(prior, row, 0.5)
    assert abs(row.reward - row.h @ post.theta) < abs(nu)


def _tie_free_rbfs():
    return RbfSet.grid([[-0.5, 0.5], [0.0]], 3)


def test_measurement_row_structure():
    rbfs = _tie_free_rbfs()
    theta = np.arange(rbfs.feature_dim, dtype=float)
    b = WeightBelief(theta, np.eye(rbfs.feature_dim))
    s, s2 = np.array([0.1, 0.0]), np.array([0.2, 0.1])
    row = build_measurement(rbfs, b, Transition(s, 0, -1.0, s2), 0.9)
    a_star = int(np.argmax([theta @ build_features(rbfs, s2, a) for a in range(3)]))
    assert row.greedy_next_action == a_star
    expected = build_features(rbfs, s, 0) - 0.9 * build_features(rbfs, s2, a_star)
    np.testing.assert_allclose(row.h, expected, atol=1e-15)
    assert row.reward == -1.0


def test_terminal_and_undiscounted_rows_drop_bootstrap():
    rbfs = _tie_free_rbfs()
    b = WeightBelief.initial(rbfs.feature_dim)
    s, s2 = np.array([0.1, 0.0]), np.array([0.2, 0.1])
    phi = build_features(rbfs, s, 1)
    terminal = build_measurement(rbfs, b, Transition(s, 1, -1.0, s2, True), 0.9)
    np.testing.assert_array_equal(terminal.h, phi)
    no_discount = build_measurement(rbfs, b, Transition(s, 1, -1.0, s2), 0.0)
    np.testing.assert_array_equal(no_discount.h, phi)


def test_greedy_next_action_ties_go_low():
    rbfs = _tie_free_rbfs()
    row = build_measurement(rbfs, WeightBelief.initial(rbfs.feature_dim),
                            Transition(np.zeros(2), 2, 0.0, np.zeros(2)), 0.9)
    assert row.greedy_next_action == 0


def test_argmax_invariant_to_positive_scaling(rng):
    rbfs = RunConfig().make_rbfs(3)
    for _ in range(50):
        theta = rng.normal(size=30)
        s = rng.normal(scale=0.5, size=2)
        c = float(rng.uniform(0.01, 100))
        assert rbfs.greedy(s, theta) == rbfs.greedy(s, c * theta)


def test_q_and_state_value():
    rbfs = RbfSet.grid([[0.0]], 2)
    b = WeightBelief([1.0, 2.0, -1.0, 0.5], np.eye(4))
    assert q_value(rbfs, b, [0.0], 0) == pytest.approx(3.0)
    assert q_value(rbfs, b, [0.0], 1) == pytest.approx(-0.5)
    assert state_value(rbfs, b, [0.0]) == pytest.approx(3.0)
    with pytest.raises(InvalidArgumentError):
        q_value(rbfs, b, [0.0], 2)


def test_measurement_shape_mismatch():
    rbfs = _tie_free_rbfs()
    with pytest.raises(InvalidArgumentError):
        build_measurement(rbfs, WeightBelief.initial(3), Transition(np.zeros(2), 0, 0.0, np.zeros(2)), 0.9)
