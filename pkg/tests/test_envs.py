import math

import numpy as np
import pytest

from mmktd import InvalidArgumentError
from mmktd.envs import (MountainCarConfig, PendulumConfig, make_env, mountain_car_reset,
                        mountain_car_step, pendulum_reset, pendulum_step)
from oracles import mountain_car_reference, pendulum_accel


def test_pendulum_upright_rest_is_fixed_point():
    out = pendulum_step(np.zeros(2), 1, PendulumConfig())
    np.testing.assert_array_equal(out.next_state, [0.0, 0.0])
    assert (out.reward, out.terminal) == (0.0, False)


def test_pendulum_euler_step_value():
    out = pendulum_step(np.array([0.1, 0.0]), 1, PendulumConfig())
    assert out.next_state[0] == 0.1
    assert out.next_state[1] == pytest.approx(0.017252581805701352, abs=1e-15)


def test_pendulum_matches_reference_dynamics(rng):
    cfg = PendulumConfig()
    for _ in range(200):
        s = rng.uniform([-1.5, -3], [1.5, 3])
        a = int(rng.integers(3))
        out = pendulum_step(s, a, cfg)
        acc = pendulum_accel(s[0], s[1], (a - 1) * 50.0)
        assert out.next_state[0] == pytest.approx(s[0] + 0.01 * s[1], abs=1e-14)
        assert out.next_state[1] == pytest.approx(s[1] + 0.01 * acc, abs=1e-12)


def test_pendulum_push_direction():
    # pushing the base right tips the pole left
    right = pendulum_step(np.zeros(2), 2, PendulumConfig()).next_state[1]
    left = pendulum_step(np.zeros(2), 0, PendulumConfig()).next_state[1]
    assert right < 0 < left and right == pytest.approx(-left)


def test_pendulum_fall_is_terminal():
    out = pendulum_step(np.array([1.57, 1.0]), 1, PendulumConfig())
    assert out.terminal and out.reward == -1.0


def test_pendulum_reset_distribution():
    rng = np.random.default_rng(0)
    draws = np.array([pendulum_reset(PendulumConfig(), rng) for _ in range(100_000)])
    assert np.all(draws[:, 1] == 0.0)
    assert 0.097 <= draws[:, 0].std() <= 0.103
    assert abs(draws[:, 0].mean()) < 0.002


def test_actions_are_validated():
    with pytest.raises(InvalidArgumentError):
        pendulum_step(np.zeros(2), 3, PendulumConfig())
    with pytest.raises(InvalidArgumentError):
        mountain_car_step(np.zeros(2), -1, MountainCarConfig())
    with pytest.raises(InvalidArgumentError):
        make_env("cartpole")
    with pytest.raises(InvalidArgumentError):
        PendulumConfig(dt=0.0)


def test_mountain_car_step_value():
    out = mountain_car_step(np.array([-0.5, 0.0]), 1, MountainCarConfig())
    assert out.next_state[0] == pytest.approx(-0.5001768430041692, abs=1e-15)
    assert out.reward == -1.0 and not out.terminal


def test_mountain_car_matches_reference_map(rng):
    cfg = MountainCarConfig()
    for _ in range(500):
        s = rng.uniform([-1.2, -0.07], [0.49, 0.07])
        a = int(rng.integers(3))
        out = mountain_car_step(s, a, cfg)
        assert tuple(out.next_state) == pytest.approx(mountain_car_reference(s[0], s[1], a), abs=1e-15)
        assert -1.2 <= out.next_state[0] <= 0.5
        assert abs(out.next_state[1]) <= 0.07


def test_mountain_car_left_wall_and_goal():
    cfg = MountainCarConfig()
    wall = mountain_car_step(np.array([-1.19, -0.05]), 0, cfg)
    np.testing.assert_array_equal(wall.next_state, [-1.2, 0.0])
    goal = mountain_car_step(np.array([0.49, 0.05]), 2, cfg)
    assert goal.terminal and goal.reward == 0.0 and goal.next_state[0] == 0.5


def test_mountain_car_reset_range():
    rng = np.random.default_rng(1)
    draws = np.array([mountain_car_reset(MountainCarConfig(), rng) for _ in range(5000)])
    assert draws[:, 0].min() >= -0.6 and draws[:, 0].max() < -0.4
    assert np.all(draws[:, 1] == 0.0)


def test_mountain_car_constant_push_left_never_reaches_goal():
    env = make_env("mountain_car")
    s = np.array([-0.5, 0.0])
    for _ in range(env.max_steps_test):
        out = env.step(s, 0)
        assert not out.terminal
        s = out.next_state
    assert s[0] < 0.5


def test_environment_success_rules():
    pend, car = make_env("pendulum"), make_env("mountain_car")
    assert pend.test_success(500, False) and not pend.test_success(12, True)
    assert car.test_success(80, True) and not car.test_success(200, False)
    assert (pend.max_steps_train, pend.max_steps_test) == (3000, 500)
    assert (car.max_steps_train, car.max_steps_test) == (1000, 200)
    assert make_env("pendulum", max_steps_test=10).max_steps_test == 10
