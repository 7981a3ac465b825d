"""Inverted pendulum and mountain car with deterministic dynamics.

Randomness enters only through the reset distributions; the step
functions are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError


class StepOutcome(NamedTuple):
    next_state: np.ndarray
    reward: float
    terminal: bool
    truncated: bool = False


@dataclass(frozen=True)
class PendulumConfig:
    dt: float = 0.01
    base_mass: float = 8.0
    pole_mass: float = 2.0
    length: float = 0.5
    force: float = 50.0
    gravity: float = 9.81
    init_std: float = 0.1
    max_steps_train: int = 3000
    max_steps_test: int = 500

    def __post_init__(self):
        if self.dt <= 0 or self.base_mass <= 0 or self.pole_mass <= 0 or self.length <= 0:
            raise InvalidArgumentError("dt, masses and length must be positive")


@dataclass(frozen=True)
class MountainCarConfig:
    # Recorded only; the canonical map is already one decision step.
    dt: float = 0.05
    min_position: float = -1.2
    max_position: float = 0.5
    max_speed: float = 0.07
    goal_position: float = 0.5
    power: float = 0.001
    gravity: float = 0.0025
    init_low: float = -0.6
    init_high: float = -0.4
    max_steps_train: int = 1000
    max_steps_test: int = 200


def pendulum_reset(cfg: PendulumConfig, rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.normal(0.0, cfg.init_std), 0.0])


def pendulum_step(s, a: int, cfg: PendulumConfig) -> StepOutcome:
    """One explicit Euler step of the pole-on-base model.

    Actions 0, 1, 2 push the base with ``-force``, 0 and ``+force``.
    """
    if a not in (0, 1, 2):
        raise InvalidArgumentError(f"pendulum action must be 0, 1 or 2, got {a}")
    theta, omega = float(s[0]), float(s[1])
    u = (a - 1) * cfg.force
    alpha = 1.0 / (cfg.pole_mass + cfg.base_mass)
    m, l = cfg.pole_mass, cfg.length
    sin_t, cos_t = math.sin(theta), math.cos(theta)
    accel = ((cfg.gravity * sin_t - alpha * m * l * omega * omega * math.sin(2.0 * theta) / 2.0
              - alpha * cos_t * u)
             / (4.0 * l / 3.0 - alpha * m * l * cos_t * cos_t))
    theta_next = theta + cfg.dt * omega
    omega_next = omega + cfg.dt * accel
    fallen = abs(theta_next) > math.pi / 2
    return StepOutcome(np.array([theta_next, omega_next]), -1.0 if fallen else 0.0, fallen)


def mountain_car_reset(cfg: MountainCarConfig, rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.uniform(cfg.init_low, cfg.init_high), 0.0])


def mountain_car_step(s, a: int, cfg: MountainCarConfig) -> StepOutcome:
    if a not in (0, 1, 2):
        raise InvalidArgumentError(f"mountain car action must be 0, 1 or 2, got {a}")
    x, v = float(s[0]), float(s[1])
    v = v + cfg.power * (a - 1) - cfg.gravity * math.cos(3.0 * x)
    v = min(max(v, -cfg.max_speed), cfg.max_speed)
    x = min(max(x + v, cfg.min_position), cfg.max_position)
    if x <= cfg.min_position:
        v = 0.0
    done = x >= cfg.goal_position
    return StepOutcome(np.array([x, v]), 0.0 if done else -1.0, done)


@dataclass(frozen=True)
class Environment:
    """Name-addressable bundle of reset/step functions and config."""

    name: str
    config: object
    n_actions: int = 3

    def reset(self, rng):
        return _RESET[self.name](self.config, rng)

    def step(self, s, a):
        return _STEP[self.name](s, a, self.config)

    @property
    def max_steps_train(self) -> int:
        return self.config.max_steps_train

    @property
    def max_steps_test(self) -> int:
        return self.config.max_steps_test

    def test_success(self, steps: int, reached_terminal: bool) -> bool:
        if self.name == "pendulum":
            return not reached_terminal
        return reached_terminal


_RESET = {"pendulum": pendulum_reset, "mountain_car": mountain_car_reset}
_STEP = {"pendulum": pendulum_step, "mountain_car": mountain_car_step}


def make_env(name: str, **overrides) -> Environment:
    if name == "pendulum":
        return Environment(name, PendulumConfig(**overrides))
    if name == "mountain_car":
        return Environment(name, MountainCarConfig(**overrides))
    raise InvalidArgumentError(f"unknown environment {name!r}")
