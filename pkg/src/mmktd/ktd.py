"""Kalman temporal differences for a single measurement-noise variance.

The weights follow ``theta_{k+1} = F theta_k + w_k`` and every transition
gives a scalar measurement ``r_k = h_k' theta_k + v_k`` with
``h_k = phi(s_k, a_k) - gamma * phi(s_{k+1}, a*)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericDegeneracyError
from .features import RbfSet
from .types import Transition, WeightBelief

__all__ = [
    "MeasurementRow",
    "StateModel",
    "WeightBelief",
    "build_measurement",
    "kalman_update",
    "predict",
    "q_value",
    "state_value",
]


@dataclass
class StateModel:
    """Linear weight dynamics ``F`` with process noise ``Q``.

    ``transition=None`` means the identity, which lets :func:`predict`
    skip the matrix products.
    """

    dim: int
    q_scale: float = 1e-3
    discount: float = 0.95
    transition: np.ndarray | None = None
    process_noise: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if not 0.0 <= self.discount <= 1.0:
            raise InvalidArgumentError("discount must lie in [0, 1]")
        if self.process_noise is None:
            if self.q_scale < 0:
                raise InvalidArgumentError("q_scale must be non-negative")
            self.process_noise = self.q_scale * np.eye(self.dim)
        else:
            self.process_noise = np.asarray(self.process_noise, dtype=float)
            if not np.allclose(self.process_noise, self.process_noise.T):
                raise InvalidArgumentError("process noise must be symmetric")
        if self.transition is not None:
            self.transition = np.asarray(self.transition, dtype=float)
            if self.transition.shape != (self.dim, self.dim):
                raise InvalidArgumentError("transition matrix has the wrong shape")
            if np.array_equal(self.transition, np.eye(self.dim)):
                self.transition = None

    @property
    def F(self) -> np.ndarray:
        return np.eye(self.dim) if self.transition is None else self.transition


@dataclass(frozen=True)
class MeasurementRow:
    h: np.ndarray
    reward: float
    greedy_next_action: int


def build_measurement(rbfs: RbfSet, belief: WeightBelief, t: Transition,
                      gamma: float) -> MeasurementRow:
    """Assemble the TD measurement row for transition `t`.

    ``a*`` maximises ``phi(s', a)' theta`` with ties going to the lowest
    index. For a terminal ``s'`` the row is ``phi(s, a)`` alone.
    """
    if belief.dim != rbfs.feature_dim:
        raise InvalidArgumentError("belief dimension does not match feature dimension")
    a = rbfs._check_action(t.action)
    bs = rbfs.block_size
    h = np.zeros(rbfs.feature_dim)
    h[a * bs:(a + 1) * bs] = rbfs.blocks(t.state)[a]
    next_blocks = rbfs.blocks(t.next_state)
    q_next = np.einsum("ak,ak->a", next_blocks, belief.theta.reshape(rbfs.n_actions, bs))
    a_star = int(np.argmax(q_next))
    if not t.terminal and gamma != 0.0:
        h[a_star * bs:(a_star + 1) * bs] -= gamma * next_blocks[a_star]
    return MeasurementRow(h, float(t.reward), a_star)


def predict(belief: WeightBelief, model: StateModel) -> WeightBelief:
    if model.transition is None:
        theta = belief.theta.copy()
        cov = belief.cov + model.process_noise
    else:
        F = model.transition
        theta = F @ belief.theta
        cov = F @ belief.cov @ F.T + model.process_noise
    return WeightBelief(theta, 0.5 * (cov + cov.T))


def kalman_update(belief: WeightBelief, row: MeasurementRow, r_var: float):
    """Joseph-form measurement update for one noise variance.

    Returns
    -------
    belief : WeightBelief
        Posterior weights.
    innovation : float
        ``r - h' theta_prior``.
    innovation_var : float
        ``h' P h + R``.
    """
    if not r_var > 0:
        raise InvalidArgumentError("measurement noise variance must be positive")
    h = row.h
    P = belief.cov
    g = P @ h
    innovation_var = float(h @ g) + r_var
    if not innovation_var > 0 or not np.isfinite(innovation_var):
        raise NumericDegeneracyError(f"innovation variance {innovation_var} is not positive")
    innovation = row.reward - float(h @ belief.theta)
    K = g / innovation_var
    A = np.eye(belief.dim) - np.outer(K, h)
    cov = A @ P @ A.T + r_var * np.outer(K, K)
    theta = belief.theta + K * innovation
    return WeightBelief(theta, 0.5 * (cov + cov.T)), innovation, innovation_var


def q_value(rbfs: RbfSet, belief: WeightBelief, s, a: int) -> float:
    a = rbfs._check_action(a)
    return float(rbfs.q_values(s, belief.theta)[a])


def state_value(rbfs: RbfSet, belief: WeightBelief, s) -> float:
    return float(np.max(rbfs.q_values(s, belief.theta)))
