"""Behaviour and target policies.

The information-seeking behaviour policy ranks actions by ``h' h``, the
trace of the information a measurement row would add to the weights.
The row needs ``s'`` which does not exist before acting, so candidates
are scored with the bootstrap term taken at the current state.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import InvalidArgumentError
from .features import RbfSet
from .types import WeightBelief


class PolicyKind(str, enum.Enum):
    ACTIVE_INFO = "active_info"
    GREEDY = "greedy"
    UNIFORM_RANDOM = "uniform_random"


def candidate_rows(rbfs: RbfSet, belief: WeightBelief, s, gamma: float) -> np.ndarray:
    """``h(s, a) = phi(s, a) - gamma * phi(s, a*)`` for every action, shape (D, n)."""
    blocks = rbfs.blocks(s)
    bs = rbfs.block_size
    q = np.einsum("ak,ak->a", blocks, belief.theta.reshape(rbfs.n_actions, bs))
    a_star = int(np.argmax(q))
    rows = np.zeros((rbfs.n_actions, rbfs.feature_dim))
    for a in range(rbfs.n_actions):
        rows[a, a * bs:(a + 1) * bs] = blocks[a]
        rows[a, a_star * bs:(a_star + 1) * bs] -= gamma * blocks[a_star]
    return rows


def active_action(rbfs: RbfSet, belief: WeightBelief, s, gamma: float,
                  actions: int | None = None, rng: np.random.Generator | None = None) -> int:
    """Action whose candidate row has the largest ``h' h``.

    Scores are formed from the block norms so that actions with equal
    blocks tie exactly instead of by rounding. Ties go to the lowest
    index, or to a uniform draw from `rng` when one is given.
    """
    if actions is not None and actions != rbfs.n_actions:
        raise InvalidArgumentError("action count does not match the RBF set")
    blocks = rbfs.blocks(s)
    q = np.einsum("ak,ak->a", blocks, belief.theta.reshape(rbfs.n_actions, rbfs.block_size))
    a_star = int(np.argmax(q))
    sq = np.einsum("ak,ak->a", blocks, blocks)
    scores = sq + gamma * gamma * sq[a_star]
    scores[a_star] = (1.0 - gamma) ** 2 * sq[a_star]
    if rng is None:
        return int(np.argmax(scores))
    best = np.flatnonzero(scores == scores.max())
    return int(best[0] if best.size == 1 else rng.choice(best))


def greedy_action(rbfs: RbfSet, belief: WeightBelief, s, actions: int | None = None) -> int:
    if actions is not None and actions != rbfs.n_actions:
        raise InvalidArgumentError("action count does not match the RBF set")
    return rbfs.greedy(s, belief.theta)


def information_gain(row_h, r_var: float) -> float:
    """Trace of ``h R^-1 h'`` for a scalar noise variance."""
    if not r_var > 0:
        raise InvalidArgumentError("r_var must be positive")
    h = np.asarray(row_h, dtype=float)
    return float(h @ h) / r_var


class UniformRandomPolicy:
    """Seeded uniform choice over ``n_actions``."""

    def __init__(self, n_actions: int, seed: int):
        self.n_actions = n_actions
        self.rng = np.random.default_rng(seed)

    def __call__(self, *_args) -> int:
        return int(self.rng.integers(self.n_actions))
