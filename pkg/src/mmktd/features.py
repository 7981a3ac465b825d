"""Gaussian RBF bases with per-action blocks and restricted gradient descent.

The feature vector for ``(s, a)`` is ``D`` blocks laid end to end. Only the
block of action ``a`` is populated: ``[1, phi_1(s), ..., phi_N(s)]`` when a
bias is used, ``[phi_1(s), ..., phi_N(s)]`` otherwise.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, NumericDegeneracyError
from .types import Transition, WeightBelief


def _check_spd(cov: np.ndarray) -> None:
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
        raise NumericDegeneracyError("RBF covariance is not symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericDegeneracyError("RBF covariance is not positive definite") from exc


@dataclass(frozen=True)
class Rbf:
    """A single Gaussian bump ``exp(-0.5 (s-mu)' Sigma^-1 (s-mu))``."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgumentError(
                f"covariance shape {cov.shape} does not match mean dimension {mean.size}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


def eval_rbf(rbf: Rbf, s) -> float:
    """Evaluate one RBF at state `s`; returns a value in (0, 1]."""
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape != rbf.mean.shape:
        raise InvalidArgumentError(
            f"state dimension {s.size} does not match RBF dimension {rbf.mean.size}")
    _check_spd(rbf.covariance)
    diff = s - rbf.mean
    return float(np.exp(-0.5 * diff @ np.linalg.solve(rbf.covariance, diff)))


class BranchRule(str, enum.Enum):
    LITERAL = "paper_literal"
    SIGNED = "signed_residual"


@dataclass(frozen=True)
class RgdConfig:
    """Step sizes and branch rule for restricted gradient descent.

    With ``paper_literal`` the branch test is ``|delta| * Q > 0`` and the
    update magnitude is ``|delta|``; ``signed_residual`` uses the signed TD
    error ``delta = Q(s, a) - target`` in both places.
    """

    lambda_mu: float
    lambda_sigma: float
    branch_rule: BranchRule = BranchRule.LITERAL

    def __post_init__(self):
        if not (self.lambda_mu > 0 and self.lambda_sigma > 0):
            raise InvalidArgumentError("lambda_mu and lambda_sigma must be positive")
        object.__setattr__(self, "branch_rule", BranchRule(self.branch_rule))


class RbfSet:
    """``N`` RBFs per action for ``D`` actions, stored as stacked arrays.

    Parameters
    ----------
    means : array_like, shape (D, N, d)
    covariances : array_like, shape (D, N, d, d)
    include_bias : bool
        Prepend a constant 1 to every action block.

    Attributes
    ----------
    n_reverted : int
        Covariance updates rejected by :func:`rgd_update` because they lost
        positive-definiteness.
    """

    def __init__(self, means, covariances, include_bias: bool = True):
        means = np.array(means, dtype=float)
        covs = np.array(covariances, dtype=float)
        if means.ndim != 3:
            raise InvalidArgumentError("means must have shape (D, N, d)")
        n_actions, n_rbf, dim = means.shape
        if covs.shape != (n_actions, n_rbf, dim, dim):
            raise InvalidArgumentError(
                f"covariances shape {covs.shape} does not match means {means.shape}")
        for cov in covs.reshape(-1, dim, dim):
            _check_spd(cov)
        self.means = means
        self.covariances = covs
        self.include_bias = bool(include_bias)
        self.n_reverted = 0
        self._refresh_inverse()

    @classmethod
    def grid(cls, axes, n_actions: int, sigma_scale: float = 1.0,
             include_bias: bool = True) -> "RbfSet":
        """Cartesian grid of centres, identical for every action, ``Sigma = scale * I``."""
        centres = np.array(list(itertools.product(*axes)), dtype=float)
        dim = centres.shape[1]
        means = np.broadcast_to(centres, (n_actions,) + centres.shape)
        covs = np.broadcast_to(sigma_scale * np.eye(dim),
                               (n_actions, centres.shape[0], dim, dim))
        return cls(means, covs, include_bias)

    def _refresh_inverse(self) -> None:
        self.inv_covariances = np.linalg.inv(self.covariances)
        d = self.state_dim
        self._flat_means = np.ascontiguousarray(self.means.reshape(-1, d))
        self._flat_inv = np.ascontiguousarray(self.inv_covariances.reshape(-1, d, d))

    @property
    def n_actions(self) -> int:
        return self.means.shape[0]

    @property
    def n_rbf(self) -> int:
        return self.means.shape[1]

    @property
    def state_dim(self) -> int:
        return self.means.shape[2]

    @property
    def block_size(self) -> int:
        return self.n_rbf + int(self.include_bias)

    @property
    def feature_dim(self) -> int:
        return self.block_size * self.n_actions

    def rbf(self, action: int, index: int) -> Rbf:
        return Rbf(self.means[action, index], self.covariances[action, index])

    def copy(self) -> "RbfSet":
        new = RbfSet.__new__(RbfSet)
        new.means = self.means.copy()
        new.covariances = self.covariances.copy()
        new.include_bias = self.include_bias
        new.n_reverted = self.n_reverted
        new.inv_covariances = self.inv_covariances.copy()
        new._flat_means = self._flat_means.copy()
        new._flat_inv = self._flat_inv.copy()
        return new

    def _check_state(self, s) -> np.ndarray:
        s = np.ascontiguousarray(s, dtype=float).reshape(-1)
        if s.size != self.state_dim:
            raise InvalidArgumentError(
                f"state dimension {s.size} does not match RBF dimension {self.state_dim}")
        return s

    def _check_action(self, a) -> int:
        if not 0 <= a < self.n_actions:
            raise InvalidArgumentError(f"action {a} out of range [0, {self.n_actions})")
        return int(a)

    def activations(self, s) -> np.ndarray:
        """RBF values at `s` for every action, shape (D, N)."""
        s = self._check_state(s)
        act = kernels.rbf_activations(s, self._flat_means, self._flat_inv)
        return act.reshape(self.n_actions, self.n_rbf)

    def blocks(self, s) -> np.ndarray:
        """Populated block for every action at `s`, shape (D, block_size)."""
        act = self.activations(s)
        if self.include_bias:
            return np.hstack([np.ones((self.n_actions, 1)), act])
        return act

    def q_values(self, s, theta) -> np.ndarray:
        """``phi(s, a)' theta`` for every action."""
        theta = np.asarray(theta, dtype=float).reshape(self.n_actions, self.block_size)
        return np.einsum("ak,ak->a", self.blocks(s), theta)

    def greedy(self, s, theta) -> int:
        s = self._check_state(s)
        return int(kernels.greedy_action(s, self._flat_means, self._flat_inv,
                                         np.ascontiguousarray(theta, dtype=float),
                                         self.n_actions, self.include_bias))

    def embed(self, block: np.ndarray, a: int) -> np.ndarray:
        """Place one action block into an otherwise zero feature vector."""
        phi = np.zeros(self.feature_dim)
        start = a * self.block_size
        phi[start:start + self.block_size] = block
        return phi

    def to_dict(self) -> dict:
        """Per-action lists of means and row-major covariances."""
        d = self.state_dim
        return {
            "include_bias": self.include_bias,
            "means": self.means.tolist(),
            "covariances": self.covariances.reshape(self.n_actions, self.n_rbf, d * d).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RbfSet":
        means = np.asarray(data["means"], dtype=float)
        d = means.shape[2]
        covs = np.asarray(data["covariances"], dtype=float).reshape(means.shape[:2] + (d, d))
        return cls(means, covs, data.get("include_bias", True))


def build_features(rbfs: RbfSet, s, a: int) -> np.ndarray:
    """Feature vector ``phi(s, a)`` of length ``rbfs.feature_dim``."""
    a = rbfs._check_action(a)
    block = rbfs.blocks(s)[a]
    return rbfs.embed(block, a)


def td_residual(rbfs: RbfSet, theta, t: Transition, gamma: float):
    """Return ``(Q(s, a), delta)`` with ``delta = Q(s, a) - r - gamma max_b Q(s', b)``.

    The bootstrap term is dropped for terminal transitions.
    """
    q = float(rbfs.q_values(t.state, theta)[t.action])
    target = t.reward
    if not t.terminal:
        target += gamma * float(np.max(rbfs.q_values(t.next_state, theta)))
    return q, q - target


def rgd_update(rbfs: RbfSet, cfg: RgdConfig, transition: Transition,
               belief: WeightBelief, gamma: float) -> RbfSet:
    """Adapt the taken-action RBFs by one restricted gradient step.

    Either every covariance of the block moves or every mean does, never
    both. For RBF ``n`` with weight ``theta_n`` the chain-rule factor is
    ``2 * m * theta_n * phi_n`` where ``m`` is ``|delta|`` or ``delta``
    depending on ``cfg.branch_rule``. Covariance steps that break
    positive-definiteness are reverted per RBF and counted in
    ``n_reverted``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise InvalidArgumentError("gamma must lie in [0, 1]")
    if belief.dim != rbfs.feature_dim:
        raise InvalidArgumentError("belief dimension does not match feature dimension")
    a = rbfs._check_action(transition.action)
    theta = belief.theta
    q, delta = td_residual(rbfs, theta, transition, gamma)
    if delta == 0.0:
        return rbfs

    if cfg.branch_rule is BranchRule.LITERAL:
        magnitude = abs(delta)
    else:
        magnitude = delta
    shrink_covariance = magnitude * q > 0

    s = rbfs._check_state(transition.state)
    phi = rbfs.activations(s)[a]
    start = a * rbfs.block_size + int(rbfs.include_bias)
    theta_rbf = theta[start:start + rbfs.n_rbf]
    scale = 2.0 * magnitude * theta_rbf * phi

    new = rbfs.copy()
    diff = s[None, :] - rbfs.means[a]
    grad_dir = np.einsum("nij,nj->ni", rbfs.inv_covariances[a], diff)
    if shrink_covariance:
        step = cfg.lambda_sigma * scale[:, None, None] * np.einsum("ni,nj->nij", grad_dir, grad_dir)
        for n in range(rbfs.n_rbf):
            candidate = rbfs.covariances[a, n] - step[n]
            candidate = 0.5 * (candidate + candidate.T)
            try:
                np.linalg.cholesky(candidate)
            except np.linalg.LinAlgError:
                new.n_reverted += 1
                continue
            new.covariances[a, n] = candidate
    else:
        new.means[a] = rbfs.means[a] - cfg.lambda_mu * scale[:, None] * grad_dir
    new._refresh_inverse()
    return new
