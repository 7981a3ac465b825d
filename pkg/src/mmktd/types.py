"""Value objects shared by the filtering, feature and harness modules."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Transition:
    """One observed tuple ``(s, a, r, s', terminal)``."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool = False


@dataclass
class WeightBelief:
    """Gaussian posterior over value-function weights.

    Attributes
    ----------
    theta : ndarray, shape (n,)
        Posterior mean of the weights.
    cov : ndarray, shape (n, n)
        Error covariance of ``theta``.
    """

    theta: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=float).reshape(-1)
        self.cov = np.array(self.cov, dtype=float)
        n = self.theta.shape[0]
        if self.cov.shape != (n, n):
            raise InvalidArgumentError(
                f"cov shape {self.cov.shape} does not match theta length {n}")

    @classmethod
    def initial(cls, dim: int, p0_scale: float = 10.0, theta0=None) -> "WeightBelief":
        theta = np.zeros(dim) if theta0 is None else np.asarray(theta0, dtype=float)
        return cls(theta, p0_scale * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    def copy(self) -> "WeightBelief":
        return WeightBelief(self.theta.copy(), self.cov.copy())
