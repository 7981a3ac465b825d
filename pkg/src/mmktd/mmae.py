"""Bank of mode-matched Kalman filters over candidate noise variances.

Every mode shares the single predicted belief; the modes differ only in
the measurement-noise variance ``R_i`` they assume. Mode posteriors are
weighted by their innovation likelihood and fused by moment matching.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, NumericDegeneracyError
from .ktd import MeasurementRow, StateModel, kalman_update, predict
from .types import WeightBelief

UNDERFLOW_FLOOR = 1e-300


class WeightingMode(str, enum.Enum):
    MEMORYLESS = "memoryless"
    RECURSIVE = "recursive"


class LikelihoodForm(str, enum.Enum):
    EXPONENT_ONLY = "exponent_only"
    FULL_GAUSSIAN = "full_gaussian"


@dataclass
class FilterBank:
    r_candidates: np.ndarray
    weights: np.ndarray | None = None
    weighting_mode: WeightingMode = WeightingMode.MEMORYLESS
    likelihood_form: LikelihoodForm = LikelihoodForm.EXPONENT_ONLY
    last_innovation: float = field(default=0.0, repr=False)

    def __post_init__(self):
        self.r_candidates = np.array(self.r_candidates, dtype=float).reshape(-1)
        if self.r_candidates.size < 1:
            raise InvalidArgumentError("filter bank needs at least one mode")
        if np.any(self.r_candidates <= 0):
            raise InvalidArgumentError("noise candidates must be positive")
        m = self.r_candidates.size
        if self.weights is None:
            self.weights = np.full(m, 1.0 / m)
        else:
            self.weights = np.array(self.weights, dtype=float).reshape(-1)
            if self.weights.shape != (m,):
                raise InvalidArgumentError("weights must match the number of candidates")
        self.weighting_mode = WeightingMode(self.weighting_mode)
        self.likelihood_form = LikelihoodForm(self.likelihood_form)

    @property
    def n_modes(self) -> int:
        return self.r_candidates.size

    @property
    def effective_r(self) -> float:
        return float(self.weights @ self.r_candidates)

    def copy(self) -> "FilterBank":
        return FilterBank(self.r_candidates.copy(), self.weights.copy(),
                          self.weighting_mode, self.likelihood_form, self.last_innovation)


def mode_updates(belief_prior: WeightBelief, row: MeasurementRow, bank: FilterBank):
    """Run each mode's Kalman update from the shared prior.

    Returns a list of ``(belief, innovation_var)`` pairs, one per mode.
    """
    out = []
    for r_var in bank.r_candidates:
        post, _, s_var = kalman_update(belief_prior, row, float(r_var))
        out.append((post, s_var))
    return out


def compute_weights(bank: FilterBank, innovation: float, innovation_vars) -> np.ndarray:
    """Normalised mode probabilities from the current innovation.

    Does not modify `bank`; :func:`mmktd_step` stores the result.
    """
    s = np.asarray(innovation_vars, dtype=float)
    if np.any(s <= 0):
        raise InvalidArgumentError("innovation variances must be positive")
    lik = np.exp(-0.5 * innovation * innovation / s)
    if bank.likelihood_form is LikelihoodForm.FULL_GAUSSIAN:
        lik = lik / np.sqrt(2.0 * np.pi * s)
    if bank.weighting_mode is WeightingMode.RECURSIVE:
        lik = bank.weights * lik
    total = lik.sum()
    if not total >= UNDERFLOW_FLOOR:
        return np.full(s.size, 1.0 / s.size)
    return lik / total


def fuse(mode_beliefs, weights) -> WeightBelief:
    """Moment-matched mixture of the mode posteriors."""
    weights = np.asarray(weights, dtype=float)
    thetas = np.stack([b.theta for b in mode_beliefs])
    theta = weights @ thetas
    cov = np.zeros_like(mode_beliefs[0].cov)
    for w, b in zip(weights, mode_beliefs):
        d = b.theta - theta
        cov += w * (b.cov + np.outer(d, d))
    return WeightBelief(theta, 0.5 * (cov + cov.T))


def mmktd_step(belief: WeightBelief, model: StateModel, row: MeasurementRow,
               bank: FilterBank) -> WeightBelief:
    """Predict, update every mode, re-weight and fuse.

    The per-mode Joseph updates and the fusion run in the compiled kernel
    (or its numpy twin); their result matches composing
    :func:`mode_updates`, :func:`compute_weights` and :func:`fuse`.
    ``bank.weights`` is overwritten with the new mode probabilities.
    """
    prior = predict(belief, model)
    h = row.h
    g = prior.cov @ h
    hph = float(h @ g)
    s_vars = hph + bank.r_candidates
    if not np.all(np.isfinite(s_vars)) or np.any(s_vars <= 0):
        raise NumericDegeneracyError(f"innovation variance {hph} is not usable")
    innovation = row.reward - float(h @ prior.theta)
    weights = compute_weights(bank, innovation, s_vars)
    theta, cov = kernels.bank_fuse(prior.theta, prior.cov, g, hph, innovation,
                                   bank.r_candidates, weights)
    bank.weights = weights
    bank.last_innovation = innovation
    return WeightBelief(theta, cov)
