"""Numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``MMKTD_BACKEND=python`` is set.
"""
import numpy as np


def rbf_activations(s, means, inv_covs):
    diff = np.asarray(s, dtype=float)[None, :] - means
    quad = np.einsum("ki,kij,kj->k", diff, inv_covs, diff)
    return np.exp(-0.5 * quad)


def greedy_action(s, means, inv_covs, theta, n_actions, include_bias):
    n_rbf = means.shape[0] // n_actions
    if n_rbf * n_actions != means.shape[0] or len(theta) != n_actions * (n_rbf + bool(include_bias)):
        raise ValueError("theta length does not match the RBF layout")
    act = rbf_activations(s, means, inv_covs).reshape(n_actions, -1)
    if include_bias:
        act = np.hstack([np.ones((n_actions, 1)), act])
    q = np.einsum("ak,ak->a", act, np.asarray(theta).reshape(n_actions, -1))
    return int(np.argmax(q))


def bank_fuse(theta, cov, g, hph, innovation, r_candidates, weights):
    r_candidates = np.asarray(r_candidates, dtype=float)
    weights = np.asarray(weights, dtype=float)
    gains = 1.0 / (hph + r_candidates)
    mean_gain = float(weights @ gains)
    theta_out = theta + mean_gain * innovation * g
    outer = np.outer(g, g)
    cov_out = np.zeros_like(cov)
    for w, k, s_var in zip(weights, gains, hph + r_candidates):
        if w == 0.0:
            continue
        cov_out += w * (cov - 2.0 * k * outer + s_var * k * k * outer)
    spread = float(weights @ ((gains - mean_gain) * innovation) ** 2)
    cov_out += spread * outer
    return theta_out, 0.5 * (cov_out + cov_out.T)
