# cython: language_level=3
"""Compiled inner loops. Signatures mirror ``mmktd._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


cdef inline double _quad(const double[:] s, const double[:, :] means,
                         const double[:, :, :] inv_covs, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t d = s.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, di
    for i in range(d):
        di = s[i] - means[k, i]
        for j in range(d):
            acc += di * inv_covs[k, i, j] * (s[j] - means[k, j])
    return acc


def rbf_activations(const double[:] s, const double[:, :] means,
                    const double[:, :, :] inv_covs):
    cdef Py_ssize_t n = means.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            o[k] = exp(-0.5 * _quad(s, means, inv_covs, k))
    return out


def greedy_action(const double[:] s, const double[:, :] means,
                  const double[:, :, :] inv_covs, const double[:] theta,
                  Py_ssize_t n_actions, bint include_bias):
    cdef Py_ssize_t n_rbf = means.shape[0] // n_actions
    cdef Py_ssize_t block = n_rbf + (1 if include_bias else 0)
    cdef Py_ssize_t a, k, off
    cdef double q, best = 0.0
    cdef Py_ssize_t best_a = 0
    if n_rbf * n_actions != means.shape[0] or theta.shape[0] != n_actions * block:
        raise ValueError("theta length does not match the RBF layout")
    with nogil:
        for a in range(n_actions):
            off = a * block
            q = theta[off] if include_bias else 0.0
            if include_bias:
                off += 1
            for k in range(n_rbf):
                q += theta[off + k] * exp(-0.5 * _quad(s, means, inv_covs, a * n_rbf + k))
            if a == 0 or q > best:
                best = q
                best_a = a
    return best_a


def bank_fuse(const double[:] theta, const double[:, :] cov, const double[:] g,
              double hph, double innovation, const double[:] r_candidates,
              const double[:] weights):
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t m = r_candidates.shape[0]
    cdef Py_ssize_t i, j, mode
    cdef double s_var, w, nu_gain, c_cross, c_outer

    theta_out = np.zeros(n, dtype=np.float64)
    cov_out = np.zeros((n, n), dtype=np.float64)
    gains = np.empty(m, dtype=np.float64)
    cdef double[:] t = theta_out
    cdef double[:, :] p = cov_out
    cdef double[:] kg = gains
    cdef double spread = 0.0, mean_gain = 0.0, dev

    with nogil:
        for mode in range(m):
            s_var = hph + r_candidates[mode]
            kg[mode] = 1.0 / s_var
            mean_gain += weights[mode] * kg[mode]
        for i in range(n):
            t[i] = theta[i] + mean_gain * g[i] * innovation
        # Joseph posterior of mode i, expanded around the rank-one gain
        # K = g / S:  P - K g' - g K' + S K K'.
        for mode in range(m):
            w = weights[mode]
            if w == 0.0:
                continue
            s_var = hph + r_candidates[mode]
            c_cross = kg[mode]
            c_outer = s_var * kg[mode] * kg[mode]
            for i in range(n):
                for j in range(n):
                    p[i, j] += w * (cov[i, j]
                                    - c_cross * g[i] * g[j]
                                    - g[i] * c_cross * g[j]
                                    + c_outer * g[i] * g[j])
            dev = (kg[mode] - mean_gain) * innovation
            spread += w * dev * dev
        for i in range(n):
            for j in range(n):
                p[i, j] += spread * g[i] * g[j]
        for i in range(n):
            for j in range(i + 1, n):
                w = 0.5 * (p[i, j] + p[j, i])
                p[i, j] = w
                p[j, i] = w
    return theta_out, cov_out
