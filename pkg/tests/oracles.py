"""Independent reference computations used as test oracles.

Everything here is scalar, pure-Python float arithmetic written in
information (precision) form, so it shares no code path with the
gain-form filters under test.
"""
import math


def scalar_mixture_filter(rewards, hs, r_candidates, m0, p0, q, full_gaussian=True):
    """Moment-matched Bayesian mixture over noise hypotheses, one scalar weight.

    Each step: prior N(m, p + q); per hypothesis the posterior is the
    product of Gaussians in precision form; weights are the (optionally
    unnormalised-density) evidence of each hypothesis, renormalised.
    Returns the list of fused means after every step.
    """
    m, p = float(m0), float(p0)
    means = []
    for r, h in zip(rewards, hs):
        p = p + q
        post = []
        evid = []
        for R in r_candidates:
            prec = 1.0 / p + h * h / R
            var = 1.0 / prec
            mean = var * (m / p + h * r / R)
            post.append((mean, var))
            s = h * h * p + R
            e = math.exp(-0.5 * (r - h * m) ** 2 / s)
            if full_gaussian:
                e /= math.sqrt(2.0 * math.pi * s)
            evid.append(e)
        total = sum(evid)
        w = [e / total for e in evid]
        m_new = sum(wi * mi for wi, (mi, _) in zip(w, post))
        p_new = sum(wi * (vi + (mi - m_new) ** 2) for wi, (mi, vi) in zip(w, post))
        m, p = m_new, p_new
        means.append(m)
    return means


def pendulum_accel(theta, omega, u, m=2.0, M=8.0, l=0.5, g=9.81):
    a = 1.0 / (m + M)
    num = g * math.sin(theta) - a * m * l * omega ** 2 * math.sin(2 * theta) / 2 - a * math.cos(theta) * u
    den = 4 * l / 3 - a * m * l * math.cos(theta) ** 2
    return num / den


def mountain_car_reference(x, v, a):
    """Canonical discrete mountain-car map, written out independently."""
    v = v + (a - 1) * 0.001 + math.cos(3 * x) * (-0.0025)
    if v > 0.07:
        v = 0.07
    if v < -0.07:
        v = -0.07
    x = x + v
    if x > 0.5:
        x = 0.5
    if x < -1.2:
        x = -1.2
    if x == -1.2 and v < 0:
        v = 0.0
    return x, v
