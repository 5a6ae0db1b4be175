"""Compiled inverse-transform samplers shared by every simulator.

Laws are passed to compiled code as a flat float64 vector
``(kind, alpha, x0, phi, bound)`` so kernels stay free of Python objects.
"""
import math

import numba as nb
import numpy as np

ZERO = 0
CONSTANT = 1
UNIFORM = 2
PARETO = 3
PARETO_LOG = 4

KIND_CODES = {
    "zero": ZERO,
    "constant": CONSTANT,
    "bounded-uniform": UNIFORM,
    "pareto": PARETO,
    "pareto-log": PARETO_LOG,
}


@nb.njit(cache=True)
def _plog_gap(s, alpha, phi, s0, ls0, target):
    return -alpha * (s - s0) + phi * (math.log(s) - ls0) - target


@nb.njit(cache=True)
def _pareto_log_inverse(alpha, x0, phi, u):
    # Solve -alpha*(s - s0) + phi*(log s - log s0) = log(1 - u) for s = log x.
    if u <= 0.0:
        return x0
    target = math.log1p(-u)
    s0 = math.log(x0)
    ls0 = math.log(s0)

    lo = s0
    hi = s0 - target / alpha + 1.0
    while _plog_gap(hi, alpha, phi, s0, ls0, target) > 0.0:
        hi = s0 + 2.0 * (hi - s0)
    s = 0.5 * (lo + hi)
    for _ in range(200):
        val = _plog_gap(s, alpha, phi, s0, ls0, target)
        if val > 0.0:
            lo = s
        else:
            hi = s
        deriv = -alpha + phi / s
        step = s - val / deriv if deriv < 0.0 else 0.5 * (lo + hi)
        if step <= lo or step >= hi:
            step = 0.5 * (lo + hi)
        if abs(step - s) <= 1e-15 * abs(s):
            s = step
            break
        s = step
    return math.exp(s)


@nb.njit(cache=True)
def sample_magnitude(law, u):
    kind = int(law[0])
    if kind == PARETO:
        return law[2] * (1.0 - u) ** (-1.0 / law[1])
    if kind == UNIFORM:
        return law[4] * u
    if kind == CONSTANT:
        return law[4]
    if kind == ZERO:
        return 0.0
    return _pareto_log_inverse(law[1], law[2], law[3], u)


@nb.njit(cache=True)
def sample_many(law, u):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = sample_magnitude(law, u[i])
    return out


@nb.njit(cache=True)
def rule_prob(breaks, probs, x):
    # Piecewise-constant p_pos(x); probs has len(breaks) + 1 entries.
    if breaks.shape[0] == 0:
        return probs[0]
    return probs[np.searchsorted(breaks, x, side="right")]


@nb.njit(cache=True)
def draw_increment(rng, pos, neg, breaks, probs, shift, x, integer):
    """One signed increment: sign from the rule table, magnitude by inversion."""
    p = rule_prob(breaks, probs, x)
    u_sign = rng.random()
    u_mag = rng.random()
    if u_sign < p:
        mag = sample_magnitude(pos, u_mag)
        if integer:
            mag = np.ceil(mag)  # float ceil: int64 would overflow
        return mag + shift
    mag = sample_magnitude(neg, u_mag)
    if integer:
        mag = np.ceil(mag)  # float ceil: int64 would overflow
    return -mag + shift
