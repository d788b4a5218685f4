"""Exponential integral E1 and the rate function built on it.

E1 uses its power series below 1 and a Lentz-evaluated continued fraction
from 1 upward. Both branches return the scaled value exp(x) * E1(x), which
stays finite for large arguments.
"""
import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
_SWITCH = 1.0
_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 500


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_ITER):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _scaled_e1_cf(x):
    # exp(x) E1(x) = 1/(x+1- 1^2/(x+3- 2^2/(x+5- ...)))
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at x={x}")


def _scaled_e1_scalar(x):
    if x <= 0:
        raise ValueError("E1 is evaluated for positive arguments only")
    if x < _SWITCH:
        return math.exp(x) * _e1_series(x)
    return _scaled_e1_cf(x)


def _e1_scalar(x):
    if x <= 0:
        raise ValueError("E1 is evaluated for positive arguments only")
    if x < _SWITCH:
        return _e1_series(x)
    return math.exp(-x) * _scaled_e1_cf(x)


def scaled_exp1(x):
    """exp(x) * E1(x) for x > 0 (scalar or array)."""
    if np.ndim(x) == 0:
        return _scaled_e1_scalar(float(x))
    return np.vectorize(_scaled_e1_scalar, otypes=[float])(x)


def exp1(x):
    """E1(x) = integral_x^inf exp(-t)/t dt for x > 0."""
    if np.ndim(x) == 0:
        return _e1_scalar(float(x))
    return np.vectorize(_e1_scalar, otypes=[float])(x)


def g_function(a, bandwidth):
    """(B / ln 2) * exp(-a) * E1(-a) for a < 0.

    Mean Shannon rate over Rayleigh fading at mean SNR -1/a.
    """
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr >= 0):
        raise ValueError("g_function needs a < 0 (a = 0 diverges)")
    return bandwidth / math.log(2.0) * scaled_exp1(-a_arr if a_arr.ndim else -float(a_arr))
