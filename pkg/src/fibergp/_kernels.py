"""Numba stack-machine kernels over encoded prefix programs.

Encoding: ``code >= 0`` is a variable index, ``CONST`` reads ``consts[i]``,
the remaining negative codes are functions.
"""

import numpy as np
from numba import njit

CONST = -1
ADD = -2
SUB = -3
MUL = -4
DIV = -5
LOG = -6
EXP = -7

GUARD = 1e-9
EXP_CLAMP = 80.0
OVERFLOW = 1e15
PENALTY = 1e300

METRIC_RMSE = 0
METRIC_MAE = 1


@njit(cache=True)
def _fix(v):
    if v == np.inf:
        return OVERFLOW
    if v == -np.inf:
        return -OVERFLOW
    return v


@njit(cache=True)
def evaluate_program(codes, consts, X):
    n = X.shape[0]
    out = np.empty(n)
    stack = np.empty(codes.shape[0])
    for r in range(n):
        sp = 0
        for i in range(codes.shape[0] - 1, -1, -1):
            c = codes[i]
            if c >= 0:
                stack[sp] = X[r, c]
                sp += 1
            elif c == CONST:
                stack[sp] = consts[i]
                sp += 1
            elif c >= DIV:
                a = stack[sp - 1]
                b = stack[sp - 2]
                sp -= 1
                if c == ADD:
                    v = a + b
                elif c == SUB:
                    v = a - b
                elif c == MUL:
                    v = a * b
                elif abs(b) < GUARD:
                    v = 1.0
                else:
                    v = a / b
                stack[sp - 1] = _fix(v)
            else:
                a = stack[sp - 1]
                if c == LOG:
                    v = 0.0 if abs(a) < GUARD else np.log(abs(a))
                else:
                    v = np.exp(min(max(a, -EXP_CLAMP), EXP_CLAMP))
                stack[sp - 1] = _fix(v)
        out[r] = stack[0]
    return out


@njit(cache=True)
def program_depth(codes):
    stack = np.empty(codes.shape[0], dtype=np.int64)
    sp = 0
    for i in range(codes.shape[0] - 1, -1, -1):
        c = codes[i]
        if c >= CONST:
            stack[sp] = 1
            sp += 1
        elif c >= DIV:
            d = max(stack[sp - 1], stack[sp - 2])
            sp -= 1
            stack[sp - 1] = d + 1
        else:
            stack[sp - 1] += 1
    return stack[0]


@njit(cache=True)
def linear_scale(p, y):
    """Least-squares ``(a, b)`` for ``y ~ a*p + b``; robust to huge ``p``."""
    n = p.shape[0]
    ymean = 0.0
    for i in range(n):
        ymean += y[i]
    ymean /= n
    m = 0.0
    for i in range(n):
        m = max(m, abs(p[i]))
    if m == 0.0:
        return 0.0, ymean
    pmean = 0.0
    for i in range(n):
        pmean += p[i] / m
    pmean /= n
    var = 0.0
    cov = 0.0
    for i in range(n):
        d = p[i] / m - pmean
        var += d * d
        cov += d * (y[i] - ymean)
    var /= n
    cov /= n
    # var(p) = var * m**2 < 1e-12
    if var < 1e-12 / (m * m):
        return 0.0, ymean
    a_unit = cov / var
    return a_unit / m, ymean - a_unit * pmean


@njit(cache=True)
def score_program(codes, consts, X, y, metric, scaling):
    p = evaluate_program(codes, consts, X)
    a = 1.0
    b = 0.0
    if scaling:
        a, b = linear_scale(p, y)
    n = p.shape[0]
    acc = 0.0
    for i in range(n):
        e = y[i] - (a * p[i] + b)
        if metric == METRIC_RMSE:
            acc += e * e
        else:
            acc += abs(e)
    acc /= n
    score = np.sqrt(acc) if metric == METRIC_RMSE else acc
    if not np.isfinite(score):
        score = PENALTY
    return score, a, b
