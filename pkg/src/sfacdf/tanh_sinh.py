"""Tanh-sinh (double-exponential) quadrature on a finite interval.

Nodes are x = c +/- d tanh(pi/2 sinh t) on the grid t = j 2^-k.  Each level
halves the step and reuses every earlier evaluation, so going from level k-1
to k costs only the new odd-indexed nodes.  The distance of a node from its
endpoint is computed directly as 2 d / (exp(2u) + 1), so nodes crowd the
endpoints without ever rounding onto them and the integrand is never
evaluated at an endpoint.
"""

import math
from dataclasses import dataclass

# beyond t = 4 the weights are below 1e-36 times the half-width
T_MAX = 4.0
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    evaluations: int
    level: int


def _level_sum(f, a, b, d, h, first):
    """Weighted sum over the nodes new at step h (all nodes if ``first``)."""
    total = 0.0
    count = 0
    step = 1 if first else 2
    j = 0 if first else 1
    while True:
        t = j * h
        if t > T_MAX:
            break
        u = HALF_PI * math.sinh(t)
        ch = math.cosh(u)
        w = d * HALF_PI * math.cosh(t) / (ch * ch)
        delta = 2.0 * d / (math.exp(2.0 * u) + 1.0)
        if j == 0:
            total += w * f(a + d)
            count += 1
        else:
            total += w * (f(a + delta) + f(b - delta))
            count += 2
        j += step
    return total, count


def tanh_sinh(f, a, b, abs_tol=1e-12, level_max=12, level_min=3):
    """Integrate ``f`` over the finite interval [a, b].

    Refines until two consecutive levels differ by at most ``abs_tol`` (and
    at least ``level_min`` levels have been used).  Returns a
    :class:`QuadResult`; ``converged`` is False when ``level_max`` is hit.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("tanh_sinh needs finite limits")
    if a == b:
        return QuadResult(0.0, 0.0, True, 0, 0)
    if a > b:
        r = tanh_sinh(f, b, a, abs_tol, level_max, level_min)
        return QuadResult(-r.value, r.error, r.converged, r.evaluations,
                          r.level)
    d = 0.5 * (b - a)
    h = 1.0
    acc, evals = _level_sum(f, a, b, d, h, True)
    estimate = acc * h
    error = math.inf
    for level in range(1, level_max + 1):
        h *= 0.5
        s, n = _level_sum(f, a, b, d, h, False)
        acc += s
        evals += n
        new = acc * h
        error = abs(new - estimate)
        estimate = new
        if level >= level_min and error <= abs_tol:
            return QuadResult(estimate, error, True, evals, level)
    return QuadResult(estimate, error, False, evals, level_max)
