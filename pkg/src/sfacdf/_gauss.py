"""Gauss-Legendre integration of log-concave integrands, returned in log space.

Every tail-sensitive primitive in the package reduces to an integral of
``exp(ell(x))`` over an interval where ``ell`` is concave with a known
maximiser.  Concavity gives two things for free: the integrand is unimodal,
and Newton's method started outside the ``peak - drop`` level set converges
monotonically towards it, so every iterate is a safe truncation point.  The
kept range is then covered with fixed Gauss-Legendre panels, and the result
is accurate relative to the integral itself rather than to 1.
"""

import math

import numpy as np

# ell drops by DROP at the truncation points; exp(-42) ~ 6e-19
DROP = 42.0
_ORDER = 32

_x, _w = np.polynomial.legendre.leggauss(_ORDER)
# nodes and weights for [0, 1]
NODES = tuple(float(v) for v in (_x + 1.0) / 2.0)
WEIGHTS = tuple(float(v) for v in _w / 2.0)
del _x, _w


def _cut(ell, dell, start, mode, target):
    """Point between ``start`` and ``mode`` where ell falls to ``target``.

    ``start`` must satisfy ``ell(start) <= target`` (or be the interval end,
    in which case it is returned unchanged when nothing needs cutting).
    """
    x = start
    f = ell(x) - target
    # within one unit of the target already (or inside the level set when
    # start is the interval end)
    if f > -1.0:
        return x
    for _ in range(40):
        d = dell(x)
        step = f / d if d != 0.0 and math.isfinite(d) else math.nan
        nx = x - step
        # stay strictly between x and the mode; otherwise bisect
        if not (min(x, mode) < nx < max(x, mode)):
            nx = 0.5 * (x + mode)
        x = nx
        f = ell(x) - target
        if f > -1.0:
            break
    return x


def _panel_sum(ell, a, b, peak):
    """Sum of exp(ell - peak) over the panel between a and b."""
    span = b - a
    if span == 0.0:
        return 0.0
    s = 0.0
    for u, w in zip(NODES, WEIGHTS):
        s += w * math.exp(ell(a + span * u) - peak)
    return s * abs(span)


def log_integrate(ell, dell, lo, hi, mode, lo_start=None, hi_start=None,
                  breaks=(), drop=DROP):
    """Return ``log(integral_{lo}^{hi} exp(ell(x)) dx)``.

    ``ell`` must be concave on ``[lo, hi]`` with its maximum at ``mode``.
    ``lo_start``/``hi_start`` replace an infinite or singular end as the
    starting point of the truncation search; they must lie at or beyond the
    ``ell(mode) - drop`` level.  ``breaks`` are extra panel boundaries (sharp
    but bounded features of the integrand).
    """
    peak = ell(mode)
    if peak == -math.inf:
        return -math.inf
    target = peak - drop
    left = mode
    if mode > lo:
        left = _cut(ell, dell, lo if lo_start is None else lo_start, mode,
                    target)
    right = mode
    if mode < hi:
        right = _cut(ell, dell, hi if hi_start is None else hi_start, mode,
                     target)

    total = 0.0
    left_edges = [mode] + sorted((b for b in breaks if left < b < mode),
                                 reverse=True) + [left]
    for a, b in zip(left_edges, left_edges[1:]):
        total += _panel_sum(ell, a, b, peak)
    right_edges = [mode] + sorted(b for b in breaks if mode < b < right) \
        + [right]
    for a, b in zip(right_edges, right_edges[1:]):
        total += _panel_sum(ell, a, b, peak)
    if total <= 0.0:
        return -math.inf
    return peak + math.log(total)
