"""Scalar normal-distribution primitives: Phi, log Phi, Owen's T, bivariate CDF.

All functions take and return Python floats, accept infinite arguments where
a limit exists, and are pure.  Owen's T and the bivariate normal CDF are
accurate *relative* to their value deep in the lower tail, which is what the
composed-error CDFs need when the truncation mass Phi(mu/sigma_u) is tiny.
"""

import math

import numpy as np
from scipy.special import erfcx, log_ndtr

from ._gauss import DROP, log_integrate

__all__ = [
    "std_normal_pdf",
    "std_normal_cdf",
    "log_std_normal_cdf",
    "owen_t",
    "owen_t_upper",
    "bvn_cdf",
    "bvn_cdf_ratio",
]

SQRT2 = math.sqrt(2.0)
LOG_2PI = math.log(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
LOG2 = math.log(2.0)
TWO_PI = 2.0 * math.pi


def std_normal_pdf(x):
    """Standard normal density."""
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def std_normal_cdf(x):
    """Standard normal CDF via erfc, so both tails keep relative precision."""
    return 0.5 * math.erfc(-x / SQRT2)


def log_std_normal_cdf(x):
    """log Phi(x), finite down to x = -1e154 (scaled complementary erf)."""
    return float(log_ndtr(x))


def _log_upper(x):
    """log(1 - Phi(x))."""
    return float(log_ndtr(-x))


def _logaddexp(a, b):
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def _logsubexp(a, b):
    """log(exp(a) - exp(b)) for a >= b."""
    if b == -math.inf:
        return a
    return a + math.log1p(-math.exp(b - a))


# ---------------------------------------------------------------------------
# Owen's T
#
# For h >= 0 write T(h, g) = exp(-h^2/2)/(2 pi) * int_0^g k(t) dt with
# k(t) = exp(-h^2 t^2/2)/(1+t^2), and Tc(h, g) = T(h, inf) - T(h, g) for the
# upper part of the same integral.  Only integrals over [0, 1] are evaluated
# directly:
#   g <= 1:  T  = prefactor * int_0^g k
#            Tc = Q(h)^2/2 + prefactor * int_g^1 k       (T(h,1) = Phi Q / 2)
#   g >  1:  Tc = int_g^inf, mapped onto [0, 1] by t = g/(1 - w)
#            T  = Q(h)/2 - Tc, with Tc <= Q(h)/4 so no digits are lost.
# Both log-integrands are concave.
#
# The "scaled" helpers return log values with the Gaussian factor taken out:
# log Tc + h^2/2, or log Tc + h^2 (1+g^2)/2 for g > 1 (the integrand's value
# at t = g).  Callers that divide by another tiny Gaussian cancel the two
# exponents analytically instead of subtracting two huge logs.


def _log_upper_scaled(h):
    """log(1 - Phi(h)) + h^2/2 for h >= 0."""
    return math.log(0.5 * erfcx(h / SQRT2))


def _log_inner(h, lo, hi):
    """log int_lo^hi exp(-h^2 t^2/2)/(1+t^2) dt, 0 <= lo < hi <= 1."""
    hh = h * h

    def ell(t):
        return -0.5 * hh * t * t - math.log1p(t * t)

    def dell(t):
        return -hh * t - 2.0 * t / (1.0 + t * t)

    return log_integrate(ell, dell, lo, hi, lo)


def _log_outer(h, g):
    """log int_g^inf exp(-h^2 (t^2 - g^2)/2)/(1+t^2) dt, h > 0, g > 1.

    In s = 1/t the range is (0, 1/g].  The half next to 1/g is written with
    s = (1 - w)/g, so the exponent -(h g)^2 w (2 - w)/(2 (1 - w)^2) stays
    exact near w = 0 however large h g is; the half next to 0 keeps s itself,
    which resolves the rise at s ~ h when h is small.
    """
    hg = h * g
    c = hg * hg
    if c == math.inf:
        return -math.inf
    hh = h * h
    inv_g = 1.0 / g
    log_g = math.log(g)
    half = 0.5 * inv_g

    def ell_s(s):
        if s <= 0.0:
            return -math.inf
        gs = g * s
        r = h / s
        return -0.5 * r * r * (1.0 - gs) * (1.0 + gs) - math.log1p(s * s)

    def dell_s(s):
        r = h / s
        return r * r / s - 2.0 * s / (1.0 + s * s)

    def ell_w(w):
        r = 1.0 - w
        return (-0.5 * c * w * (2.0 - w) / (r * r) - log_g
                - math.log1p((r * inv_g) ** 2))

    def dell_w(w):
        r = 1.0 - w
        q = r * inv_g
        return -c / (r * r * r) + 2.0 * q * inv_g / (1.0 + q * q)

    # the log-integrand in s peaks where 2 s^4 = h^2 (1 + s^2)
    s_mode = math.sqrt((hh + math.sqrt(hh * hh + 8.0 * hh)) / 4.0)

    # near half: w in [0, 1/2]
    w_mode = min(max(0.0, 1.0 - g * s_mode), 0.5)
    near = log_integrate(ell_w, dell_w, 0.0, 0.5, w_mode)

    # far half: s in (0, 1/(2g)]; ell_s <= (c - h^2/s^2)/2 puts the start
    # beyond the drop level
    mode = min(s_mode, half)
    peak = ell_s(mode)
    start = min(h / math.sqrt(2.0 * (DROP - peak) + c), mode)
    breaks = []
    b = 4.0 * start
    while 0.0 < b < half:
        breaks.append(b)
        b *= 4.0
    far = log_integrate(ell_s, dell_s, 0.0, half, mode, lo_start=start,
                        breaks=breaks)
    # ds = dw / g
    return _logaddexp(near, far)


def _log_t_pos_scaled(h, g):
    """log T(h, g) + h^2/2 for h > 0 and 0 < g < inf."""
    if g <= 1.0:
        return -LOG_2PI + _log_inner(h, 0.0, g)
    tc = -LOG_2PI + _log_outer(h, g) - 0.5 * (h * g) * (h * g)
    return _logsubexp(_log_upper_scaled(h) - LOG2, tc)


def _log_tc_scaled(h, g):
    """(L, wide): log Tc(h, g) = L - h^2/2, or L - h^2 (1+g^2)/2 if wide.

    h >= 0, any g.  ``wide`` is set for g > 1, where Tc is far smaller than
    exp(-h^2/2) and only the wider Gaussian factor keeps L moderate.
    """
    if g == math.inf:
        return -math.inf, False
    if g == -math.inf:
        return _log_upper_scaled(h), False
    if h * h == 0.0:
        # exp(-h^2/2) rounds to 1
        return math.log(math.atan2(1.0, g)) - LOG_2PI, False
    if g > 1.0:
        return -LOG_2PI + _log_outer(h, g), True
    if g < 0.0:
        return _logaddexp(_log_upper_scaled(h) - LOG2,
                          _log_t_pos_scaled(h, -g)), False
    base = 2.0 * _log_upper_scaled(h) - LOG2 - 0.5 * h * h
    if g == 1.0:
        return base, False
    return _logaddexp(base, -LOG_2PI + _log_inner(h, g, 1.0)), False


def _log_t_pos(h, g):
    """log T(h, g) for h >= 0 and 0 < g < inf."""
    if h * h == 0.0:
        # exp(-h^2/2) rounds to 1
        return math.log(math.atan(g)) - LOG_2PI
    return _log_t_pos_scaled(h, g) - 0.5 * h * h


def _log_tc(h, g):
    """log Tc(h, g) = log(T(h, inf) - T(h, g)) for h >= 0, any g."""
    if math.isnan(g):
        return math.nan
    value, wide = _log_tc_scaled(h, g)
    if wide:
        return value - 0.5 * h * h - 0.5 * (h * g) * (h * g)
    return value - 0.5 * h * h


def owen_t(h, g):
    """Owen's T function, T(h, g) = 1/(2 pi) int_0^g exp(-h^2(1+t^2)/2)/(1+t^2) dt.

    ``g`` may be infinite.  Accurate relative to the result, also when the
    result is far below double-precision epsilon.
    """
    h, g = float(h), float(g)
    if math.isnan(h) or math.isnan(g):
        return math.nan
    if g == 0.0:
        return 0.0
    h = abs(h)
    sign = 1.0 if g > 0.0 else -1.0
    g = abs(g)
    if g == math.inf:
        return sign * 0.5 * math.exp(_log_upper(h))
    return sign * math.exp(_log_t_pos(h, g))


def owen_t_upper(h, g):
    """Complementary Owen's T: T(h, inf) - T(h, g) = (1 - Phi(|h|))/2 - T(h, g).

    Always nonnegative and computed without cancellation, so it stays
    relatively accurate when T(h, g) is close to its limit.
    """
    h, g = float(h), float(g)
    if math.isnan(h) or math.isnan(g):
        return math.nan
    return math.exp(_log_tc(abs(h), g))


def log_owen_t(h, g):
    """log T(h, g) for g > 0 (T is positive there), usable where T underflows."""
    h, g = float(h), float(g)
    if math.isnan(h) or math.isnan(g):
        return math.nan
    if not g > 0.0:
        raise ValueError(f"log_owen_t needs g > 0, got {g!r}")
    if g == math.inf:
        return _log_upper(abs(h)) - LOG2
    return _log_t_pos(abs(h), g)


def log_owen_t_upper(h, g):
    """log of :func:`owen_t_upper`, usable where the value underflows."""
    h, g = float(h), float(g)
    if math.isnan(h) or math.isnan(g):
        return math.nan
    return _log_tc(abs(h), g)


def log_owen_t_scaled(h, g):
    """log T(h, g) + h^2/2 for 0 < g < inf."""
    h = abs(h)
    if h * h == 0.0:
        # exp(-h^2/2) rounds to 1
        return math.log(math.atan(g)) - LOG_2PI
    return _log_t_pos_scaled(h, g)


def log_owen_t_upper_scaled(h, g):
    """(L, wide) with log Tc(h, g) = L - h^2/2, or L - h^2 (1+g^2)/2 if wide.

    Lets a caller cancel the Gaussian factor against another one exactly.
    """
    return _log_tc_scaled(abs(h), g)


# ---------------------------------------------------------------------------
# Bivariate normal CDF
#
# Body (min(h, k) >= TAIL_SPLIT): Drezner-Wesolowsky / Genz 20-point
# Gauss-Legendre in the correlation parameter, with Genz's transformed branch
# for |rho| >= 0.925.  Absolute error is ~1e-16.
#
# Tail (min(h, k) < TAIL_SPLIT): with p = min(h, k), s the other argument and
# r = sqrt(1 - rho^2),
#     BvN = int_{-inf}^{p} phi(x) Phi((s - rho x)/r) dx.
# The log-integrand is concave (both factors are log-concave) and, since p is
# the smaller argument, it is increasing up to x = p, so the mode sits on the
# upper limit.  Integrating in log space keeps relative accuracy however small
# the result is.

TAIL_SPLIT = -3.0
_GL20_X, _GL20_W = (tuple(float(v) for v in a)
                    for a in np.polynomial.legendre.leggauss(20))


def _genz_upper(h, k, r):
    """P(X > h, Y > k) for finite h, k and 0 < |r| < 1 (Genz's BVNU)."""
    hk = h * k
    total = 0.0
    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = 0.5 * math.asin(r)
        for x, w in zip(_GL20_X, _GL20_W):
            sn = math.sin(asr * (1.0 + x))
            total += w * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        return total * asr / TWO_PI + std_normal_cdf(-h) * std_normal_cdf(-k)
    if r < 0.0:
        k = -k
        hk = -hk
    as_ = (1.0 - r) * (1.0 + r)
    a = math.sqrt(as_)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 80.0
    asr = -0.5 * (bs / as_ + hk)
    if asr > -100.0:
        total = a * math.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0
                                     + c * d * as_ * as_)
    if hk > -100.0:
        b = math.sqrt(bs)
        sp = math.sqrt(TWO_PI) * std_normal_cdf(-b / a)
        total -= math.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs)
                                                 / 3.0)
    a *= 0.5
    acc = 0.0
    for x, w in zip(_GL20_X, _GL20_W):
        xs = (a * (1.0 + x)) ** 2
        asr = -0.5 * (bs / xs + hk)
        if asr > -100.0:
            sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
            rs = math.sqrt(1.0 - xs)
            ep = math.exp(-0.5 * hk * xs / (1.0 + rs) ** 2) / rs
            acc += w * math.exp(asr) * (sp - ep)
    total = (a * acc - total) / TWO_PI
    if r > 0.0:
        return total + std_normal_cdf(-max(h, k))
    if h >= k:
        return -total
    if h < 0.0:
        lower = std_normal_cdf(k) - std_normal_cdf(h)
    else:
        lower = std_normal_cdf(-h) - std_normal_cdf(-k)
    return lower - total


def _tail_integral(p, s, rho):
    """log int_0^inf exp(p d - d^2/2) Phi(z_p + beta d) dd, for p <= s, p < 0.

    With x = p - d this is the tail integral above with phi(x) replaced by
    exp(-x^2/2 + p^2/2), so BvN = exp(-p^2/2)/sqrt(2 pi) * exp(result).
    Leaving the Gaussian factor out lets callers cancel it analytically.
    """
    r = math.sqrt((1.0 - rho) * (1.0 + rho))
    zp = (s - rho * p) / r
    beta = rho / r

    def ell(d):
        return d * (p - 0.5 * d) + log_std_normal_cdf(zp + beta * d)

    def dell(d):
        z = zp + beta * d
        mills = math.exp(-0.5 * z * z - 0.5 * LOG_2PI - log_std_normal_cdf(z))
        return (p - d) + beta * mills

    drop = DROP - ell(0.0)
    # ell(d) <= p d - d^2/2, and either term alone gives a bound
    hi_start = min(math.sqrt(2.0 * drop), drop / -p)
    # Phi(z) switches between its two regimes over |z| < 8 (a narrow band in d
    # when |beta| is large); give that band its own panels
    breaks = ()
    if beta != 0.0:
        breaks = tuple((z - zp) / beta
                       for z in (-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0))
    return log_integrate(ell, dell, 0.0, math.inf, 0.0, hi_start=hi_start,
                         breaks=breaks)


def log_phi_scaled(h):
    """log Phi(h) + h^2/2 for h < 0, without forming either term."""
    return math.log(0.5 * erfcx(-h / SQRT2))


def _bvn_prepare(h, k, rho):
    """Validate, and return a closed-form value where one exists."""
    if math.isnan(h) or math.isnan(k) or math.isnan(rho):
        raise ValueError("bvn_cdf arguments must not be NaN")
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho!r}")
    if h == -math.inf or k == -math.inf:
        return 0.0
    if h == math.inf:
        return std_normal_cdf(k)
    if k == math.inf:
        return std_normal_cdf(h)
    if rho == 1.0:
        return std_normal_cdf(min(h, k))
    if rho == -1.0:
        return max(0.0, std_normal_cdf(h) - std_normal_cdf(-k))
    return None


def _bvn_body(h, k, rho):
    """BvN for finite h, k with min(h, k) >= TAIL_SPLIT and |rho| < 1."""
    if rho == 0.0:
        return std_normal_cdf(h) * std_normal_cdf(k)
    if rho < -0.925:
        # Genz's negative high-correlation branch cancels badly near -1;
        # reflect onto positive correlation instead
        lo, hi = min(h, k), max(h, k)
        return max(0.0, std_normal_cdf(lo) - bvn_cdf(lo, -hi, -rho))
    return min(1.0, max(0.0, _genz_upper(-h, -k, rho)))


def bvn_cdf(h, k, rho):
    """P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.

    ``h`` and ``k`` may be infinite.  Raises ValueError for rho outside
    [-1, 1].  The result is accurate to about 1e-16 absolute, and relative
    to its own size once either argument is below -3.
    """
    h, k, rho = float(h), float(k), float(rho)
    limit = _bvn_prepare(h, k, rho)
    if limit is not None:
        return limit
    p, s = min(h, k), max(h, k)
    if p < TAIL_SPLIT:
        return math.exp(_tail_integral(p, s, rho) - 0.5 * p * p
                        - 0.5 * LOG_2PI)
    return _bvn_body(h, k, rho)


def bvn_cdf_ratio(h, k, rho):
    """BvN(h, k, rho) / Phi(h), evaluated without forming either factor.

    Stays accurate when both are far below the smallest double, as long as
    the ratio itself is representable.
    """
    h, k, rho = float(h), float(k), float(rho)
    limit = _bvn_prepare(h, k, rho)
    if limit is not None:
        if rho == 1.0 and h > -math.inf and k > -math.inf:
            return math.exp(log_std_normal_cdf(min(h, k))
                            - log_std_normal_cdf(h))
        if limit == 0.0:
            return 0.0
        return limit / std_normal_cdf(h)
    p, s = min(h, k), max(h, k)
    if p >= TAIL_SPLIT:
        return _bvn_body(h, k, rho) / std_normal_cdf(h)
    log_j = _tail_integral(p, s, rho) - 0.5 * LOG_2PI
    if h >= 0.0:
        return math.exp(log_j - 0.5 * p * p - log_std_normal_cdf(h))
    # -p^2/2 - log Phi(h) = -(p - h)(p + h)/2 - log(Phi(h) e^{h^2/2})
    return math.exp(log_j - 0.5 * (p - h) * (p + h) - log_phi_scaled(h))
