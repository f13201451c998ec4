"""Density and distribution functions of the stochastic-frontier composed error.

The composed error is eps = v - u with noise v ~ N(0, sigma_v^2) and a
nonnegative inefficiency u, either truncated normal TN(mu, sigma_u^2, 0, inf)
or exponential with rate lambda.  Each family has two closed-form CDFs:

* truncated normal: an Owen's T form and a bivariate-normal form, both ratios
  of an integral of phi(y) Phi(a + b y) to Phi(mu / sigma_u);
* exponential: an exp/Phi form and the reflected CDF of an exponentially
  modified Gaussian.

The cost orientation eps* = v + u is served through F*(k) = 1 - F(-k).

Everything that can overflow or underflow is assembled in log space, so the
whole parameter range (mu / sigma_u down to -32, lambda sigma_v up to 32)
evaluates without inf/nan.
"""

import enum
import math
import numbers
from dataclasses import dataclass, field

from .special import (
    bvn_cdf_ratio,
    log_owen_t,
    log_owen_t_upper,
    log_owen_t_scaled,
    log_owen_t_upper_scaled,
    log_phi_scaled,
    log_std_normal_cdf,
    owen_t,
    std_normal_cdf,
)

__all__ = [
    "ParameterError",
    "MethodError",
    "Orientation",
    "Method",
    "TruncNormalComposedParams",
    "ExpComposedParams",
    "tn_pdf",
    "exp_pdf",
    "tn_cdf_owen",
    "tn_cdf_bvn",
    "half_normal_cdf",
    "exp_cdf_direct",
    "exp_cdf_emg",
    "cdf",
    "pdf",
]

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# |phi(kappa)| below this uses the closed-form limit in the Owen's T form
SINGULAR_BAND = 1e-10


class ParameterError(ValueError):
    """Invalid distribution parameters."""


class MethodError(ValueError):
    """CDF method that does not exist or does not apply to the parameters."""


class Orientation(enum.Enum):
    PRODUCTION = "production"  # eps = v - u
    COST = "cost"  # eps* = v + u


class Method(enum.Enum):
    OWEN = "owen"
    BVN = "bvn"
    DIRECT = "direct"
    EMG = "emg"


def _check_scale(name, value):
    if not (isinstance(value, numbers.Real) and math.isfinite(value)
            and value > 0.0):
        raise ParameterError(f"{name} must be a finite positive number, "
                             f"got {value!r}")
    return float(value)


@dataclass(frozen=True)
class TruncNormalComposedParams:
    """u ~ TN(mu, sigma_u^2, 0, inf), v ~ N(0, sigma_v^2).

    Derived quantities are cached on construction:
    ``a = mu s / (sigma_u sigma_v)`` and ``b = -sigma_u / sigma_v`` with
    ``s = sqrt(sigma_u^2 + sigma_v^2)``; ``h = a / sqrt(1 + b^2) = mu / sigma_u``
    and ``rho = -b / sqrt(1 + b^2) = sigma_u / s`` are the bivariate-normal
    arguments.
    """

    mu: float
    sigma_u: float
    sigma_v: float
    s: float = field(init=False, repr=False)
    a: float = field(init=False, repr=False)
    b: float = field(init=False, repr=False)
    h: float = field(init=False, repr=False)
    rho: float = field(init=False, repr=False)

    def __post_init__(self):
        mu = self.mu
        if not (isinstance(mu, numbers.Real) and math.isfinite(mu)):
            raise ParameterError(f"mu must be finite, got {mu!r}")
        su = _check_scale("sigma_u", self.sigma_u)
        sv = _check_scale("sigma_v", self.sigma_v)
        s = math.hypot(su, sv)
        put = object.__setattr__
        put(self, "mu", float(mu))
        put(self, "sigma_u", su)
        put(self, "sigma_v", sv)
        put(self, "s", s)
        put(self, "a", mu * s / (su * sv))
        put(self, "b", -su / sv)
        put(self, "h", mu / su)
        put(self, "rho", su / s)

    def phi(self, kappa):
        """Standardized point (kappa + mu) / sqrt(sigma_u^2 + sigma_v^2)."""
        return (kappa + self.mu) / self.s


@dataclass(frozen=True)
class ExpComposedParams:
    """u ~ Exp(lam) (rate parametrization, mean 1/lam), v ~ N(0, sigma_v^2).

    ``a = -lam sigma_v`` is cached on construction.
    """

    lam: float
    sigma_v: float
    a: float = field(init=False, repr=False)

    def __post_init__(self):
        lam = _check_scale("lambda", self.lam)
        sv = _check_scale("sigma_v", self.sigma_v)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sigma_v", sv)
        object.__setattr__(self, "a", -lam * sv)

    def phi(self, kappa):
        """Standardized point -(kappa + lam sigma_v^2) / sigma_v."""
        return -(kappa + self.lam * self.sigma_v * self.sigma_v) / self.sigma_v


def _check_point(x, name="kappa"):
    if math.isnan(x):
        raise ParameterError(f"{name} must not be NaN")
    return float(x)


# ---------------------------------------------------------------------------
# densities


def tn_pdf(params, eps):
    """Density of eps = v - u for truncated-normal u.

    f(e) = phi((e + mu)/s) Phi((mu sv^2 - e su^2)/(s sv su)) / (s Phi(mu/su)).
    """
    eps = _check_point(eps, "eps")
    if math.isinf(eps):
        return 0.0
    mu, su, sv, s = params.mu, params.sigma_u, params.sigma_v, params.s
    z = (eps + mu) / s
    w = (mu * sv * sv - eps * su * su) / (s * sv * su)
    log_f = (-0.5 * z * z - LOG_SQRT_2PI - math.log(s)
             + log_std_normal_cdf(w) - log_std_normal_cdf(params.h))
    return math.exp(log_f)


def exp_pdf(params, eps):
    """Density of eps = v - u for exponential u.

    f(e) = lam exp(lam e + sv^2 lam^2 / 2) Phi(-e/sv - lam sv), assembled in
    log space so the exponential never overflows on its own.
    """
    eps = _check_point(eps, "eps")
    if math.isinf(eps):
        return 0.0
    lam, sv = params.lam, params.sigma_v
    log_f = (math.log(lam) + lam * eps + 0.5 * (lam * sv) * (lam * sv)
             + log_std_normal_cdf(-eps / sv - lam * sv))
    return math.exp(log_f)


# ---------------------------------------------------------------------------
# truncated-normal CDFs


def _clip01(x):
    return min(1.0, max(0.0, x))


def tn_cdf_bvn(params, kappa):
    """Bivariate-normal form: BvN(mu/su, phi(kappa), su/s) / Phi(mu/su).

    The ratio is formed inside the bivariate routine so it stays accurate
    when Phi(mu/su) is far below the smallest double.
    """
    kappa = _check_point(kappa)
    if kappa == math.inf:
        return 1.0
    if kappa == -math.inf:
        return 0.0
    return _clip01(bvn_cdf_ratio(params.h, params.phi(kappa), params.rho))


def tn_cdf_owen(params, kappa):
    """Owen's T form of the truncated-normal CDF.

    Phi(mu/su) F = Phi(y)/2 + Phi(h)/2 - 1(h/y < 0)/2 - T(y, g1) - T(h, g2)
    with y = phi(kappa), h = a/sqrt(1+b^2) = mu/su, g1 = (a + b y)/y and
    g2 = (a b + y (1 + b^2))/a.

    Each T is rewritten as T(x, inf) - Tc(x, g); after the Phi terms cancel
    against the T(x, inf) parts only complementary Owen's T values remain,
    and these are divided by Phi(h) in log space.  At y = 0 the two T terms
    are individually discontinuous and the limit Phi(h)/2 - T(h, b) is used.
    Undefined for mu = 0 (use :func:`half_normal_cdf`).
    """
    kappa = _check_point(kappa)
    if params.mu == 0.0:
        raise MethodError("the Owen's T form is undefined for mu = 0; "
                          "use half_normal_cdf or the bvn method")
    if kappa == math.inf:
        return 1.0
    if kappa == -math.inf:
        return 0.0
    a, b, h = params.a, params.b, params.h
    y = params.phi(kappa)
    if h < 0.0:
        return _clip01(_owen_lower(a, b, h, y))
    log_ph = log_std_normal_cdf(h)
    if abs(y) < SINGULAR_BAND:
        # Phi(h)/2 - T(h, b) with b < 0
        return _clip01(0.5 + math.exp(log_owen_t(h, -b) - log_ph))
    g1 = (a + b * y) / y
    g2 = (a * b + y * (1.0 + b * b)) / a

    def term(x, g):
        return math.exp(log_owen_t_upper(x, g) - log_ph)

    if y > 0.0:
        f = (1.0 - math.exp(log_owen_t_upper(y, -g1))
             - math.exp(log_owen_t_upper(h, -g2))) / math.exp(log_ph)
    else:
        f = term(y, g1) - term(h, -g2)
    return _clip01(f)


def _owen_lower(a, b, h, y):
    """Owen's T form for h = mu/su < 0, where Phi(h) may be far below 1e-308.

    Every Tc(x, g) carries a Gaussian factor exp(-x^2/2), or exp(-x^2 (1+g^2)/2)
    when g > 1, and Phi(h) carries exp(-h^2/2).  The differences of these
    exponents are formed directly: (h - x)(h + x) for the narrow factor, and
    for the wide one the identity y^2 (1 + g1^2) - h^2 = h^2 (1 + g2^2) - h^2
    = (h g2)^2, with h g2 = (a b + y (1 + b^2))/sqrt(1 + b^2).
    """
    log_ph = log_phi_scaled(h)
    if abs(y) < SINGULAR_BAND:
        return 0.5 + math.exp(log_owen_t_scaled(-h, -b) - log_ph)
    g1 = (a + b * y) / y
    g2 = (a * b + y * (1.0 + b * b)) / a
    hg2 = (a * b + y * (1.0 + b * b)) / math.sqrt(1.0 + b * b)

    def term(x, g):
        value, wide = log_owen_t_upper_scaled(x, g)
        gap = -0.5 * hg2 * hg2 if wide else 0.5 * (h - x) * (h + x)
        return math.exp(value + gap - log_ph)

    if y < 0.0:
        return term(y, g1) + term(h, g2)
    return term(h, g2) - term(y, -g1)


def half_normal_cdf(sigma_u, sigma_v, kappa):
    """CDF of v - u for half-normal u (mu = 0): 2 T(x, su/sv) + Phi(x).

    Here x = kappa / sqrt(su^2 + sv^2).
    """
    su = _check_scale("sigma_u", sigma_u)
    sv = _check_scale("sigma_v", sigma_v)
    kappa = _check_point(kappa)
    if kappa == math.inf:
        return 1.0
    if kappa == -math.inf:
        return 0.0
    x = kappa / math.hypot(su, sv)
    return _clip01(2.0 * owen_t(x, su / sv) + std_normal_cdf(x))


# ---------------------------------------------------------------------------
# exponential CDFs


def exp_cdf_direct(params, kappa):
    """Exp/Phi form: 1 + exp(-a^2/2)[exp(a phi) Phi(phi) - exp(a^2/2) Phi(phi - a)].

    With a = -lam sv and phi = phi(kappa).  Evaluated as
    Phi(a - phi) + exp(a phi - a^2/2 + log Phi(phi)), which is the same
    expression with 1 - Phi(phi - a) folded into one Phi call and the
    exponentials merged into one exponent.
    """
    kappa = _check_point(kappa)
    if kappa == math.inf:
        return 1.0
    if kappa == -math.inf:
        return 0.0
    a = params.a
    ph = params.phi(kappa)
    tail = math.exp(a * ph - 0.5 * a * a + log_std_normal_cdf(ph))
    return _clip01(std_normal_cdf(a - ph) + tail)


def emg_cdf(lam, sigma, x):
    """CDF of N(0, sigma^2) + Exp(lam) at x (exponentially modified Gaussian)."""
    z = x / sigma
    ls = lam * sigma
    tail = math.exp(-lam * x + 0.5 * ls * ls + log_std_normal_cdf(z - ls))
    return std_normal_cdf(z) - tail


def exp_cdf_emg(params, kappa):
    """EMG form: -eps = u - v is exponentially modified Gaussian, so
    F(kappa) = 1 - F_EMG(-kappa).
    """
    kappa = _check_point(kappa)
    if kappa == math.inf:
        return 1.0
    if kappa == -math.inf:
        return 0.0
    return _clip01(1.0 - emg_cdf(params.lam, params.sigma_v, -kappa))


# ---------------------------------------------------------------------------
# dispatch

_METHODS = {
    TruncNormalComposedParams: {Method.OWEN: tn_cdf_owen,
                                Method.BVN: tn_cdf_bvn},
    ExpComposedParams: {Method.DIRECT: exp_cdf_direct,
                        Method.EMG: exp_cdf_emg},
}
DEFAULT_METHOD = {TruncNormalComposedParams: Method.BVN,
                  ExpComposedParams: Method.EMG}


def _coerce(enum_type, value, what):
    if isinstance(value, enum_type):
        return value
    try:
        return enum_type(value)
    except ValueError:
        choices = ", ".join(m.value for m in enum_type)
        raise MethodError(f"unknown {what} {value!r} (expected one of "
                          f"{choices})") from None


def resolve_method(params, method=None):
    """The CDF function for ``params`` and ``method`` (None: family default)."""
    table = _METHODS.get(type(params))
    if table is None:
        raise ParameterError(f"unsupported parameter type "
                             f"{type(params).__name__}")
    if method is None:
        method = DEFAULT_METHOD[type(params)]
    method = _coerce(Method, method, "method")
    if method not in table:
        allowed = "|".join(m.value for m in table)
        raise MethodError(f"method {method.value!r} does not apply to "
                          f"{type(params).__name__} (use {allowed})")
    return table[method]


def cdf(params, kappa, orientation=Orientation.PRODUCTION, method=None):
    """CDF of the composed error at ``kappa``.

    ``orientation`` is production (eps = v - u) or cost (eps* = v + u, via
    F*(kappa) = 1 - F(-kappa)).  ``method`` defaults to bvn for the
    truncated-normal family and emg for the exponential family.
    """
    fn = resolve_method(params, method)
    orientation = _coerce(Orientation, orientation, "orientation")
    if orientation is Orientation.COST:
        return 1.0 - fn(params, -kappa)
    return fn(params, kappa)


def pdf(params, eps, orientation=Orientation.PRODUCTION):
    """Density of the composed error; the cost density is f(-eps)."""
    orientation = _coerce(Orientation, orientation, "orientation")
    if orientation is Orientation.COST:
        eps = -eps
    if isinstance(params, TruncNormalComposedParams):
        return tn_pdf(params, eps)
    if isinstance(params, ExpComposedParams):
        return exp_pdf(params, eps)
    raise ParameterError(f"unsupported parameter type {type(params).__name__}")
