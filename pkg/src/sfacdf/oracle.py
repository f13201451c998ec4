"""Independent checks for the analytic CDFs.

Two routes that share nothing with the closed forms except the densities:

* :func:`quad_cdf` integrates the composed-error density with tanh-sinh
  quadrature;
* :func:`mc_accuracy` simulates eps = v - u from separately sampled v and u
  and scores the analytic CDF at empirical quantiles, |F(Q*(p)) - p|.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import erfcx

from .composed import (
    DEFAULT_METHOD,
    ExpComposedParams,
    ParameterError,
    TruncNormalComposedParams,
    exp_pdf,
    resolve_method,
    tn_pdf,
)
from .tanh_sinh import QuadResult, tanh_sinh

__all__ = [
    "QuadratureSettings",
    "QuadResult",
    "QuadratureWarning",
    "quad_cdf",
    "SamplerSpec",
    "make_rng",
    "sample_normal",
    "sample_exponential",
    "sample_trunc_normal",
    "sample_composed",
    "empirical_quantile",
    "AccuracyRecord",
    "mc_accuracy",
]


# ---------------------------------------------------------------------------
# quadrature


class QuadratureWarning(RuntimeWarning):
    """Quadrature stopped at level_max without meeting abs_tol."""


@dataclass(frozen=True)
class QuadratureSettings:
    """Controls for :func:`quad_cdf`.

    ``lower_cut`` is the effective -inf in standardized units: the density
    is integrated from where the neglected mass is about
    exp(-lower_cut^2 / 2) (below 1e-320 at the default).
    """

    level_max: int = 12
    abs_tol: float = 1e-12
    lower_cut: float = -40.0

    def __post_init__(self):
        if not (isinstance(self.level_max, int) and 3 <= self.level_max <= 16):
            raise ValueError(f"level_max must be an integer in [3, 16], "
                             f"got {self.level_max!r}")
        if not (self.abs_tol > 0.0 and math.isfinite(self.abs_tol)):
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if not (self.lower_cut < 0.0 and math.isfinite(self.lower_cut)):
            raise ValueError(f"lower_cut must be negative, "
                             f"got {self.lower_cut!r}")


def _support(params, cut):
    """(lo, centre, hi): effective support and a point inside the bulk."""
    c = abs(cut)
    if isinstance(params, TruncNormalComposedParams):
        # E[u] = mu + sigma_u phi(h)/Phi(h), the ratio written via erfcx
        mean_u = params.mu + params.sigma_u * math.sqrt(2.0 / math.pi) / erfcx(
            -params.h / math.sqrt(2.0))
        lo = -max(params.mu, 0.0) - c * params.s
        return lo, -mean_u, c * params.sigma_v
    if isinstance(params, ExpComposedParams):
        # P(u > t) = exp(-lam t) reaches exp(-c^2/2) at t = c^2/(2 lam)
        lo = -c * params.sigma_v - 0.5 * c * c / params.lam
        return lo, -1.0 / params.lam, c * params.sigma_v
    raise ParameterError(f"unsupported parameter type {type(params).__name__}")


def _density(params):
    if isinstance(params, TruncNormalComposedParams):
        return lambda t: tn_pdf(params, t)
    return lambda t: exp_pdf(params, t)


def quad_cdf(params, kappa, settings=None, full_output=False):
    """CDF by tanh-sinh quadrature of the composed-error density.

    Below the bulk the density is integrated from the lower cut up to
    ``kappa``; above it the upper tail from ``kappa`` is integrated and
    subtracted from 1, so small tail probabilities keep their digits.

    Returns the estimate.  If the requested tolerance was not met a
    :class:`QuadratureWarning` is issued; ``full_output=True`` returns the
    :class:`QuadResult` instead (value, error, converged, evaluations).
    """
    settings = settings or QuadratureSettings()
    kappa = float(kappa)
    if math.isnan(kappa):
        raise ParameterError("kappa must not be NaN")
    lo, centre, hi = _support(params, settings.lower_cut)
    f = _density(params)
    run = dict(abs_tol=settings.abs_tol, level_max=settings.level_max)
    if kappa <= lo:
        res = QuadResult(0.0, 0.0, True, 0, 0)
    elif kappa >= hi:
        res = QuadResult(1.0, 0.0, True, 0, 0)
    elif kappa <= centre:
        res = tanh_sinh(f, lo, kappa, **run)
    else:
        upper = tanh_sinh(f, kappa, hi, **run)
        res = QuadResult(1.0 - upper.value, upper.error, upper.converged,
                         upper.evaluations, upper.level)
    if not res.converged:
        warnings.warn(f"quadrature did not reach abs_tol={settings.abs_tol:g} "
                      f"by level {settings.level_max} "
                      f"(error estimate {res.error:.3g})", QuadratureWarning,
                      stacklevel=2)
    if full_output:
        return res
    return res.value


# ---------------------------------------------------------------------------
# samplers


def make_rng(seed):
    """numpy Generator (PCG64) from an int, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _check_n(n):
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return n


def _check_positive(name, x):
    if not (math.isfinite(x) and x > 0.0):
        raise ParameterError(f"{name} must be finite and positive, got {x!r}")


def sample_normal(sigma, n, seed):
    """n draws from N(0, sigma^2)."""
    _check_positive("sigma", sigma)
    return sigma * make_rng(seed).standard_normal(_check_n(n))


def sample_exponential(lam, n, seed):
    """n draws from Exp(lam) by inversion, -log(1 - U)/lam."""
    _check_positive("lambda", lam)
    u = make_rng(seed).random(_check_n(n))
    return -np.log1p(-u) / lam


def _tail_exponential(alpha, n, rng):
    """Standard normal conditioned on z >= alpha >= 0.

    Accept-reject from a shifted exponential proposal alpha + Exp(rate)
    with the acceptance-optimal rate (alpha + sqrt(alpha^2 + 4))/2; the
    acceptance probability is above 0.75 for every alpha >= 0.
    """
    rate = 0.5 * (alpha + math.sqrt(alpha * alpha + 4.0))
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int((n - filled) * 1.4) + 16
        z = alpha + rng.exponential(1.0 / rate, m)
        keep = z[rng.random(m) <= np.exp(-0.5 * (z - rate) ** 2)]
        take = min(keep.size, n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def _naive_truncated(alpha, n, rng):
    """Standard normal conditioned on z >= alpha < 0, by plain rejection."""
    accept = 1.0 - 0.5 * math.erfc(-alpha / math.sqrt(2.0))
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int((n - filled) / accept * 1.1) + 16
        z = rng.standard_normal(m)
        keep = z[z >= alpha]
        take = min(keep.size, n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def sample_trunc_normal(mu, sigma, n, seed):
    """n draws from N(mu, sigma^2) truncated to [0, inf).

    With alpha = -mu/sigma the standardized lower bound, plain rejection is
    used while alpha < 0 (acceptance above 1/2) and the exponential-proposal
    sampler otherwise, so the acceptance rate never drops below 1/2.
    """
    _check_positive("sigma", sigma)
    if not math.isfinite(mu):
        raise ParameterError(f"mu must be finite, got {mu!r}")
    n = _check_n(n)
    rng = make_rng(seed)
    alpha = -mu / sigma
    if alpha < 0.0:
        z = _naive_truncated(alpha, n, rng)
    else:
        z = _tail_exponential(alpha, n, rng)
    return np.maximum(mu + sigma * z, 0.0)


@dataclass(frozen=True)
class SamplerSpec:
    """What to draw: family parameters, draw count and seed."""

    params: object
    n: int
    seed: int

    def __post_init__(self):
        _check_n(self.n)
        if not isinstance(self.params, (TruncNormalComposedParams,
                                        ExpComposedParams)):
            raise ParameterError("params must be a composed-error parameter "
                                 "object")

    @property
    def family(self):
        return family_name(self.params)


def family_name(params):
    if isinstance(params, TruncNormalComposedParams):
        return "tn"
    if isinstance(params, ExpComposedParams):
        return "exp"
    raise ParameterError(f"unsupported parameter type {type(params).__name__}")


def sample_composed(params, n, seed):
    """n draws of eps = v - u.

    ``seed`` feeds a SeedSequence whose first two spawned children drive the
    v stream and the u stream respectively, so the two are independent and
    each is reproducible on its own.
    """
    n = _check_n(n)
    if isinstance(seed, np.random.SeedSequence):
        root = seed
    else:
        root = np.random.SeedSequence(seed)
    v_seq, u_seq = root.spawn(2)
    v = sample_normal(params.sigma_v, n, v_seq)
    if isinstance(params, TruncNormalComposedParams):
        u = sample_trunc_normal(params.mu, params.sigma_u, n, u_seq)
    elif isinstance(params, ExpComposedParams):
        u = sample_exponential(params.lam, n, u_seq)
    else:
        raise ParameterError(f"unsupported parameter type "
                             f"{type(params).__name__}")
    return v - u


def _order_index(p, n):
    """ceil(p n) computed on the decimal value of p, so 0.07 * 100 is 7."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    k = math.ceil(Fraction(repr(float(p))) * n)
    return min(max(k, 1), n)


def empirical_quantile(draws, p):
    """Type-1 quantile: the ceil(p n)-th smallest draw.

    ``p`` may be a scalar or a sequence; a sequence returns an array.
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical_quantile needs at least one draw")
    scalar = np.ndim(p) == 0
    ps = [p] if scalar else list(p)
    ks = [_order_index(q, x.size) - 1 for q in ps]
    part = np.partition(x, sorted(set(ks)))
    out = part[ks]
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class AccuracyRecord:
    """One scored probability level: |F(Q*(p)) - p|."""

    family: str
    mu: float
    sigma_u: float
    lam: float
    sigma_v: float
    p: float
    q_star: float
    analytic: float
    abs_error: float
    method: str
    n: int
    seed: int


def mc_accuracy(params, p_list, n, seed, method=None):
    """Score the analytic CDF at empirical quantiles of simulated eps.

    Draws n values of eps = v - u (see :func:`sample_composed` for the
    stream derivation), takes the type-1 quantile Q*(p) for every p and
    returns one :class:`AccuracyRecord` per p with |F(Q*(p)) - p|.
    """
    n = int(n)
    if n < 1000:
        raise ValueError(f"n must be at least 1000, got {n}")
    fn = resolve_method(params, method)
    method_name = (method if method is not None
                   else DEFAULT_METHOD[type(params)])
    method_name = getattr(method_name, "value", method_name)
    eps = sample_composed(params, n, seed)
    qs = empirical_quantile(eps, list(p_list))
    fam = family_name(params)
    tn = fam == "tn"
    records = []
    for p, q in zip(p_list, qs):
        q = float(q)
        value = fn(params, q)
        records.append(AccuracyRecord(
            family=fam,
            mu=params.mu if tn else math.nan,
            sigma_u=params.sigma_u if tn else math.nan,
            lam=math.nan if tn else params.lam,
            sigma_v=params.sigma_v,
            p=float(p),
            q_star=q,
            analytic=value,
            abs_error=abs(value - p),
            method=method_name,
            n=n,
            seed=seed if isinstance(seed, int) else -1,
        ))
    return records
