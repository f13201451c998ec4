import math
import warnings

import numpy as np
import pytest
from scipy import stats

from sfacdf.composed import (
    ExpComposedParams,
    ParameterError,
    TruncNormalComposedParams,
    exp_cdf_emg,
    tn_cdf_bvn,
)
from sfacdf.oracle import (
    QuadratureSettings,
    QuadratureWarning,
    SamplerSpec,
    empirical_quantile,
    mc_accuracy,
    quad_cdf,
    sample_composed,
    sample_exponential,
    sample_normal,
    sample_trunc_normal,
)
from sfacdf.tanh_sinh import tanh_sinh


def test_tanh_sinh_basic():
    r = tanh_sinh(math.exp, 0.0, 1.0)
    assert r.converged
    assert r.value == pytest.approx(math.e - 1.0, abs=1e-14)
    # endpoint singularity that tanh-sinh handles natively
    r = tanh_sinh(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0)
    assert r.value == pytest.approx(2.0, abs=1e-10)
    assert tanh_sinh(math.exp, 1.0, 0.0).value == pytest.approx(1.0 - math.e)
    assert tanh_sinh(math.exp, 2.0, 2.0).value == 0.0
    with pytest.raises(ValueError):
        tanh_sinh(math.exp, 0.0, math.inf)


def test_quad_cdf_reference_values():
    assert quad_cdf(ExpComposedParams(1.0, 1.0), 0.0) == pytest.approx(
        0.761578291865123, abs=1e-12)
    assert quad_cdf(TruncNormalComposedParams(1.0, 1.0, 1.0), -1.0) == \
        pytest.approx(0.5793276269657286, abs=1e-12)


def test_quad_cdf_full_output_and_far_points():
    params = TruncNormalComposedParams(-2.0, 0.5, 2.0)
    res = quad_cdf(params, 2.0, full_output=True)
    assert res.converged and res.error <= 1e-12 and res.evaluations > 0
    assert quad_cdf(params, -1e9) == 0.0
    assert quad_cdf(params, 1e9) == 1.0
    with pytest.raises(ParameterError):
        quad_cdf(params, math.nan)


def test_quad_cdf_warns_when_not_converged():
    params = ExpComposedParams(0.25, 4.0)
    settings = QuadratureSettings(level_max=3, abs_tol=1e-15)
    with pytest.warns(QuadratureWarning):
        quad_cdf(params, -3.0, settings)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = quad_cdf(params, -3.0, settings, full_output=True)
    assert not res.converged


@pytest.mark.parametrize("kwargs", [
    dict(level_max=2), dict(level_max=17), dict(level_max=12.0),
    dict(abs_tol=0.0), dict(abs_tol=math.nan), dict(lower_cut=5.0),
])
def test_quadrature_settings_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSettings(**kwargs)


def test_normal_and_exponential_samplers():
    x = sample_normal(2.0, 200_000, 1)
    assert abs(x.mean()) < 0.02 and x.std() == pytest.approx(2.0, rel=0.01)
    e = sample_exponential(4.0, 200_000, 2)
    assert e.min() >= 0.0 and e.mean() == pytest.approx(0.25, rel=0.01)
    with pytest.raises(ParameterError):
        sample_exponential(0.0, 10, 1)


@pytest.mark.parametrize("mu, sigma", [(1.0, 1.0), (-1.0, 2.0), (-8.0, 0.25),
                                       (-32.0, 1.0), (0.0, 1.0)])
def test_trunc_normal_sampler(mu, sigma):
    x = sample_trunc_normal(mu, sigma, 100_000, 3)
    assert x.min() >= 0.0
    dist = stats.truncnorm(-mu / sigma, np.inf, loc=mu, scale=sigma)
    assert x.mean() == pytest.approx(dist.mean(), rel=0.02)
    assert stats.kstest(x, dist.cdf).pvalue > 1e-3


def test_samplers_deterministic_per_seed():
    a = sample_trunc_normal(-2.0, 1.0, 1000, 42)
    b = sample_trunc_normal(-2.0, 1.0, 1000, 42)
    c = sample_trunc_normal(-2.0, 1.0, 1000, 43)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    p = ExpComposedParams(1.0, 1.0)
    assert np.array_equal(sample_composed(p, 500, 7), sample_composed(p, 500, 7))


@pytest.mark.parametrize("params, fn", [
    (TruncNormalComposedParams(-1.0, 2.0, 0.5), tn_cdf_bvn),
    (TruncNormalComposedParams(2.0, 1.0, 1.0), tn_cdf_bvn),
    (ExpComposedParams(2.0, 0.5), exp_cdf_emg),
])
def test_composed_draws_follow_analytic_cdf(params, fn):
    eps = sample_composed(params, 20_000, 5)
    vec = np.vectorize(lambda k: fn(params, k))
    assert stats.kstest(eps, vec).pvalue > 1e-3


def test_empirical_quantile_type1():
    draws = np.arange(100, 0, -1, dtype=float)
    assert empirical_quantile(draws, 0.07) == 7.0
    assert empirical_quantile(draws, 0.5) == 50.0
    assert empirical_quantile(draws, 0.501) == 51.0
    assert list(empirical_quantile(draws, [0.01, 0.99])) == [1.0, 99.0]
    assert empirical_quantile([3.0], 0.9) == 3.0
    with pytest.raises(ValueError):
        empirical_quantile(draws, 1.0)
    with pytest.raises(ValueError):
        empirical_quantile([], 0.5)


def test_sampler_spec():
    spec = SamplerSpec(ExpComposedParams(1.0, 1.0), 10, 3)
    assert spec.family == "exp"
    with pytest.raises(ValueError):
        SamplerSpec(ExpComposedParams(1.0, 1.0), 0, 3)
    with pytest.raises(ParameterError):
        SamplerSpec("not params", 10, 3)


def test_mc_accuracy_records_and_determinism():
    params = TruncNormalComposedParams(-8.0, 0.25, 2.0)
    ps = (0.1, 0.5, 0.9)
    a = mc_accuracy(params, ps, 20_000, 11)
    b = mc_accuracy(params, ps, 20_000, 11)
    assert a == b
    assert [r.p for r in a] == list(ps)
    r = a[1]
    assert r.family == "tn" and r.method == "bvn" and r.n == 20_000
    assert math.isnan(r.lam) and r.seed == 11
    assert r.abs_error == pytest.approx(abs(r.analytic - 0.5))
    assert mc_accuracy(params, ps, 20_000, 11, method="owen")[0].method == "owen"
    with pytest.raises(ValueError):
        mc_accuracy(params, ps, 999, 1)


def test_mc_accuracy_shrinks_like_inverse_sqrt_n():
    params = ExpComposedParams(1.0, 1.0)
    ps = np.linspace(0.05, 0.95, 19)

    def mean_error(n):
        errs = [r.abs_error for seed in range(8)
                for r in mc_accuracy(params, ps, n, seed)]
        return float(np.mean(errs))

    small, large = mean_error(10_000), mean_error(1_000_000)
    # expected ratio is 10; allow generous MC slack
    assert 4.0 < small / large < 25.0


def test_quad_cdf_examples():
    hn = TruncNormalComposedParams(0.0, 1.0, 1.0)
    assert quad_cdf(hn, 0.0) == pytest.approx(0.75, abs=1e-10)
    settings = QuadratureSettings()
    for params in (TruncNormalComposedParams(-2.0, 0.5, 2.0),
                   TruncNormalComposedParams(3.0, 1.0, 1.0)):
        k = -max(params.mu, 0.0) + 0.999 * settings.lower_cut * params.s
        assert 0.0 <= quad_cdf(params, k, settings) <= 1e-12


def test_quad_cdf_stable_under_refinement():
    rng = np.random.default_rng(31)
    coarse = QuadratureSettings(level_max=8)
    fine = QuadratureSettings(level_max=16)
    checked = 0
    for _ in range(40):
        if rng.uniform() < 0.5:
            params = TruncNormalComposedParams(rng.uniform(-6, 6),
                                               rng.uniform(0.2, 4),
                                               rng.uniform(0.2, 4))
            scale = params.s
        else:
            params = ExpComposedParams(rng.uniform(0.2, 8), rng.uniform(0.2, 4))
            scale = math.hypot(params.sigma_v, 1.0 / params.lam)
        k = rng.uniform(-4, 3) * scale
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", QuadratureWarning)
            res = quad_cdf(params, k, coarse, full_output=True)
        if not res.converged:
            continue
        checked += 1
        assert abs(quad_cdf(params, k, fine) - res.value) <= coarse.abs_tol
    assert checked >= 20


def test_sampler_moments_at_one_million():
    n = 10**6
    assert sample_trunc_normal(8.0, 0.25, n, 101).mean() == pytest.approx(
        8.0, abs=1e-3)
    assert sample_trunc_normal(0.0, 1.0, n, 102).mean() == pytest.approx(
        math.sqrt(2.0 / math.pi), abs=3e-3)
    assert sample_exponential(2.0, n, 103).mean() == pytest.approx(0.5,
                                                                   abs=2e-3)
    e = sample_exponential(1.0, n, 104)
    assert np.mean(e <= math.log(2.0)) == pytest.approx(0.5, abs=2e-3)
    assert sample_normal(1.0, n, 105).mean() == pytest.approx(0.0, abs=4e-3)
    assert sample_normal(2.0, n, 106).var() == pytest.approx(4.0, abs=0.03)


def test_empirical_quantile_examples():
    assert empirical_quantile([1.0, 2.0, 3.0, 4.0], 0.5) == 2.0
    draws = sample_normal(1.0, 10**6, 107)
    assert empirical_quantile(draws, 0.975) == pytest.approx(1.95996,
                                                             abs=0.01)


def test_mc_accuracy_deep_truncation_cell():
    params = TruncNormalComposedParams(-8.0, 0.2, 2.0)
    (rec,) = mc_accuracy(params, [0.5], 10**7, 108)
    assert rec.abs_error <= 1e-3


@pytest.mark.parametrize("draw", [
    lambda seed: sample_normal(1.5, 10**5, seed),
    lambda seed: sample_exponential(0.5, 10**5, seed),
    lambda seed: sample_trunc_normal(-4.0, 1.0, 10**5, seed),
    lambda seed: sample_trunc_normal(2.0, 1.0, 10**5, seed),
    lambda seed: sample_composed(TruncNormalComposedParams(-1.0, 2.0, 0.5),
                                 10**5, seed),
    lambda seed: sample_composed(ExpComposedParams(2.0, 0.5), 10**5, seed),
], ids=["normal", "exponential", "tn-tail", "tn-bulk", "composed-tn",
        "composed-exp"])
def test_samplers_two_sample_ks(draw):
    assert stats.ks_2samp(draw(201), draw(202)).pvalue > 1e-4


def test_mc_accuracy_median_scaling_on_grid():
    from sfacdf.cli import GridSpec
    grid = GridSpec()
    cells = grid.tn_cells() + grid.exp_cells()
    rng = np.random.default_rng(2024)
    picked = [cells[i] for i in rng.choice(len(cells), 20, replace=False)]

    def median_error(n, base):
        errs = [r.abs_error for i, params in enumerate(picked)
                for r in mc_accuracy(params, grid.p, n, base + i)]
        return float(np.median(errs))

    small, large = median_error(10**6, 5000), median_error(4 * 10**6, 6000)
    print(f"median abs_error n=1e6 {small:.3e}, n=4e6 {large:.3e}, "
          f"ratio {small / large:.3f}")
    assert small >= 2.0 * large
