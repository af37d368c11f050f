import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from pppcov.errors import DomainError, InvalidArgumentError
from pppcov.fading import (DB_TO_NEPER, DoubleShadowedParams, GhqMixture, KappaMuShadowedParams,
                           build_gamma_mixture, build_ghq_mixture, double_shadowed_ccdf,
                           double_shadowed_pdf_exact, double_shadowed_pdf_ghq, kms_ccdf, kms_pdf,
                           sample_double_shadowed, sample_kms, single_term_mixture)
from pppcov.mathkit import integrate_semi_infinite

params_st = st.builds(KappaMuShadowedParams, st.sampled_from([0.5, 1.0, 2.0, 5.3]),
                      st.integers(1, 6), st.integers(1, 6))


def _components(mix):
    return [(c.weight, c.shape, c.scale) for c in mix.components]


def test_params_validation():
    with pytest.raises(InvalidArgumentError):
        KappaMuShadowedParams(-1.0, 1, 1)
    with pytest.raises(InvalidArgumentError):
        KappaMuShadowedParams(1.0, 0, 1)
    with pytest.raises(InvalidArgumentError):
        KappaMuShadowedParams(1.0, 1, 1.5)
    with pytest.raises(InvalidArgumentError):
        DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), -2.0)


@given(params_st)
def test_omegas(p):
    assert p.omega1 + p.omega2 == pytest.approx(1.0, abs=1e-15)
    assert 0 < p.omega1 <= 1 and 0 < p.omega2 <= 1 and 0 < p.omega3 <= 1


def test_mixture_example_mu_le_m():
    got = _components(build_gamma_mixture(KappaMuShadowedParams(1.0, 1, 2)))
    np.testing.assert_allclose(got, [(1 / 3, 2, 3 / 4), (2 / 3, 1, 3 / 4)], rtol=1e-14)


def test_mixture_example_mu_gt_m():
    got = _components(build_gamma_mixture(KappaMuShadowedParams(1.0, 2, 1)))
    np.testing.assert_allclose(got, [(-1 / 2, 1, 1 / 4), (3 / 2, 1, 3 / 4)], rtol=1e-14)


@pytest.mark.parametrize("kappa", [0.0, 0.3, 1.0, 7.0])
def test_mixture_rayleigh_reduction(kappa):
    got = _components(build_gamma_mixture(KappaMuShadowedParams(kappa, 1, 1)))
    np.testing.assert_allclose(got, [(1.0, 1, 1.0)], rtol=1e-14)


def test_kappa_zero_with_mu_gt_m_rejected():
    with pytest.raises(DomainError, match="kappa must be > 0"):
        build_gamma_mixture(KappaMuShadowedParams(0.0, 3, 1))


@given(params_st)
def test_mixture_identities(p):
    mix = build_gamma_mixture(p)
    assert abs(mix.total_weight() - 1.0) <= 1e-10
    assert abs(mix.mean() - 1.0) <= 1e-10
    assert all(c.shape >= 1 and c.scale > 0 for c in mix.components)
    if p.mu <= p.m:
        assert all(c.weight >= 0 for c in mix.components)


def test_pdf_examples():
    expo = build_gamma_mixture(KappaMuShadowedParams(1.0, 1, 1))
    assert kms_pdf(expo, 0.0) == 1.0
    mix = build_gamma_mixture(KappaMuShadowedParams(1.0, 2, 1))
    by_hand = -0.5 * 4.0 * math.exp(-4.0) + 1.5 * (4 / 3) * math.exp(-4 / 3)
    assert kms_pdf(mix, 1.0) == pytest.approx(by_hand, rel=1e-14)


def test_pdf_matches_scipy_gamma_mixture():
    mix = build_gamma_mixture(KappaMuShadowedParams(2.0, 2, 4))
    h = np.linspace(0.0, 8.0, 81)
    ref = sum(c.weight * stats.gamma.pdf(h, c.shape, scale=c.scale) for c in mix.components)
    np.testing.assert_allclose(kms_pdf(mix, h), ref, atol=1e-14)


@given(params_st)
def test_pdf_normalised(p):
    mix = build_gamma_mixture(p)
    total = integrate_semi_infinite(lambda x: kms_pdf(mix, x), 0.0, tol=1e-11, scale=max(mix.scales))
    assert total == pytest.approx(1.0, abs=1e-8)


def test_ccdf_examples():
    expo = build_gamma_mixture(KappaMuShadowedParams(3.0, 1, 1))
    assert kms_ccdf(expo, 0.0) == 1.0
    assert kms_ccdf(expo, math.log(2.0)) == pytest.approx(0.5, abs=1e-15)


@given(params_st)
def test_ccdf_monotone_and_bounded(p):
    mix = build_gamma_mixture(p)
    h = np.linspace(0.0, 30.0, 301)
    c = kms_ccdf(mix, h)
    assert c[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all((c >= 0) & (c <= 1))
    assert np.all(np.diff(c) <= 1e-14)


@given(params_st, st.sampled_from([0.5, 1.0, 2.0]))
def test_ccdf_derivative_is_minus_pdf(p, h):
    mix = build_gamma_mixture(p)
    eps = 1e-5
    deriv = (kms_ccdf(mix, h + eps) - kms_ccdf(mix, h - eps)) / (2 * eps)
    assert deriv == pytest.approx(-kms_pdf(mix, h), abs=1e-6)


def test_domain_errors():
    mix = build_gamma_mixture(KappaMuShadowedParams(1.0, 1, 1))
    with pytest.raises(DomainError):
        kms_pdf(mix, -1.0)
    with pytest.raises(DomainError):
        kms_ccdf(mix, -0.1)
    with pytest.raises(DomainError):
        double_shadowed_pdf_exact(DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 2.0), 0.0)


def test_sigma_tilde():
    d = DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 4.0)
    assert d.sigma_tilde == 4.0 * math.log(10.0) / 10.0 == 4.0 * DB_TO_NEPER


def test_ghq_mixture_examples():
    zero = build_ghq_mixture(DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 0.0), 7)
    assert np.all(zero.b == 1.0)
    assert math.fsum(zero.a) == pytest.approx(1.0, abs=1e-15)
    # sigma_tilde = 1 means sigma_db = 10/ln(10)
    two = build_ghq_mixture(DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 10.0 / math.log(10.0)), 2)
    np.testing.assert_allclose(two.b, [math.exp(-1), math.exp(1)], rtol=1e-14)
    np.testing.assert_allclose(two.a, [0.5, 0.5], rtol=1e-14)
    full = build_ghq_mixture(DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 4.0))
    assert full.ghq_order == 32 and len(full.terms) == 32
    assert abs(math.fsum(full.a) - 1.0) <= 1e-12


def test_ghq_mixture_is_immutable():
    mix = build_ghq_mixture(DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 4.0))
    with pytest.raises(ValueError):
        mix.a[0] = 2.0


@pytest.mark.parametrize("sigma", [2.0, 4.0, 8.0])
def test_ghq_pdf_normalised(sigma):
    mix = build_ghq_mixture(DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), sigma))
    # integrate each scaled density over its own scale so every term is resolved
    total = math.fsum(a * integrate_semi_infinite(lambda x, b=b: double_shadowed_pdf_ghq(
        GhqMixture(np.array([1.0]), np.array([b]), mix.base, 1), x), 0.0, tol=1e-12, scale=b)
        for a, b in mix.terms)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_ghq_pdf_sigma_zero_is_kms():
    params = DoubleShadowedParams(KappaMuShadowedParams(2.0, 2, 4), 0.0)
    h = np.geomspace(0.01, 20.0, 50)
    np.testing.assert_allclose(double_shadowed_pdf_ghq(build_ghq_mixture(params), h),
                               kms_pdf(build_gamma_mixture(params.base), h), rtol=1e-14)


def test_ghq_pdf_close_to_exact_at_4db():
    params = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    h = np.geomspace(0.01, 20.0, 200)
    exact = np.array([double_shadowed_pdf_exact(params, x) for x in h])
    assert np.max(np.abs(double_shadowed_pdf_ghq(build_ghq_mixture(params, 32), h) - exact)) <= 1e-3


def test_ghq_error_improves_with_order():
    params = DoubleShadowedParams(KappaMuShadowedParams(2.0, 2, 4), 8.0)
    h = np.geomspace(0.01, 20.0, 120)
    exact = np.array([double_shadowed_pdf_exact(params, x) for x in h])
    err = {n: np.max(np.abs(double_shadowed_pdf_ghq(build_ghq_mixture(params, n), h) - exact)) for n in (8, 32)}
    assert err[32] <= err[8]


def test_exact_pdf_matches_product_density_quadrature():
    # mu = m = 1: H = X * E with E ~ Exp(1), X lognormal; f(h) = E_X[exp(-h/X)/X]
    params = DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 6.0)
    sig = params.sigma_tilde
    for h in (0.05, 0.5, 1.0, 3.0, 10.0):
        ref, _ = integrate.quad(lambda z: stats.norm.pdf(z) * math.exp(-h / math.exp(sig * z) - sig * z),
                                -12.0, 12.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert double_shadowed_pdf_exact(params, h) == pytest.approx(ref, abs=1e-10)


def test_exact_pdf_small_sigma_limit():
    params = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 0.01)
    mix = build_gamma_mixture(params.base)
    for h in (0.5, 1.0, 2.0):
        assert double_shadowed_pdf_exact(params, h) == pytest.approx(kms_pdf(mix, h), abs=1e-3)


def test_exact_pdf_normalised():
    params = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    total = integrate.quad(lambda y: math.exp(y) * double_shadowed_pdf_exact(params, math.exp(y)),
                           -25.0, 6.0, epsabs=1e-10, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-6)


def test_ds_ccdf_properties():
    params = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    mix = build_ghq_mixture(params)
    assert double_shadowed_ccdf(mix, 0.0) == pytest.approx(1.0, abs=1e-14)
    h = np.linspace(0.0, 40.0, 401)
    c = double_shadowed_ccdf(mix, h)
    assert np.all(np.diff(c) <= 1e-15)
    flat = build_ghq_mixture(DoubleShadowedParams(params.base, 0.0))
    np.testing.assert_allclose(double_shadowed_ccdf(flat, h), kms_ccdf(mix.base, h), atol=1e-15)


@pytest.mark.parametrize("h", [0.1, 1.0, 4.0])
def test_ds_ccdf_is_tail_of_ghq_pdf(h):
    mix = build_ghq_mixture(DoubleShadowedParams(KappaMuShadowedParams(2.0, 2, 4), 4.0))
    tail = math.fsum(a * integrate_semi_infinite(lambda x, b=b: double_shadowed_pdf_ghq(
        GhqMixture(np.array([1.0]), np.array([b]), mix.base, 1), x), h, tol=1e-12, scale=b)
        for a, b in mix.terms)
    assert double_shadowed_ccdf(mix, h) == pytest.approx(tail, abs=1e-8)


@given(st.floats(0.05, 20.0), st.floats(0.2, 5.0))
def test_scaling_consistency(h, b):
    base = build_gamma_mixture(KappaMuShadowedParams(1.0, 2, 3))
    one = GhqMixture(np.array([1.0]), np.array([b]), base, 1)
    assert double_shadowed_ccdf(one, h) == kms_ccdf(base, h / b)


def test_single_term_mixture():
    base = build_gamma_mixture(KappaMuShadowedParams(1.0, 2, 1))
    one = single_term_mixture(base)
    assert one.terms == [(1.0, 1.0)] and one.base is base


def test_sampler_moments_and_exponential_reduction():
    rng = np.random.default_rng(11)
    x = sample_kms(KappaMuShadowedParams(2.0, 3, 2), rng, 1_000_000)
    assert abs(x.mean() - 1.0) <= 0.005
    y = sample_kms(KappaMuShadowedParams(1.0, 1, 1), rng, 1_000_000)
    assert abs(np.mean(y > math.log(2.0)) - 0.5) <= 0.002


def test_sampler_ks_mu_gt_m():
    p = KappaMuShadowedParams(1.0, 2, 1)
    x = sample_kms(p, np.random.default_rng(3), 1_000_000)
    mix = build_gamma_mixture(p)
    d = stats.kstest(x, lambda v: 1.0 - kms_ccdf(mix, v)).statistic
    assert d <= 0.002


def test_double_shadowed_sampler():
    params = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    x = sample_double_shadowed(params, np.random.default_rng(5), 1_000_000)
    assert x.mean() == pytest.approx(math.exp(params.sigma_tilde ** 2 / 2), rel=0.01)
    mix = build_ghq_mixture(params)
    assert stats.kstest(x, lambda v: 1.0 - double_shadowed_ccdf(mix, v)).statistic <= 0.002


def test_sigma_zero_sampler_matches_kms_in_law():
    base = KappaMuShadowedParams(1.0, 2, 2)
    a = sample_double_shadowed(DoubleShadowedParams(base, 0.0), np.random.default_rng(1), 200_000)
    b = sample_kms(base, np.random.default_rng(2), 200_000)
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_scalar_sampling():
    rng = np.random.default_rng(0)
    assert isinstance(sample_kms(KappaMuShadowedParams(1.0, 1, 1), rng), float)
    assert sample_double_shadowed(DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 3.0), rng) >= 0
