import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from deconvgof.errors import ConfigError, OracleCapError, UnsupportedRegimeError
from deconvgof.functional import (EstimationSetup, bias_bound, estimate_d,
                                  estimate_d_pairwise_oracle, expected_dn, f_function,
                                  mean_f_of_y, observation_density, omega_sq, rate_phi,
                                  select_estimation_bandwidth, solve_eq22, squared_norm)
from deconvgof.models import (DensityModel, NoiseModel, Sample, SmoothnessClass,
                              SmoothnessDescriptor, observe)

NOISELESS = NoiseModel.none()
LAP1 = NoiseModel.laplace(1, 1.0)
GAUSS = DensityModel.gaussian(0.0, 1.0)


def setup(cls, noise):
    return EstimationSetup(cls, noise)


# regime tags

@pytest.mark.parametrize("cls,noise,regime", [
    (SmoothnessClass.sobolev(3.0), SmoothnessDescriptor.polynomial(2.0), "parametric"),
    (SmoothnessClass.sobolev(2.25), SmoothnessDescriptor.polynomial(2.0), "nonparametric"),
    (SmoothnessClass.supersmooth(1.0, 2.0), SmoothnessDescriptor.polynomial(6.0), "parametric"),
    (SmoothnessClass.supersmooth(1.0, 2.0), SmoothnessDescriptor.exponential(1.0, 1.0), "parametric"),
    (SmoothnessClass.supersmooth(2.0, 2.0), SmoothnessDescriptor.exponential(1.0, 2.0), "parametric"),
    (SmoothnessClass.supersmooth(1.0, 2.0), SmoothnessDescriptor.exponential(1.0, 2.0), "nonparametric"),
    (SmoothnessClass.supersmooth(1.0, 1.0), SmoothnessDescriptor.exponential(1.0, 2.0), "nonparametric"),
    (SmoothnessClass.sobolev(9.0), SmoothnessDescriptor.exponential(1.0, 2.0), "nonparametric"),
])
def test_regime(cls, noise, regime):
    assert setup(cls, noise).regime == regime


# estimate_d

def test_two_point_noiseless():
    res = estimate_d(Sample([0.0, 0.0]), NOISELESS, "sinc", 1.0)
    assert res.d_n == pytest.approx(1 / math.pi, rel=1e-12)


def test_n_below_two():
    with pytest.raises(ConfigError, match="n ≥ 2 required"):
        estimate_d(Sample([0.3]), LAP1, "sinc", 1.0)


def test_needs_h_or_setup():
    with pytest.raises(ConfigError):
        estimate_d(Sample([0.0, 1.0]), LAP1)


def test_permutation_invariance():
    y = observe(GAUSS, LAP1, 40, 3).values
    a = estimate_d(Sample(y), LAP1, "trapezoid", 0.4).d_n
    b = estimate_d(Sample(y[::-1].copy()), LAP1, "trapezoid", 0.4).d_n
    assert a == pytest.approx(b, rel=1e-13)


def test_two_point_matches_oracle():
    s = Sample([0.2, -1.1])
    fast = estimate_d(s, LAP1, "trapezoid", 0.5).d_n
    assert estimate_d_pairwise_oracle(s, LAP1, "trapezoid", 0.5) == pytest.approx(fast, rel=1e-10)


def test_duplicate_pair_term():
    # Y_1 = Y_2 contributes (2 pi)^-1 int |phi_K(hu)/cf_g(u)|^2 du = (1 + 2/3 + 1/5) / pi for sinc, h=1
    val = estimate_d(Sample([0.7, 0.7]), LAP1, "sinc", 1.0).d_n
    assert val == pytest.approx((1 + 2 / 3 + 1 / 5) / math.pi, rel=1e-6)


def test_oracle_n50():
    s = observe(GAUSS, LAP1, 50, 12)
    fast = estimate_d(s, LAP1, "trapezoid", 0.3).d_n
    slow = estimate_d_pairwise_oracle(s, LAP1, "trapezoid", 0.3)
    assert abs(slow - fast) / abs(slow) < 1e-6


def test_oracle_cap():
    with pytest.raises(OracleCapError):
        estimate_d_pairwise_oracle(Sample(np.zeros(201)), LAP1, "sinc", 1.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 30), st.floats(0.2, 1.5), st.sampled_from(["sinc", "trapezoid"]),
       st.integers(0, 10_000))
def test_oracle_equivalence_property(n, h, kernel, seed):
    s = observe(GAUSS, NoiseModel.laplace(2, 0.6), n, seed)
    fast = estimate_d(s, NoiseModel.laplace(2, 0.6), kernel, h, count=1024).d_n
    slow = estimate_d_pairwise_oracle(s, NoiseModel.laplace(2, 0.6), kernel, h, count=1024)
    assert fast == pytest.approx(slow, rel=1e-6, abs=1e-12)


def test_result_diagnostics():
    s = observe(GAUSS, LAP1, 200, 4)
    res = estimate_d(s, LAP1, setup=EstimationSetup.from_models(GAUSS, LAP1))
    assert res.regime == "parametric"
    assert res.bias_bound >= 0 and res.variance_proxy >= 0
    assert res.h == select_estimation_bandwidth(EstimationSetup.from_models(GAUSS, LAP1), 200)


# expected_dn and bias

def test_expected_dn_small_h():
    assert expected_dn(GAUSS, "trapezoid", 1e-3) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-4)


def test_expected_dn_sinc_exact_for_band_limited():
    # a cf supported in |u| <= 1/h: the noiseless Fejer density has cf (1 - |u|)_+
    class Fejer:
        @staticmethod
        def cf(u):
            return np.clip(1 - np.abs(u), 0, None).astype(complex)

    assert expected_dn(Fejer, "sinc", 0.5) == pytest.approx(1 / (3 * math.pi), rel=1e-6)


def test_expected_dn_below_squared_norm():
    for h in (0.1, 0.5, 1.0, 2.0):
        assert expected_dn(GAUSS, "trapezoid", h) <= squared_norm(GAUSS)


def test_squared_norm_closed_form():
    assert squared_norm(DensityModel.gaussian(0.3, 0.7)) == pytest.approx(1 / (2 * 0.7 * math.sqrt(math.pi)), rel=1e-12)
    assert squared_norm(DensityModel.laplace(1, 1.0)) == pytest.approx(0.25, rel=1e-12)


def test_bias_bound_formula():
    assert bias_bound(SmoothnessClass.sobolev(2.0, L=3.0), 0.5) == pytest.approx(3.0 / 16)
    assert bias_bound(SmoothnessClass.supersmooth(1.0, 2.0, L=2.0), 0.5) == pytest.approx(2 * math.exp(-8))


@pytest.mark.slow
def test_expected_dn_monte_carlo():
    # mean of d_n over 200 replicates matches the kernel-level expectation
    h, n, R = 0.3, 500, 200
    vals = [estimate_d(observe(GAUSS, LAP1, n, 1000 + r), LAP1, "trapezoid", h).d_n for r in range(R)]
    se = np.std(vals, ddof=1) / math.sqrt(R)
    assert abs(np.mean(vals) - expected_dn(GAUSS, "trapezoid", h)) < 3 * se


# F function and Omega

def test_f_function_noiseless_is_density():
    assert f_function(GAUSS, NOISELESS, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-10)


@pytest.mark.parametrize("y", [0.0, 1.0])
def test_f_function_laplace_closed_form(y):
    # (2 pi)^-1 int e^{-iyu} (1 + u^2) e^{-u^2/2} du = phi(y) (2 - y^2)
    expected = math.exp(-y * y / 2) / math.sqrt(2 * math.pi) * (2 - y * y)
    oracle, _ = integrate.quad(lambda u: math.cos(y * u) * (1 + u * u) * math.exp(-u * u / 2),
                               0, 40, epsabs=1e-14, epsrel=1e-13)
    assert oracle / math.pi == pytest.approx(expected, abs=1e-12)
    assert f_function(GAUSS, LAP1, y) == pytest.approx(expected, abs=1e-8)


def test_f_function_bounded():
    y = np.linspace(-6, 6, 61)
    bound = integrate.quad(lambda u: (1 + u * u) * math.exp(-u * u / 2), 0, 40)[0] / math.pi
    assert np.all(np.abs(f_function(GAUSS, LAP1, y)) <= bound + 1e-12)


def test_f_function_refuses_rough_signal():
    rough = DensityModel.laplace(1, 1.0, smoothness=SmoothnessClass.sobolev(1.0))
    with pytest.raises(UnsupportedRegimeError):
        f_function(rough, NoiseModel.laplace(3, 1.0), 0.0)
    with pytest.raises(UnsupportedRegimeError):
        omega_sq(rough, NoiseModel.laplace(3, 1.0))


def test_observation_density_convolution():
    # N(0,1) * N(0, 0.5^2) = N(0, 1.25)
    y = np.array([-2.0, 0.0, 1.3])
    p = observation_density(GAUSS, NoiseModel.gaussian(0.5), y)
    exact = np.exp(-y ** 2 / 2.5) / math.sqrt(2.5 * math.pi)
    assert np.allclose(p, exact, atol=1e-12)


def test_mean_f_equals_squared_norm():
    assert mean_f_of_y(GAUSS, LAP1) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-8)


def test_omega_noiseless_closed_form():
    expected = 1 / (2 * math.pi * math.sqrt(3)) - 1 / (4 * math.pi)
    assert expected == pytest.approx(0.01231, abs=5e-6)
    assert omega_sq(GAUSS, NOISELESS) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("scale", [0.5, 1.0, 2.0])
def test_omega_nonnegative(scale):
    assert omega_sq(DensityModel.gaussian(0.0, scale), NoiseModel.laplace(1, 0.5)) >= 0


# bandwidth schedules

def test_sobolev_polynomial_bandwidth():
    s = setup(SmoothnessClass.sobolev(1.0), SmoothnessDescriptor.polynomial(2.0))
    assert select_estimation_bandwidth(s, 1e4) == pytest.approx(10 ** (-8 / 13), rel=1e-12)
    assert 10 ** (-8 / 13) == pytest.approx(0.24245, abs=5e-6)


def test_sobolev_exponential_bandwidth():
    s = setup(SmoothnessClass.sobolev(1.0), SmoothnessDescriptor.exponential(1.0, 2.0))
    expected = (10 - 0.75 * math.log(10)) ** -0.5
    assert expected == pytest.approx(0.34767, abs=5e-6)
    assert select_estimation_bandwidth(s, math.exp(20)) == pytest.approx(expected, rel=1e-12)


def test_sobolev_exponential_small_n():
    # log n - 11 log(log n) < 0 at log n = 10
    s = setup(SmoothnessClass.sobolev(5.0), SmoothnessDescriptor.exponential(0.5, 1.0))
    with pytest.raises(ConfigError, match="larger n"):
        select_estimation_bandwidth(s, math.exp(10))


def test_parametric_sobolev_geometric_mean():
    s = setup(SmoothnessClass.sobolev(4.0), SmoothnessDescriptor.polynomial(2.0))
    n = 5000.0
    assert select_estimation_bandwidth(s, n) == pytest.approx(math.sqrt(n ** (-1 / 9) * n ** (-1 / 16)))


def test_supersmooth_exponential_delegates():
    s = setup(SmoothnessClass.supersmooth(1.0, 1.0), SmoothnessDescriptor.exponential(1.0, 2.0))
    assert select_estimation_bandwidth(s, math.exp(100)) == solve_eq22(1.0, 1.0, 1.0, 2.0, math.exp(100))


@pytest.mark.parametrize("s", [
    setup(SmoothnessClass.sobolev(1.0), SmoothnessDescriptor.polynomial(2.0)),
    setup(SmoothnessClass.sobolev(4.0), SmoothnessDescriptor.polynomial(2.0)),
    setup(SmoothnessClass.sobolev(1.0), SmoothnessDescriptor.exponential(0.5, 2.0)),
    setup(SmoothnessClass.supersmooth(0.4, 2.0), SmoothnessDescriptor.polynomial(2.0)),
    setup(SmoothnessClass.supersmooth(1.0, 2.0), SmoothnessDescriptor.exponential(0.5, 1.0)),
    setup(SmoothnessClass.supersmooth(1.0, 1.0), SmoothnessDescriptor.exponential(1.0, 2.0)),
])
def test_bandwidth_nonincreasing(s):
    ns = np.geomspace(1e3, 1e12, 30)
    hs = [select_estimation_bandwidth(s, n) for n in ns]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(hs, hs[1:]))


# the supersmooth bandwidth equation

def test_bandwidth_equation_worked_instance():
    n = math.exp(100)
    rhs = 100 - math.log(100) ** 2
    closed = (2 + math.sqrt(4 + 8 * rhs)) / (2 * rhs)   # rhs h^2 - 2h - 2 = 0
    h = solve_eq22(1.0, 1.0, 1.0, 2.0, n)
    assert h == pytest.approx(closed, abs=1e-12)
    assert h == pytest.approx(0.17252, abs=1e-4)


def test_bandwidth_equation_merged_terms():
    n = 1e30
    rhs = math.log(n) - math.log(math.log(n)) ** 2
    assert solve_eq22(0.7, 1.5, 0.7, 1.5, n) == pytest.approx((4 * 0.7 / rhs) ** (1 / 1.5), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.2, 3), st.floats(0.05, 5), st.floats(0.2, 3), st.floats(20, 700))
def test_bandwidth_equation_residual(alpha, r, gamma, s, log_n):
    n = math.exp(log_n)
    rhs = log_n - math.log(log_n) ** 2
    h = solve_eq22(alpha, r, gamma, s, n)
    assert abs(2 * alpha / h ** r + 2 * gamma / h ** s - rhs) < 1e-10 * max(1.0, rhs)


def test_bandwidth_equation_monotone():
    base = solve_eq22(1.0, 1.0, 1.0, 2.0, 1e20)
    assert solve_eq22(1.0, 1.0, 1.0, 2.0, 1e30) < base
    assert solve_eq22(1.5, 1.0, 1.0, 2.0, 1e20) > base
    assert solve_eq22(1.0, 1.0, 1.5, 2.0, 1e20) > base


def test_bandwidth_equation_small_n():
    # x - (log x)^2 > 0 for every x > 1, so only n <= e leaves the right side undefined
    with pytest.raises(ConfigError, match="too small"):
        solve_eq22(1.0, 1.0, 1.0, 1.0, 2.0)


# rates

def test_rate_sobolev_polynomial():
    s = setup(SmoothnessClass.sobolev(1.0), SmoothnessDescriptor.polynomial(2.0))
    assert rate_phi(s, 1e4) == pytest.approx(10 ** (-16 / 13), rel=1e-12)
    assert 10 ** (-16 / 13) == pytest.approx(0.05878, abs=5e-6)


def test_rate_parametric():
    s = setup(SmoothnessClass.supersmooth(0.4, 2.0), SmoothnessDescriptor.polynomial(2.0))
    assert rate_phi(s, 400.0) == pytest.approx(0.05)


def test_rate_sobolev_exponential():
    s = setup(SmoothnessClass.sobolev(1.0, L=1.0), SmoothnessDescriptor.exponential(1.0, 2.0))
    assert rate_phi(s, math.exp(20)) == pytest.approx(0.1, rel=1e-12)
