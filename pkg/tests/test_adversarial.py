import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from deconvgof.adversarial import (PerturbationFamily, bump_count, bump_transform, check_nonnegative,
                                   g_bump, perturbed_density, phi_g_bump, sample_theta)
from deconvgof.errors import (ConfigError, DegeneratePerturbationError, NegativeDensityError,
                              UnsupportedRegimeError)
from deconvgof.models import DensityModel, NoiseModel, make_rng

F0 = DensityModel.gaussian(0.5, 1.0)
NOISE = NoiseModel.laplace(1, 0.5)


@pytest.fixture(scope="module")
def family():
    return PerturbationFamily(F0, NOISE, 2.0, 2.0, 0.1)


@pytest.fixture(scope="module")
def member(family):
    theta = sample_theta(family.M, 3)
    return theta, family.member(theta)


# the bump

def test_bump_branch_centres():
    assert g_bump(-0.75) == pytest.approx(math.exp(-1), rel=1e-15)
    assert g_bump(-0.25) == pytest.approx(-math.exp(-1), rel=1e-15)


def test_bump_vanishes_at_boundaries_and_outside():
    assert g_bump(np.array([-1.0, -0.5, 0.0])).tolist() == [0.0, 0.0, 0.0]
    assert g_bump(np.array([-3.0, -1.0001, 0.0001, 2.0])).tolist() == [0.0] * 4


@given(st.integers(1, 2 ** 21 - 1))
def test_bump_antisymmetry(k):
    # dyadic t keeps -0.5 +- t exact; near the ends the bump amplifies any
    # input rounding by about 1/d^2, so inexact mirrors would not compare
    t = k / 2 ** 22
    assert g_bump(-0.5 - t) == pytest.approx(-g_bump(-0.5 + t), rel=1e-12, abs=1e-300)
    assert g_bump(-0.5 - 0.49932607957758673) == pytest.approx(-g_bump(-0.5 + 0.49932607957758673), rel=1e-9)


def test_bump_integrates_to_zero():
    val, _ = integrate.quad(g_bump, -1.0, 0.0, points=[-0.75, -0.5, -0.25], epsabs=1e-13)
    assert abs(val) < 1e-10


def test_bump_transform_against_quadrature():
    for u in (0.5, 3.0, 17.0):
        re, _ = integrate.quad(lambda x: g_bump(x) * math.cos(u * x), -1, 0, limit=200, epsabs=1e-15)
        im, _ = integrate.quad(lambda x: g_bump(x) * math.sin(u * x), -1, 0, limit=200, epsabs=1e-15)
        assert phi_g_bump(u) == pytest.approx(complex(re, im), abs=1e-12)


def test_bump_transform_zero_and_hermitian():
    assert abs(phi_g_bump(0.0)) < 1e-12
    u = np.linspace(0.1, 80, 200)
    assert np.allclose(phi_g_bump(-u), np.conj(phi_g_bump(u)), atol=1e-15)


def test_bump_transform_decays_like_root_exponential():
    u = np.linspace(50, 500, 200)
    slope = np.polyfit(np.sqrt(u), np.log(np.abs(phi_g_bump(u))), 1)[0]
    assert slope < 0


def test_standard_bump_transform_even():
    w = np.array([0.0, 1.0, 10.0])
    assert np.allclose(bump_transform(w), bump_transform(-w))


# signs

def test_theta_values_and_determinism():
    a = sample_theta(5, 2)
    assert np.array_equal(a, sample_theta(5, 2))
    assert set(np.unique(sample_theta(1000, 1))) == {-1.0, 1.0}


def test_theta_balanced():
    assert abs(sample_theta(10_000, 4).mean()) < 0.03


def test_theta_requires_positive_m():
    with pytest.raises(ConfigError, match="M ≥ 1"):
        sample_theta(0, 1)


# the family

def test_bump_count_and_centres(family):
    assert family.M == 9 == bump_count(0.1)
    assert np.allclose(family.centers, 0.1 * np.arange(1, 10))
    assert family.amplitude == pytest.approx(0.1 ** 5)


def test_empty_theta_returns_base(family):
    m = family.member(())
    x = np.linspace(-3, 3, 13)
    assert np.array_equal(m.density(x), F0.density(x))


def test_member_integrates_to_one(member):
    _, m = member
    x = np.linspace(-15, 15, 600001)
    assert integrate.trapezoid(m.density(x), x) == pytest.approx(1.0, abs=1e-6)


def test_member_cf_at_zero(member):
    _, m = member
    assert m.cf(0.0) == pytest.approx(1.0, abs=1e-12)


def _panel_quadrature(fn, a, b, panels=400, order=30):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    x = (mid[:, None] + half[:, None] * nodes).ravel()
    return float(fn(x) @ (half[:, None] * weights).ravel())


def test_convolution_identity(family, member):
    # int (f_theta - f0)(x) g(y - x) dx, split at the kink of the Laplace density
    theta, m = member
    a, b = m.law.support
    y = np.linspace(-0.5, 1.5, 10)
    conv = []
    for yy in y:
        fn = lambda x: m.law.perturbation(x) * NOISE.density(yy - x)
        conv.append(sum(_panel_quadrature(fn, lo, hi) for lo, hi in ((a, yy), (yy, b)) if hi > lo))
    assert np.max(np.abs(np.array(conv) - family.observation_perturbation(theta, y))) < 1e-6


def test_separation_two_ways(family, member):
    theta, m = member
    a, b = m.law.support
    x = np.linspace(a, b, 200001)
    direct = integrate.trapezoid(m.law.perturbation(x) ** 2, x)
    assert family.separation_sq(theta) == pytest.approx(direct, abs=1e-6)
    assert family.separation_sq(theta) == pytest.approx(direct, rel=1e-6)


@pytest.mark.slow
def test_separation_scales_like_h_to_2beta():
    # ||f_theta - f0||^2 ~ M h^(2 beta + 2 sigma + 2) ||H_h||^2 ~ h^(2 beta)
    hs = (0.05, 0.1)
    seps = []
    for h in hs:
        fam = PerturbationFamily(F0, NOISE, 2.0, 2.0, h)
        seps.append(np.mean([fam.separation_sq(sample_theta(fam.M, s)) for s in range(4)]))
    slope = math.log(seps[1] / seps[0]) / math.log(hs[1] / hs[0])
    assert slope == pytest.approx(4.0, abs=0.3)


def test_member_sampler_matches_density(member):
    _, m = member
    x = m.sample(50_000, make_rng(8))
    assert x.mean() == pytest.approx(m.law.mean(), abs=0.02)
    edges = np.linspace(-2.0, 3.0, 21)
    hist, _ = np.histogram(x, bins=edges)
    expected = [integrate.quad(m.density, lo, hi, limit=200)[0] * x.size for lo, hi in zip(edges, edges[1:])]
    assert np.all(np.abs(hist - expected) < 5 * np.sqrt(np.array(expected)) + 5)


def test_negative_density_reported():
    # a narrow base cannot absorb bumps of this size
    base = DensityModel.gaussian(0.5, 0.05)
    fam = PerturbationFamily(base, NoiseModel.laplace(1, 3.0), 0.1, 1.0, 0.3)
    with pytest.raises(NegativeDensityError) as info:
        fam.member(np.ones(fam.M))
    assert info.value.value < 0 and 0.0 < info.value.x < 1.0


def test_check_nonnegative_returns_minimum(member):
    _, m = member
    assert check_nonnegative(m.law) >= 0


def test_degenerate_sampler():
    # very wide noise inflates H, so the rejection envelope dwarfs the density
    base = DensityModel.gaussian(0.5, 1.0)
    fam = PerturbationFamily(base, NoiseModel.laplace(1, 200.0), 0.1, 1.0, 0.2)
    m = fam.member(np.ones(fam.M), check=False)
    with pytest.raises(DegeneratePerturbationError, match="acceptance rate"):
        m.sample(1000, make_rng(1))


def test_exponential_noise_refused():
    with pytest.raises(UnsupportedRegimeError):
        PerturbationFamily(F0, NoiseModel.gaussian(0.5), 2.0, 2.0, 0.1)


def test_theta_validation(family):
    with pytest.raises(ConfigError, match="length"):
        family.member((1, -1))
    with pytest.raises(ConfigError):
        family.member((0,) * family.M)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 1000))
def test_perturbed_density_helper(seed):
    theta = sample_theta(9, seed)
    m = perturbed_density(F0, NOISE, 2.0, 2.0, 0.1, theta)
    x = np.linspace(-0.2, 1.2, 57)
    assert np.all(m.density(x) >= 0)
