"""Estimation of the quadratic functional ``d = int f^2`` from noisy data.

The estimator is the bias-reduced U-statistic

    d_n = 1 / (n (n-1)) sum_{k != j} < K_{n,h}(. - Y_k), K_{n,h}(. - Y_j) >

with deconvolution kernel ``K_{n,h}`` whose Fourier transform is
``phi_kernel(h u) / cf_noise(u)``. By Plancherel the double sum collapses to a
single frequency integral of ``|w(u)|^2 (|sum_k exp(i u Y_k)|^2 - n)``, which
costs O(n G) on a grid of G frequencies instead of O(n^2 G).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericalError, OracleCapError, UnsupportedRegimeError
from .models import DensityModel, NoiseModel, Sample, SmoothnessClass, SmoothnessDescriptor
from .spectral import (DEFAULT_GRID_COUNT, DEFAULT_KERNEL, FrequencyGrid, KernelSpec,
                       deconv_weight, exp_sums, integrate, integrate_half_line, make_grid)

__all__ = [
    "EstimationSetup",
    "EstimateResult",
    "estimate_d",
    "estimate_d_pairwise_oracle",
    "expected_dn",
    "squared_norm",
    "f_function",
    "observation_density",
    "omega_sq",
    "mean_f_of_y",
    "select_estimation_bandwidth",
    "solve_eq22",
    "solve_boundary_bandwidth",
    "rate_phi",
    "bias_bound",
    "ORACLE_CAP",
]

ORACLE_CAP = 200
TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# setups and regimes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimationSetup:
    """A cell of the rate tables: signal class crossed with noise decay."""

    density_class: SmoothnessClass
    noise: SmoothnessDescriptor

    @property
    def noise_tag(self) -> str:
        # direct observations behave like polynomial noise of order 0
        return "polynomial" if self.noise.tag == "none" else self.noise.tag

    @property
    def sigma(self) -> float:
        return self.noise.effective_sigma

    @property
    def cell(self) -> tuple:
        return self.density_class.tag, self.noise_tag

    @property
    def regime(self) -> str:
        c, g = self.density_class, self.noise
        if self.cell == ("sobolev", "polynomial"):
            return "parametric" if c.beta > self.sigma + 0.25 else "nonparametric"
        if self.cell == ("supersmooth", "polynomial"):
            return "parametric"
        if self.cell == ("supersmooth", "exponential"):
            if c.r > g.s or (c.r == g.s and c.alpha > g.gamma):
                return "parametric"
        return "nonparametric"

    @property
    def f_exists(self) -> bool:
        """Whether ``cf_f / conj(cf_noise)`` is integrable, so F is defined."""
        c, g = self.density_class, self.noise
        if self.cell == ("sobolev", "polynomial"):
            return c.beta >= self.sigma
        if self.cell == ("supersmooth", "polynomial"):
            return True
        if self.cell == ("supersmooth", "exponential"):
            return c.r > g.s or (c.r == g.s and c.alpha > g.gamma)
        return False

    @property
    def exponents(self) -> dict:
        """Rate exponents in ``n`` where the cell has polynomial rates."""
        c = self.density_class
        if self.cell == ("sobolev", "polynomial"):
            denom = 4 * c.beta + 4 * self.sigma + 1
            return {"bandwidth": -2.0 / denom, "estimation": -4.0 * c.beta / denom,
                    "testing": -2.0 * c.beta / denom}
        if self.regime == "parametric":
            return {"estimation": -0.5}
        return {}

    @classmethod
    def from_models(cls, f: DensityModel, noise: NoiseModel) -> "EstimationSetup":
        return cls(f.smoothness_class(), noise.smoothness)


@dataclass(frozen=True)
class EstimateResult:
    """Value of ``d_n`` with the bandwidth used and cheap diagnostics.

    ``bias_bound`` is ``L h^(2 beta)`` (Sobolev) or ``L exp(-2 alpha / h^r)``
    (supersmooth) when a setup is known. ``variance_proxy`` is the plug-in
    value of the degenerate U-statistic variance
    ``2 ||p||^2 (2 pi)^-1 int |w|^4 du / (n (n-1))`` with ``||p||^2`` itself
    estimated from the data.
    """

    d_n: float
    h: float
    n: int
    kernel: str
    regime: Optional[str] = None
    bias_bound: Optional[float] = None
    variance_proxy: Optional[float] = None


def bias_bound(cls: SmoothnessClass, h: float) -> float:
    """Upper bound on ``|E d_n - d|`` over the class."""
    if cls.tag == "sobolev":
        return cls.L * h ** (2.0 * cls.beta)
    return cls.L * math.exp(-2.0 * cls.alpha / h ** cls.r)


# --------------------------------------------------------------------------
# the estimator
# --------------------------------------------------------------------------

def _half_grid_weights(h, kernel, noise, count):
    grid = make_grid(h, kernel, count)
    u = grid.half_nodes
    w = deconv_weight(u, KernelSpec(kernel, h), noise)
    return grid, u, w


def _u_statistic_integrand(grid, y):
    """``|S(u)|^2 - n`` on the nonnegative nodes."""
    s = exp_sums(0.0, grid.du, grid.half_nodes.size, y)
    return s, (s.real ** 2 + s.imag ** 2) - y.size


def estimate_d(sample: Sample, noise: NoiseModel, kernel: str = DEFAULT_KERNEL,
               h: float = None, count: int = DEFAULT_GRID_COUNT,
               setup: Optional[EstimationSetup] = None) -> EstimateResult:
    """Bias-reduced U-statistic estimate of ``int f^2``.

    If ``h`` is omitted it is chosen by :func:`select_estimation_bandwidth`,
    which then needs ``setup``.
    """
    sample.require(2)
    n = sample.n
    if h is None:
        if setup is None:
            raise ConfigError("either a bandwidth h or an estimation setup is required")
        h = select_estimation_bandwidth(setup, n)
    grid, u, w = _half_grid_weights(h, kernel, noise, count)
    w2 = w.real ** 2 + w.imag ** 2
    _, centred = _u_statistic_integrand(grid, sample.values)
    scale = TWO_PI * n * (n - 1)
    d_n = float((w2 * centred) @ grid.half_weights) / scale

    phik2 = KernelSpec(kernel, h).phi(u) ** 2
    p_norm = max(float((phik2 * centred) @ grid.half_weights) / scale, 0.0)
    w4 = float((w2 ** 2) @ grid.half_weights) / TWO_PI
    var_proxy = 2.0 * p_norm * w4 / (n * (n - 1))

    return EstimateResult(
        d_n=d_n, h=float(h), n=n, kernel=KernelSpec(kernel, h).kind,
        regime=setup.regime if setup else None,
        bias_bound=bias_bound(setup.density_class, h) if setup else None,
        variance_proxy=var_proxy,
    )


def estimate_d_pairwise_oracle(sample: Sample, noise: NoiseModel, kernel: str = DEFAULT_KERNEL,
                               h: float = 1.0, count: int = DEFAULT_GRID_COUNT,
                               cap: int = ORACLE_CAP) -> float:
    """Literal double sum over ordered pairs ``k != j``, one quadrature per pair.

    Reference implementation for testing :func:`estimate_d`; O(n^2 G).
    """
    sample.require(2)
    n = sample.n
    if n > cap:
        raise OracleCapError(f"pairwise oracle is capped at n = {cap} (got n = {n})")
    grid = make_grid(h, kernel, count)
    u = grid.nodes
    w = deconv_weight(u, KernelSpec(kernel, h), noise)
    w2 = np.abs(w) ** 2
    y = sample.values
    total = 0.0 + 0.0j
    for k in range(n):
        diffs = y[k] - np.delete(y, k)
        total += integrate(grid, np.exp(1j * np.outer(diffs, u)) * w2).sum()
    total /= TWO_PI * n * (n - 1)
    if abs(total.imag) >= 1e-9 * max(1.0, abs(total.real)):
        raise NumericalError(f"pairwise sum has imaginary part {total.imag:.3e}")
    return float(total.real)


def expected_dn(f: DensityModel, kernel: str = DEFAULT_KERNEL, h: float = 1.0,
                count: int = DEFAULT_GRID_COUNT) -> float:
    """``E d_n = ||K_h * f||^2 = (2 pi)^-1 int phi_kernel(h u)^2 |cf_f(u)|^2 du``.

    The expectation does not depend on the noise.
    """
    grid = make_grid(h, kernel, count)
    u = grid.half_nodes
    phik = KernelSpec(kernel, h).phi(u)
    cf = f.cf(u)
    vals = phik ** 2 * (cf.real ** 2 + cf.imag ** 2)
    return float(vals @ grid.half_weights) / TWO_PI


def squared_norm(f) -> float:
    """``int f^2 = pi^-1 int_0^inf |cf(u)|^2 du`` by adaptive quadrature."""
    return integrate_half_line(lambda u: np.exp(2.0 * f.law.log_abs_cf(u))) / math.pi


# --------------------------------------------------------------------------
# F function and efficiency constant
# --------------------------------------------------------------------------

def _require_f_exists(f: DensityModel, noise: NoiseModel) -> EstimationSetup:
    setup = EstimationSetup.from_models(f, noise)
    if not setup.f_exists:
        raise UnsupportedRegimeError(
            f"F is not defined for a {setup.density_class.tag} signal under "
            f"{setup.noise.tag} noise with these parameters (signal not smoother than noise)")
    return setup


def _decay_cutoff(log_abs, tol: float, start: float = 1e-2, growth: float = 1.02,
                  limit: float = 1e8) -> float:
    """Frequency beyond which ``exp(log_abs(u)) < tol`` for good."""
    u = start
    log_tol = math.log(tol)
    below = 0
    cutoff = None
    while u < limit:
        if float(log_abs(u)) < log_tol:
            if cutoff is None:
                cutoff = u
            below += 1
            # require the function to stay below over a further 50% stretch
            if u > 1.5 * cutoff:
                return cutoff
        else:
            cutoff = None
            below = 0
        u *= growth
    raise NumericalError(f"integrand does not fall below {tol:g} before u = {limit:g}")


def _window(f: DensityModel, noise: NoiseModel, width_sd: float = 20.0):
    centre = f.law.mean() + noise.law.mean()
    sd = math.sqrt(f.law.variance() + noise.law.variance())
    return centre - width_sd * sd, centre + width_sd * sd, sd


def _alias_half_width(f, noise, y) -> float:
    # the trapezoid sum in u is periodic in y; the period must cover both the
    # evaluation points and the region where the target function lives
    lo, hi, _ = _window(f, noise)
    return float(np.max(np.abs(y))) + max(abs(lo), abs(hi))


def _inverse_ft(cf_fn, cutoff: float, y: np.ndarray, half_width: float,
                min_count: int = 2048) -> np.ndarray:
    """``(2 pi)^-1 int_{-U}^{U} exp(-i y u) cf(u) du`` for Hermitian ``cf``."""
    # period 2 pi / du of the trapezoid sum must exceed the y extent
    du_max = math.pi / (2.0 * half_width)
    count = max(min_count, 2 * math.ceil(cutoff / du_max))
    grid = FrequencyGrid(cutoff, count)
    u = grid.half_nodes
    vals = np.asarray(cf_fn(u), dtype=complex)
    out = np.empty(y.size)
    for start in range(0, y.size, 512):
        yy = y[start:start + 512]
        ph = np.outer(yy, u)
        re = np.cos(ph) * vals.real + np.sin(ph) * vals.imag
        out[start:start + 512] = re @ grid.half_weights
    return out / TWO_PI


def f_function(f: DensityModel, noise: NoiseModel, y, tol: float = 1e-12):
    """``F(y) = (2 pi)^-1 int exp(-i y u) cf_f(u) / conj(cf_noise(u)) du``.

    ``E_f[F(Y)] = int f^2``. The integral is truncated where the quotient
    drops below ``tol``. Raises :class:`UnsupportedRegimeError` when the
    signal is not smoother than the noise.
    """
    _require_f_exists(f, noise)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))

    def log_ratio(u):
        return float(f.law.log_abs_cf(u)) - float(_log_abs_noise(noise, u))

    cutoff = _decay_cutoff(log_ratio, tol)
    half_width = _alias_half_width(f, noise, y_arr)
    out = _inverse_ft(lambda u: f.cf(u) / np.conj(noise.cf(u)), cutoff, y_arr, half_width)
    return out if np.ndim(y) else float(out[0])


def _log_abs_noise(noise: NoiseModel, u):
    return noise.law.log_abs_cf(u)


def observation_density(f: DensityModel, noise: NoiseModel, y, tol: float = 1e-16):
    """``p = f * g`` by inversion of ``cf_f cf_noise``."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))

    def log_prod(u):
        return float(f.law.log_abs_cf(u)) + float(_log_abs_noise(noise, u))

    cutoff = _decay_cutoff(log_prod, tol)
    half_width = _alias_half_width(f, noise, y_arr)
    out = _inverse_ft(lambda u: f.cf(u) * noise.cf(u), cutoff, y_arr, half_width)
    return out if np.ndim(y) else float(out[0])


def _y_quadrature(f: DensityModel, noise: NoiseModel, tol_f: float = 1e-12):
    lo, hi, sd = _window(f, noise)

    def log_ratio(u):
        return float(f.law.log_abs_cf(u)) - float(_log_abs_noise(noise, u))

    def log_prod(u):
        return float(f.law.log_abs_cf(u)) + float(_log_abs_noise(noise, u))

    band = _decay_cutoff(log_ratio, tol_f) + _decay_cutoff(log_prod, 1e-16)
    # F^2 p is band limited to about 2 * band; sample well above Nyquist
    dy = min(math.pi / (2.0 * band), sd / 20.0)
    m = 2 * math.ceil((hi - lo) / (2.0 * dy))
    y = np.linspace(lo, hi, m + 1)
    wts = np.full(m + 1, (hi - lo) / m)
    wts[0] = wts[-1] = 0.5 * (hi - lo) / m
    return y, wts


def mean_f_of_y(f: DensityModel, noise: NoiseModel) -> float:
    """``E_f[F(Y)] = int F p`` by quadrature in ``y``; equals ``int f^2``."""
    _require_f_exists(f, noise)
    y, wts = _y_quadrature(f, noise)
    return float((f_function(f, noise, y) * observation_density(f, noise, y)) @ wts)


def omega_sq(f: DensityModel, noise: NoiseModel) -> float:
    """Efficiency constant ``Var_f F(Y) = int F^2 p - (int f^2)^2``.

    ``4 omega_sq / n`` is the asymptotic variance of ``d_n`` in the
    parametric regime.
    """
    _require_f_exists(f, noise)
    y, wts = _y_quadrature(f, noise)
    F = f_function(f, noise, y)
    p = observation_density(f, noise, y)
    value = float((F ** 2 * p) @ wts) - squared_norm(f) ** 2
    if value < -1e-10:
        raise NumericalError(f"omega_sq came out negative ({value:.3e}); quadrature failed")
    return max(value, 0.0)


# --------------------------------------------------------------------------
# bandwidths and rates
# --------------------------------------------------------------------------

def _bisect_decreasing(fn, target: float, lo: float, hi: float, rtol: float = 1e-15,
                       max_iter: int = 400) -> float:
    """Root of ``fn(h) = target`` for ``fn`` decreasing on ``[lo, hi]``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def solve_eq22(alpha: float, r: float, gamma: float, s: float, n: float) -> float:
    """Bandwidth solving ``2 alpha / h^r + 2 gamma / h^s = log n - (log log n)^2``.

    The left side decreases strictly from infinity to 0, so the root is unique.
    """
    if min(alpha, r, gamma, s) <= 0:
        raise ConfigError("alpha, r, gamma, s must all be > 0")
    if n <= math.e:
        raise ConfigError(f"n = {n} too small: log log n is undefined or negative")
    rhs = math.log(n) - math.log(math.log(n)) ** 2
    if rhs <= 0:
        raise ConfigError(f"log n - (log log n)^2 = {rhs:.4g} <= 0; use a larger n")

    def lhs(h):
        return 2.0 * alpha / h ** r + 2.0 * gamma / h ** s

    hi = 1.0
    while lhs(hi) >= rhs:
        hi *= 2.0
    lo = hi / 2.0
    while lhs(lo) <= rhs:
        lo /= 2.0
    h = _bisect_decreasing(lhs, rhs, lo, hi)
    resid = abs(lhs(h) - rhs)
    if resid >= 1e-10 * max(1.0, rhs):
        raise NumericalError(f"bisection residual {resid:.3e} too large")
    return h


def solve_boundary_bandwidth(alpha: float, r: float, n: float, c: float = 1.0) -> float:
    """Bandwidth for the boundary cell ``r = s``, ``alpha = gamma``.

    Solves ``h^(r-1) exp(4 alpha / h^r) = c n`` on the branch where the left
    side decreases in ``h`` (small bandwidths).
    """
    target = math.log(c * n)

    def phi(h):
        return (r - 1.0) * math.log(h) + 4.0 * alpha / h ** r

    if r > 1.0:
        hi = (4.0 * alpha * r / (r - 1.0)) ** (1.0 / r)
        if phi(hi) >= target:
            raise ConfigError("n too small for the boundary bandwidth equation to have a root")
    else:
        hi = 1.0
        while phi(hi) >= target:
            hi *= 2.0
    lo = hi / 2.0
    while phi(lo) <= target:
        lo /= 2.0
    return _bisect_decreasing(phi, target, lo, hi)


def _log_window_bandwidth(n: float, rate: float, coef: float, power: float) -> float:
    """``(L / rate - coef log(L / rate))^(-1/power)`` with ``L = log n``."""
    ell = math.log(n) / rate
    inner = ell - coef * math.log(ell)
    if inner <= 0:
        raise ConfigError(f"n = {n:g} too small: bandwidth formula needs a positive base "
                          f"(got {inner:.4g}); use a larger n")
    return inner ** (-1.0 / power)


def select_estimation_bandwidth(setup: EstimationSetup, n: float) -> float:
    """Bandwidth schedule for ``d_n`` in each cell of the estimation rate table.

    * Sobolev / polynomial, ``beta > sigma + 1/4``: the geometric mean of the
      window ``n^(-1/(4 sigma + 1)) << h << n^(-1/(4 beta))``.
    * Sobolev / polynomial otherwise: ``n^(-2/(4 beta + 4 sigma + 1))``.
    * Sobolev / exponential: ``(log n/(2 gamma) - (2 beta + 1)/(2 gamma s) log(log n/(2 gamma)))^(-1/s)``.
    * Supersmooth with parametric rate: geometric mean of the window whose
      upper end ``(log n / (4 alpha))^(-1/r)`` kills the bias and whose lower
      end ``n^(-1/(4 sigma + 1))`` (polynomial noise) or
      ``(log n / (4 gamma))^(-1/s)`` (exponential noise) keeps the degenerate
      part of the variance negligible.
    * Supersmooth / exponential, ``r < s`` or ``r = s, alpha < gamma``: root of
      :func:`solve_eq22`; ``alpha = gamma`` uses :func:`solve_boundary_bandwidth`.
    """
    if n < 2:
        raise ConfigError("n ≥ 2 required")
    c, g = setup.density_class, setup.noise
    cell = setup.cell
    if cell == ("sobolev", "polynomial"):
        sigma = setup.sigma
        if setup.regime == "parametric":
            return n ** (-0.5 * (1.0 / (4 * sigma + 1) + 1.0 / (4 * c.beta)))
        return n ** (-2.0 / (4 * c.beta + 4 * sigma + 1))
    if cell == ("sobolev", "exponential"):
        return _log_window_bandwidth(n, 2.0 * g.gamma, (2 * c.beta + 1) / (2 * g.gamma * g.s), g.s)
    if setup.regime == "parametric":
        if n <= math.e:
            raise ConfigError(f"n = {n:g} too small for the supersmooth bandwidth (need log n > 1)")
        # bias is negligible below the upper end of the window
        upper = (math.log(n) / (4.0 * c.alpha)) ** (-1.0 / c.r)
        if cell == ("supersmooth", "polynomial"):
            lower = n ** (-1.0 / (4 * setup.sigma + 1))
        else:
            lower = (math.log(n) / (4.0 * g.gamma)) ** (-1.0 / g.s)
        return math.sqrt(lower * upper)
    if c.r == g.s and c.alpha == g.gamma:
        return solve_boundary_bandwidth(c.alpha, c.r, n)
    return solve_eq22(c.alpha, c.r, g.gamma, g.s, n)


def rate_phi(setup: EstimationSetup, n: float) -> float:
    """Upper-bound rate of ``E|d_n - d|`` for the cell; ``n^(-1/2)`` when parametric."""
    c, g = setup.density_class, setup.noise
    if setup.regime == "parametric":
        return n ** -0.5
    cell = setup.cell
    if cell == ("sobolev", "polynomial"):
        return n ** (-4.0 * c.beta / (4 * c.beta + 4 * setup.sigma + 1))
    if cell == ("sobolev", "exponential"):
        return c.L * (math.log(n) / (2.0 * g.gamma)) ** (-2.0 * c.beta / g.s)
    if c.r == g.s and c.alpha == g.gamma:
        return math.log(n) ** (c.r / 2.0) / math.sqrt(n)
    h = solve_eq22(c.alpha, c.r, g.gamma, g.s, n)
    return c.L * math.exp(-2.0 * c.alpha / h ** c.r)
