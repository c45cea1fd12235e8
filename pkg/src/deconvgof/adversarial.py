"""Hard alternatives: a zero-mean compact bump and the signed perturbation family.

The bump ``G`` lives on ``[-1, 0]``, integrates to zero and has a Fourier
transform decaying like ``exp(-a sqrt|u|)``. For polynomial noise the function
``H`` with transform ``cf_G(v) / cf_noise(v / h)`` is integrable, and

    f_theta(x) = f0(x) + sum_j theta_j h^(beta + sigma + 1) H_h(x - x_j),   H_h(x) = H(x / h) / h,

is a density whose convolution with the noise differs from ``f0 * g`` only by
rescaled copies of ``G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (ConfigError, DegeneratePerturbationError, NegativeDensityError,
                     NumericalError, UnsupportedRegimeError)
from .models import DensityModel, Law, NoiseModel, SmoothnessClass, make_rng

__all__ = [
    "g_bump",
    "bump_transform",
    "phi_g_bump",
    "PerturbedLaw",
    "PerturbationFamily",
    "perturbed_density",
    "sample_theta",
    "separation_sq",
    "check_nonnegative",
    "bump_count",
]

# |B(w)| is below the rounding floor (~1e-17) of its quadrature sum beyond this;
# the value there is set to 0, which is closer to the truth than the sum
_W_MAX = 1200.0
_ALIAS_GAP = 1500.0      # trapezoid aliasing error is at most |B(gap)| < 1e-18
TABLE_STEP = 1.0 / 4096  # H table spacing, in units of h
_TABLE_PAD = 0.5


def _std_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out




def g_bump(x):
    """``exp(-1/(1-(4x+3)^2))`` on ``[-1, -1/2]``, ``-exp(-1/(1-(4x+1)^2))`` on ``[-1/2, 0]``, 0 elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= -0.5, _std_bump(4.0 * x + 3.0), -_std_bump(4.0 * x + 1.0))
    out = np.where((x < -1.0) | (x > 0.0), 0.0, out)
    return out if out.ndim else float(out)


def _bump_envelope(w):
    """Upper bound ``2.5 w^(-3/4) exp(-sqrt(w))`` on ``|B(w)|`` for ``w >= 10``.

    The saddle point of ``exp(-1/(1-t^2) + i w t)`` near ``t = 1`` gives the
    ``exp(-sqrt(w))`` decay; the constant is checked against the quadrature.
    """
    w = np.asarray(w, dtype=float)
    return 2.5 * w ** -0.75 * np.exp(-np.sqrt(w))


def bump_transform(w, chunk: int = 256):
    """``B(w) = int_{-1}^{1} cos(w t) exp(-1/(1-t^2)) dt``.

    The integrand is flat to all orders at ``t = +-1``, so the trapezoid rule
    converges faster than any power of the step.
    """
    w = np.abs(np.atleast_1d(np.asarray(w, dtype=float)))
    flat_w = w.ravel()
    flat = np.zeros(flat_w.shape)
    live = np.flatnonzero(flat_w <= _W_MAX)
    if live.size == 0:
        return flat.reshape(w.shape)
    # the sum is periodic in w with period 2 pi / step; keep the next copy far away
    per_unit = 2 ** math.ceil(math.log2((flat_w[live].max() + _ALIAS_GAP) / (2.0 * math.pi)))
    step = 1.0 / per_unit
    nodes = np.arange(per_unit + 1) * step
    values = _std_bump(nodes) * (2.0 * step)
    values[0] *= 0.5
    for start in range(0, live.size, chunk):
        idx = live[start:start + chunk]
        flat[idx] = np.cos(np.outer(flat_w[idx], nodes)) @ values
    return flat.reshape(w.shape)


def phi_g_bump(u):
    """Fourier transform of :func:`g_bump`: ``B(u/4) (exp(-3iu/4) - exp(-iu/4)) / 4``.

    Vanishes at ``u = 0`` exactly.
    """
    u = np.asarray(u, dtype=float)
    b = bump_transform(u / 4.0).reshape(u.shape)
    out = 0.25 * b * (np.exp(-0.75j * u) - np.exp(-0.25j * u))
    return out if out.ndim else complex(out)


def bump_count(h: float) -> int:
    """Number of bumps ``M = floor(1/h) - 1`` so that ``x_M = M h < 1``."""
    m = math.floor(1.0 / h + 1e-12) - 1
    if m < 1:
        raise ConfigError(f"h = {h:g} leaves no room for a bump (need h <= 1/2)")
    return m


def sample_theta(M: int, seed) -> np.ndarray:
    """I.i.d. uniform signs in ``{-1, +1}``."""
    if int(M) != M or M < 1:
        raise ConfigError(f"M ≥ 1 required (got M = {M})")
    rng = make_rng(seed)
    return np.where(rng.integers(0, 2, size=int(M)) == 1, 1.0, -1.0)


# --------------------------------------------------------------------------
# H by inverse Fourier quadrature
# --------------------------------------------------------------------------

def _h_transform(noise: NoiseModel, h: float, v):
    """``cf_G(v) / cf_noise(v / h)``."""
    v = np.asarray(v, dtype=float)
    return phi_g_bump(v) / np.asarray(noise.cf(v / h), dtype=complex)


def _transform_range(noise: NoiseModel, h: float, tol: float) -> float:
    """Frequency beyond which ``|cf_H|`` stays below ``tol`` times its peak."""
    v = np.geomspace(40.0, 1e8, 4000)
    with np.errstate(over="ignore", divide="ignore"):
        env = 0.5 * _bump_envelope(v / 4.0) / np.abs(np.asarray(noise.cf(v / h)))
    small = np.linspace(0.0, 40.0, 801)
    peak = float(np.max(np.abs(_h_transform(noise, h, small))))
    tail = np.maximum.accumulate(np.nan_to_num(env, nan=np.inf)[::-1])[::-1]
    ok = tail <= tol * peak
    if not ok.any():
        raise UnsupportedRegimeError(
            "the transform of H does not decay: the noise cf vanishes too fast for the bump")
    return min(float(v[np.argmax(ok)]), 4.0 * _W_MAX)


def _h_table(noise: NoiseModel, h: float, tol: float = 1e-13):
    """Nodes (in units of ``h``) and values of ``H`` on its numerical support.

    ``H(t) = pi^-1 Re int_0^V cf_H(v) exp(-i v t) dv`` by the trapezoid rule
    with ``dv = 2 pi / period``; all table nodes come out of one FFT. The range
    ``V`` is where ``|cf_H|`` has dropped below ``tol`` times its peak.
    """
    shift = float(noise.law.mean()) / h
    lo, hi = -1.0 - shift - _TABLE_PAD, -shift + _TABLE_PAD
    lo = math.floor(lo / TABLE_STEP) * TABLE_STEP
    period = 8.0 * (hi - lo)
    size = 2 ** math.ceil(math.log2(period / TABLE_STEP))
    dv = 2.0 * math.pi / (size * TABLE_STEP)
    v_max = _transform_range(noise, h, tol)
    if v_max >= size * dv:
        raise NumericalError("H table step too coarse for the frequency range")
    v = np.arange(0.0, v_max + dv, dv)
    coef = _h_transform(noise, h, v) * dv
    coef[0] *= 0.5
    spectrum = np.fft.fft(coef * np.exp(-1j * v * lo), size)
    m = int(round((hi - lo) / TABLE_STEP)) + 1
    t = lo + np.arange(m) * TABLE_STEP
    return t, spectrum[:m].real / math.pi


# --------------------------------------------------------------------------
# perturbed law
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PerturbedLaw(Law):
    """``f0 + amplitude sum_j theta_j H_h(. - x_j)``."""

    base: DensityModel
    noise: NoiseModel
    h: float
    amplitude: float
    theta: tuple
    t_nodes: np.ndarray = field(repr=False)
    h_values: np.ndarray = field(repr=False)
    kind = "perturbed"

    @cached_property
    def _spline(self):
        return CubicSpline(self.t_nodes, self.h_values, extrapolate=False)

    @property
    def centers(self) -> np.ndarray:
        return self.h * np.arange(1, len(self.theta) + 1)

    @property
    def support(self) -> tuple:
        """Interval outside which the perturbation vanishes numerically."""
        c = self.centers
        if c.size == 0:
            return (0.0, 0.0)
        return (c[0] + self.h * self.t_nodes[0], c[-1] + self.h * self.t_nodes[-1])

    def perturbation(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c, s in zip(self.centers, self.theta):
            t = (x - c) / self.h
            inside = (t >= self.t_nodes[0]) & (t <= self.t_nodes[-1])
            if np.any(inside):
                out[inside] += s * self._spline(t[inside])
        return self.amplitude / self.h * out

    def density(self, x):
        return self.base.density(x) + self.perturbation(x)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        base = np.asarray(self.base.cf(u), dtype=complex)
        if not self.theta:
            return base
        phases = np.exp(1j * np.multiply.outer(u, self.centers)) @ np.asarray(self.theta)
        return base + self.amplitude * _h_transform(self.noise, self.h, self.h * u) * phases

    def separation_sq(self) -> float:
        """``||f_theta - f0||^2`` by Plancherel."""
        return separation_sq(self.noise, self.h, self.amplitude, self.theta)

    def sup_perturbation(self) -> float:
        """Upper bound on ``|f_theta - f0|``."""
        return self.amplitude / self.h * float(np.max(np.abs(self.h_values))) * _overlap(self)

    def sample(self, n, rng):
        a, b = self.support
        bound = self.sup_perturbation()
        extra = bound * (b - a)
        accept_rate = 1.0 / (1.0 + extra)
        if accept_rate < 1e-3:
            raise DegeneratePerturbationError(
                f"rejection sampler acceptance rate {accept_rate:.2e} < 1e-3")
        out = np.empty(0)
        while out.size < n:
            m = int(1.2 * (n - out.size) / accept_rate) + 16
            from_base = rng.random(m) < accept_rate
            x = np.where(from_base, self.base.sample(m, rng), rng.uniform(a, b, size=m))
            envelope = self.base.density(x) + np.where((x >= a) & (x <= b), bound, 0.0)
            keep = rng.random(m) * envelope <= self.density(x)
            out = np.concatenate([out, x[keep]])
        return out[:n]

    def mean(self):
        # int x H_h(x - c) dx = c int H + h int t H(t) dt, and int H = 0
        return float(self.base.law.mean()) + self.amplitude * sum(self.theta) * _first_moment(self)

    def variance(self):
        x = np.linspace(*_window(self), 20001)
        p = self.density(x)
        m = np.trapezoid(x * p, x)
        return float(np.trapezoid((x - m) ** 2 * p, x))


def _overlap(law: PerturbedLaw) -> int:
    # how many translates of H_h can cover one point
    width = law.t_nodes[-1] - law.t_nodes[0]
    return int(math.ceil(width)) + 1


def _first_moment(law: PerturbedLaw) -> float:
    t, v = law.t_nodes, law.h_values
    return law.h * float(np.trapezoid(t * v, t))


def _window(law: PerturbedLaw):
    sd = math.sqrt(law.base.law.variance())
    mu = law.base.law.mean()
    a, b = law.support
    return min(mu - 12 * sd, a - 1.0), max(mu + 12 * sd, b + 1.0)


@dataclass(frozen=True)
class PerturbationFamily:
    """``f0`` with ``M`` signed bumps of width ``h`` at ``x_j = j h``."""

    base: DensityModel
    noise: NoiseModel
    beta: float
    sigma: float
    h: float

    def __post_init__(self):
        if self.noise.smoothness.tag == "exponential":
            raise UnsupportedRegimeError(
                "perturbation family needs polynomial noise; exponential noise makes H non-integrable")
        if not 0.0 < self.h <= 0.5:
            raise ConfigError("bump width h must be in (0, 1/2]")
        if not self.beta > 0:
            raise ConfigError("beta must be > 0")

    @property
    def M(self) -> int:
        return bump_count(self.h)

    @property
    def amplitude(self) -> float:
        return self.h ** (self.beta + self.sigma + 1.0)

    @property
    def centers(self) -> np.ndarray:
        return self.h * np.arange(1, self.M + 1)

    @cached_property
    def table(self):
        return _h_table(self.noise, self.h)

    def member(self, theta=(), check: bool = True,
               smoothness: Optional[SmoothnessClass] = None) -> DensityModel:
        """Density for sign vector ``theta`` (empty gives ``f0`` itself)."""
        theta = tuple(float(s) for s in theta)
        if theta and len(theta) != self.M:
            raise ConfigError(f"theta must have length M = {self.M} (got {len(theta)})")
        if any(s not in (-1.0, 1.0) for s in theta):
            raise ConfigError("theta entries must be -1 or +1")
        smoothness = smoothness or SmoothnessClass.sobolev(self.beta)
        if not theta:
            return DensityModel(self.base.law, smoothness)
        t, vals = self.table
        law = PerturbedLaw(self.base, self.noise, self.h, self.amplitude, theta, t, vals)
        if check:
            check_nonnegative(law)
        return DensityModel(law, smoothness)

    def separation_sq(self, theta) -> float:
        """``||f_theta - f0||^2`` by Plancherel (see :func:`separation_sq`)."""
        return separation_sq(self.noise, self.h, self.amplitude, theta)

    def observation_perturbation(self, theta, y):
        """``sum_j theta_j amplitude G_h(y - x_j)`` with ``G_h(y) = G(y/h)/h``."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape)
        for c, s in zip(self.centers, theta):
            out += s * g_bump((y - c) / self.h)
        return self.amplitude / self.h * out


def separation_sq(noise: NoiseModel, h: float, amplitude: float, theta, tol: float = 1e-13) -> float:
    """``||sum_j theta_j amplitude H_h(. - x_j)||^2`` by Plancherel.

    With ``v = h u`` and ``x_j = j h`` this is
    ``amplitude^2 / (pi h) int_0^inf |cf_H(v)|^2 |sum_j theta_j exp(i j v)|^2 dv``,
    evaluated by the trapezoid rule with a step fine enough for the
    autocorrelation of ``H`` and of the bump lattice.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        return 0.0
    reach = theta.size + 4.0 + 2.0 * abs(float(noise.law.mean())) / h
    dv = math.pi / (4.0 * reach)
    v = np.arange(0.0, _transform_range(noise, h, tol) + dv, dv)
    lattice = np.exp(1j * np.outer(v, np.arange(1, theta.size + 1))) @ theta
    vals = np.abs(_h_transform(noise, h, v)) ** 2 * np.abs(lattice) ** 2
    wts = np.full(v.size, dv)
    wts[0] = 0.5 * dv
    return amplitude ** 2 / (math.pi * h) * float(vals @ wts)


def check_nonnegative(law: PerturbedLaw, step: Optional[float] = None) -> float:
    """Minimum of ``f_theta`` over the perturbation support; raises if negative."""
    a, b = law.support
    step = step or law.h * TABLE_STEP / 4.0
    x = np.arange(a, b + step, step)
    vals = law.density(x)
    i = int(np.argmin(vals))
    if vals[i] < 0.0:
        raise NegativeDensityError(x[i], vals[i])
    return float(vals[i])


def perturbed_density(f0: DensityModel, noise: NoiseModel, beta: float, sigma: float,
                      h: float, theta=()) -> DensityModel:
    """Member ``f_theta`` of the perturbation family around ``f0``."""
    return PerturbationFamily(f0, noise, beta, sigma, h).member(theta)
