"""L2 goodness-of-fit test of ``H0: f = f0`` from noisy observations.

The statistic estimates ``||f - f0||^2`` without its diagonal terms:

    T = 1 / (n (n-1)) sum_{k != j} < K_{n,h}(. - Y_k) - f0, K_{n,h}(. - Y_j) - f0 >

and the test rejects when ``|T| > C* t_n^2``. The threshold constant ``C*`` is
calibrated by parametric bootstrap under the null.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericalError, OracleCapError
from .functional import ORACLE_CAP, EstimationSetup, solve_eq22
from .models import (DensityModel, NoiseModel, Sample, SmoothnessClass, TailCheck,
                     check_smoothness_membership, check_tail_condition, replicate_rng)
from .parallel import run_indexed
from .spectral import (DEFAULT_GRID_COUNT, DEFAULT_KERNEL, KernelSpec, deconv_weight,
                       exp_sums, integrate, integrate_half_line, make_grid)

__all__ = [
    "TestSetup",
    "TestOutcome",
    "Calibration",
    "test_statistic",
    "test_statistic_pairwise_oracle",
    "select_test_params",
    "calibrate",
    "calibrate_cstar",
    "decide",
    "gof_test",
    "l2_distance_sq",
    "expected_statistic",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TestSetup:
    """Null density, known noise, smoothness class of the alternatives, level."""

    __test__ = False  # not a pytest class

    f0: DensityModel
    noise: NoiseModel
    smoothness: SmoothnessClass
    level: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must be in (0, 1) (got {self.level})")

    @property
    def estimation_setup(self) -> EstimationSetup:
        return EstimationSetup(self.smoothness, self.noise.smoothness)

    def null_radius(self) -> float:
        """Class integral of ``f0`` for the alternatives' class parameters."""
        return check_smoothness_membership(self.f0, self.smoothness).value

    def validate(self, window=(-20.0, 20.0)) -> dict:
        """Report the radius condition ``L0 < L`` and the tail condition on ``f0``.

        Neither is needed to run the test; both are reported and warned about.
        """
        radius = self.null_radius()
        tail = check_tail_condition(self.f0, window)
        report = {"L0": radius, "L": self.smoothness.L, "radius_ok": radius < self.smoothness.L,
                  "c0": tail.c0, "tail_ok": tail.holds, "tail_window": list(window)}
        if not report["radius_ok"]:
            warnings.warn(f"null density has class integral {radius:.4g} >= L = {self.smoothness.L:.4g}",
                          stacklevel=2)
        if not tail.holds:
            warnings.warn(f"f0(x)(1 + x^2) drops to {tail.c0:.3g} at x = {tail.argmin:g}; "
                          "the lower-bound tail condition fails on the window", stacklevel=2)
        return report


@dataclass(frozen=True)
class Calibration:
    """Bootstrap calibration of the threshold constant."""

    c_star: float
    B: int
    seed: int
    quantile_level: float
    h: float
    t_n: float
    null_stats: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TestOutcome:
    """Result of one test: statistic, threshold and decision."""

    __test__ = False

    T: float
    h: float
    t_n: float
    c_star: float
    reject: bool
    n: int
    calibration: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return self.c_star * self.t_n ** 2

    def to_dict(self) -> dict:
        return {"T": self.T, "threshold": self.threshold, "reject": self.reject, "h": self.h,
                "t_n": self.t_n, "c_star": self.c_star, "n": self.n, "calibration": self.calibration}


# --------------------------------------------------------------------------
# statistic
# --------------------------------------------------------------------------

def test_statistic(sample: Sample, f0: DensityModel, noise: NoiseModel,
                   kernel: str = DEFAULT_KERNEL, h: float = 1.0,
                   count: int = DEFAULT_GRID_COUNT) -> float:
    """``T_n*`` in O(n G).

    With ``a_k(u) = exp(i u Y_k) w(u) - cf0(u)`` and ``S = sum_k exp(i u Y_k)``,
    ``|sum a_k|^2 - sum |a_k|^2`` equals
    ``|w|^2 (|S|^2 - n) - 2 (n-1) Re(conj(cf0) w S) + n (n-1) |cf0|^2``,
    an even function of ``u``, so only nonnegative nodes are evaluated.
    """
    sample.require(2)
    n = sample.n
    grid = make_grid(h, kernel, count)
    u = grid.half_nodes
    w = deconv_weight(u, KernelSpec(kernel, h), noise)
    cf0 = np.asarray(f0.cf(u), dtype=complex)
    s = exp_sums(0.0, grid.du, u.size, sample.values)
    vals = ((w.real ** 2 + w.imag ** 2) * (s.real ** 2 + s.imag ** 2 - n)
            - 2.0 * (n - 1) * (np.conj(cf0) * w * s).real
            + n * (n - 1) * (cf0.real ** 2 + cf0.imag ** 2))
    return float(vals @ grid.half_weights) / (TWO_PI * n * (n - 1))


def test_statistic_pairwise_oracle(sample: Sample, f0: DensityModel, noise: NoiseModel,
                                   kernel: str = DEFAULT_KERNEL, h: float = 1.0,
                                   count: int = DEFAULT_GRID_COUNT, cap: int = ORACLE_CAP) -> float:
    """Literal sum over ordered pairs of ``(2 pi)^-1 int a_k conj(a_j) du``."""
    sample.require(2)
    n = sample.n
    if n > cap:
        raise OracleCapError(f"pairwise oracle is capped at n = {cap} (got n = {n})")
    grid = make_grid(h, kernel, count)
    u = grid.nodes
    w = deconv_weight(u, KernelSpec(kernel, h), noise)
    cf0 = np.asarray(f0.cf(u), dtype=complex)
    a = np.exp(1j * np.outer(sample.values, u)) * w - cf0
    total = 0.0 + 0.0j
    for k in range(n):
        others = np.delete(a, k, axis=0)
        total += integrate(grid, a[k] * np.conj(others)).sum()
    total /= TWO_PI * n * (n - 1)
    if abs(total.imag) >= 1e-9 * max(1.0, abs(total.real)):
        raise NumericalError(f"pairwise sum has imaginary part {total.imag:.3e}")
    return float(total.real)


# --------------------------------------------------------------------------
# schedules
# --------------------------------------------------------------------------

def _log_base(n, rate, coef, second):
    inner = math.log(n) / rate - coef * second
    if inner <= 0:
        raise ConfigError(f"n = {n:g} too small: bandwidth formula needs a positive base "
                          f"(got {inner:.4g}); use a larger n")
    return inner


def select_test_params(setup, n: float) -> tuple:
    """Bandwidth ``h`` and threshold rate ``t_n`` for each cell of the testing table.

    * Sobolev / polynomial: ``h = n^(-2/(4b+4s+1))``, ``t_n = n^(-2b/(4b+4s+1))``.
    * supersmooth / polynomial: ``h = (log n/(2a) - (2s+1/2)/(2ar) log log n)^(-1/r)``,
      ``t_n = n^(-1/2) (log n/(2a))^((4s+1)/(4r))``.
    * Sobolev / exponential: ``h = (log n/(2g) - (2b+1)/(2gs) log(log n/(2g)))^(-1/s)``,
      ``t_n = sqrt(L) (log n/(2g))^(-b/s)``.
    * supersmooth / exponential: ``h`` solves the balance equation of
      :func:`solve_eq22`; ``t_n = sqrt(L) exp(-a/h^r)`` if ``r < s`` and
      ``h^(min(s-1, 0)/4) n^(-1/2) exp(g/h^s)`` otherwise.
    """
    if isinstance(setup, TestSetup):
        setup = setup.estimation_setup
    if n < 2:
        raise ConfigError("n ≥ 2 required")
    c, g = setup.density_class, setup.noise
    cell = setup.cell
    if cell == ("sobolev", "polynomial"):
        denom = 4 * c.beta + 4 * setup.sigma + 1
        return n ** (-2.0 / denom), n ** (-2.0 * c.beta / denom)
    if cell == ("supersmooth", "polynomial"):
        sigma = setup.sigma
        if n <= math.e:
            raise ConfigError(f"n = {n:g} too small for log log n")
        base = _log_base(n, 2.0 * c.alpha, (2 * sigma + 0.5) / (2 * c.alpha * c.r), math.log(math.log(n)))
        h = base ** (-1.0 / c.r)
        t_n = (math.log(n) / (2.0 * c.alpha)) ** ((4 * sigma + 1) / (4 * c.r)) / math.sqrt(n)
        return h, t_n
    if cell == ("sobolev", "exponential"):
        ell = math.log(n) / (2.0 * g.gamma)
        if ell <= 0:
            raise ConfigError(f"n = {n:g} too small")
        base = _log_base(n, 2.0 * g.gamma, (2 * c.beta + 1) / (2 * g.gamma * g.s), math.log(ell))
        return base ** (-1.0 / g.s), math.sqrt(c.L) * ell ** (-c.beta / g.s)
    if cell == ("supersmooth", "exponential"):
        h = solve_eq22(c.alpha, c.r, g.gamma, g.s, n)
        if c.r < g.s:
            return h, math.sqrt(c.L) * math.exp(-c.alpha / h ** c.r)
        expo = min(g.s - 1.0, 0.0) / 4.0
        return h, h ** expo / math.sqrt(n) * math.exp(g.gamma / h ** g.s)
    raise ConfigError(f"no testing schedule for cell {cell}")


# --------------------------------------------------------------------------
# calibration and decision
# --------------------------------------------------------------------------

def _null_replicate(index, *, f0, noise, n, kernel, h, count, seed):
    rng = replicate_rng(seed, index)
    y = f0.sample(n, rng) + noise.sample(n, rng)
    return test_statistic(Sample(y), f0, noise, kernel, h, count)


def null_statistics(f0: DensityModel, noise: NoiseModel, n: int, B: int, seed: int,
                    kernel: str = DEFAULT_KERNEL, h: float = 1.0,
                    count: int = DEFAULT_GRID_COUNT, jobs: Optional[int] = None) -> np.ndarray:
    """``T`` on ``B`` samples of size ``n`` drawn from ``f0 * g``; stream ``b`` is ``(seed, b)``."""
    fn = partial(_null_replicate, f0=f0, noise=noise, n=int(n), kernel=kernel, h=h,
                 count=count, seed=int(seed))
    return np.asarray(run_indexed(fn, range(int(B)), jobs))


def calibrate(setup: TestSetup, n: int, B: int = 500, seed: int = None,
              kernel: str = DEFAULT_KERNEL, h: Optional[float] = None, t_n: Optional[float] = None,
              count: int = DEFAULT_GRID_COUNT, jobs: Optional[int] = None) -> Calibration:
    """Parametric bootstrap of ``|T| / t_n^2`` under the null.

    ``C*`` is the empirical ``1 - level/2`` quantile (upper order statistic),
    so the first-kind error is targeted at ``level / 2``.
    """
    if B < 100:
        raise ConfigError(f"calibration needs B ≥ 100 replicates (got {B})")
    if seed is None:
        raise ConfigError("calibration needs an explicit seed")
    if h is None or t_n is None:
        h0, t0 = select_test_params(setup, n)
        h = h0 if h is None else h
        t_n = t0 if t_n is None else t_n
    stats = null_statistics(setup.f0, setup.noise, n, B, seed, kernel, h, count, jobs)
    q = 1.0 - setup.level / 2.0
    c_star = float(np.quantile(np.abs(stats) / t_n ** 2, q, method="higher"))
    return Calibration(c_star=c_star, B=int(B), seed=int(seed), quantile_level=q, h=float(h),
                       t_n=float(t_n), null_stats=stats)


def calibrate_cstar(setup: TestSetup, n: int, B: int = 500, seed: int = None, **kwargs) -> float:
    """Threshold constant ``C*`` from :func:`calibrate`."""
    return calibrate(setup, n, B, seed, **kwargs).c_star


def decide(T: float, c_star: float, t_n: float) -> bool:
    """Reject iff ``|T| > c_star t_n^2`` (strict)."""
    if not t_n > 0 or not c_star > 0:
        raise ConfigError("t_n and c_star must be > 0")
    return bool(abs(T) > c_star * t_n ** 2)


def gof_test(sample: Sample, setup: TestSetup, kernel: str = DEFAULT_KERNEL,
             h: Optional[float] = None, t_n: Optional[float] = None,
             c_star: Optional[float] = None, B: int = 500, seed: Optional[int] = None,
             count: int = DEFAULT_GRID_COUNT, jobs: Optional[int] = None) -> TestOutcome:
    """Run the test on ``sample``; calibrates ``C*`` unless it is given."""
    sample.require(2)
    n = sample.n
    if h is None or t_n is None:
        h0, t0 = select_test_params(setup, n)
        h = h0 if h is None else h
        t_n = t0 if t_n is None else t_n
    meta = {}
    if c_star is None:
        cal = calibrate(setup, n, B, seed, kernel, h, t_n, count, jobs)
        c_star = cal.c_star
        meta = {"B": cal.B, "seed": cal.seed, "quantile_level": cal.quantile_level,
                "null_quantile": c_star * t_n ** 2}
    T = test_statistic(sample, setup.f0, setup.noise, kernel, h, count)
    return TestOutcome(T=T, h=float(h), t_n=float(t_n), c_star=float(c_star),
                       reject=decide(T, c_star, t_n), n=n, calibration=meta)


# --------------------------------------------------------------------------
# distances
# --------------------------------------------------------------------------

def l2_distance_sq(f, f0) -> float:
    """``int (f - f0)^2 = (2 pi)^-1 int |cf - cf0|^2 du`` by Plancherel."""
    def integrand(u):
        d = np.asarray(f.cf(u), dtype=complex) - np.asarray(f0.cf(u), dtype=complex)
        return d.real ** 2 + d.imag ** 2
    return integrate_half_line(integrand) / math.pi


def expected_statistic(f, f0, kernel: str = DEFAULT_KERNEL, h: float = 1.0,
                       count: int = DEFAULT_GRID_COUNT) -> float:
    """``E_f T = ||K_h * f - f0||^2 = (2 pi)^-1 int |phi_kernel(h u) cf(u) - cf0(u)|^2 du``.

    Under the null (``f = f0``) this is ``||K_h * f0 - f0||^2``.
    """
    grid = make_grid(h, kernel, count)
    u = grid.half_nodes
    d = KernelSpec(kernel, h).phi(u) * f.cf(u) - f0.cf(u)
    inside = float((d.real ** 2 + d.imag ** 2) @ grid.half_weights) / TWO_PI

    def tail(v):
        c = np.asarray(f0.cf(v), dtype=complex)
        return c.real ** 2 + c.imag ** 2

    return inside + integrate_half_line(tail, start=grid.u_max, first=2 * grid.u_max) / math.pi
