"""Noise and signal laws: characteristic functions, densities, exact samplers.

Two roles share the same distribution families. A :class:`NoiseModel` pairs a
law with the decay descriptor of its characteristic function (polynomial of
order ``sigma`` or exponential ``exp(-gamma |u|^s)``); a :class:`DensityModel`
pairs a law with the smoothness class the signal is assumed to lie in
(Sobolev ``W(beta, L)`` or supersmooth ``S(alpha, r, L)``).

Characteristic functions follow ``cf(u) = E[exp(i u X)]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import ConfigError

__all__ = [
    "SmoothnessClass",
    "SmoothnessDescriptor",
    "Law",
    "Gaussian",
    "LaplaceK",
    "GaussianMixture",
    "PointMass",
    "CustomLaw",
    "NoiseModel",
    "DensityModel",
    "Sample",
    "MembershipResult",
    "TailCheck",
    "natural_class",
    "make_rng",
    "replicate_rng",
    "cf_eval",
    "density_eval",
    "sample",
    "observe",
    "check_smoothness_membership",
    "check_tail_condition",
    "noise_from_dict",
    "density_from_dict",
    "noise_from_json",
    "density_from_json",
    "read_data_file",
    "write_data_file",
]


# --------------------------------------------------------------------------
# smoothness metadata
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessClass:
    """Smoothness class of a signal density.

    ``sobolev`` carries ``beta``; ``supersmooth`` carries ``alpha`` and ``r``.
    Both carry the radius ``L``.
    """

    tag: str
    L: float
    beta: Optional[float] = None
    alpha: Optional[float] = None
    r: Optional[float] = None

    def __post_init__(self):
        if self.tag == "sobolev":
            if self.beta is None or not self.beta > 0:
                raise ConfigError("sobolev class needs beta > 0")
        elif self.tag == "supersmooth":
            if self.alpha is None or not self.alpha > 0:
                raise ConfigError("supersmooth class needs alpha > 0")
            if self.r is None or not self.r > 0:
                raise ConfigError("supersmooth class needs r > 0")
        else:
            raise ConfigError(f"unknown smoothness class tag {self.tag!r}")
        if not self.L > 0:
            raise ConfigError("class radius L must be > 0")

    @classmethod
    def sobolev(cls, beta: float, L: float = 1.0) -> "SmoothnessClass":
        return cls("sobolev", L=float(L), beta=float(beta))

    @classmethod
    def supersmooth(cls, alpha: float, r: float, L: float = 1.0) -> "SmoothnessClass":
        return cls("supersmooth", L=float(L), alpha=float(alpha), r=float(r))

    def weight(self, u):
        """Frequency weight ``|u|^(2 beta)`` or ``exp(2 alpha |u|^r)``."""
        return np.exp(self.log_weight(u))

    def log_weight(self, u):
        au = np.abs(np.asarray(u, dtype=float))
        if self.tag == "sobolev":
            with np.errstate(divide="ignore"):
                return 2.0 * self.beta * np.log(au)
        return 2.0 * self.alpha * au ** self.r

    def to_dict(self) -> dict:
        d = {"tag": self.tag, "L": self.L}
        if self.tag == "sobolev":
            d["beta"] = self.beta
        else:
            d.update(alpha=self.alpha, r=self.r)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SmoothnessClass":
        try:
            tag = d["tag"]
            if tag == "sobolev":
                return cls.sobolev(d["beta"], d.get("L", 1.0))
            if tag == "supersmooth":
                return cls.supersmooth(d["alpha"], d["r"], d.get("L", 1.0))
        except KeyError as exc:
            raise ConfigError(f"smoothness class is missing field {exc.args[0]!r}") from None
        raise ConfigError(f"unknown smoothness class tag {tag!r}")


@dataclass(frozen=True)
class SmoothnessDescriptor:
    """Decay of the noise characteristic function.

    ``polynomial``: ``|cf(u)| ~ |u|^-sigma`` with ``sigma > 1``.
    ``exponential``: ``|cf(u)| ~ exp(-gamma |u|^s)``.
    ``none``: no noise at all (``cf == 1``); behaves like ``sigma = 0``.
    """

    tag: str
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    s: Optional[float] = None

    def __post_init__(self):
        if self.tag == "polynomial":
            if self.sigma is None or not self.sigma > 1:
                raise ConfigError("polynomial noise needs sigma > 1")
        elif self.tag == "exponential":
            if self.gamma is None or not self.gamma > 0 or self.s is None or not self.s > 0:
                raise ConfigError("exponential noise needs gamma > 0 and s > 0")
        elif self.tag != "none":
            raise ConfigError(f"unknown noise smoothness tag {self.tag!r}")

    @classmethod
    def polynomial(cls, sigma: float) -> "SmoothnessDescriptor":
        return cls("polynomial", sigma=float(sigma))

    @classmethod
    def exponential(cls, gamma: float, s: float) -> "SmoothnessDescriptor":
        return cls("exponential", gamma=float(gamma), s=float(s))

    @property
    def effective_sigma(self) -> float:
        """Polynomial order, with the noiseless case mapped to 0."""
        if self.tag == "none":
            return 0.0
        if self.tag != "polynomial":
            raise ConfigError("effective_sigma is only defined for polynomial noise")
        return self.sigma

    def to_dict(self) -> dict:
        if self.tag == "polynomial":
            return {"tag": "polynomial", "sigma": self.sigma}
        if self.tag == "exponential":
            return {"tag": "exponential", "gamma": self.gamma, "s": self.s}
        return {"tag": "none"}

    @classmethod
    def from_dict(cls, d: dict) -> "SmoothnessDescriptor":
        try:
            tag = d["tag"]
            if tag == "polynomial":
                return cls.polynomial(d["sigma"])
            if tag == "exponential":
                return cls.exponential(d["gamma"], d["s"])
        except KeyError as exc:
            raise ConfigError(f"noise smoothness is missing field {exc.args[0]!r}") from None
        if tag == "none":
            return cls("none")
        raise ConfigError(f"unknown noise smoothness tag {tag!r}")


# --------------------------------------------------------------------------
# laws
# --------------------------------------------------------------------------

class Law:
    """A univariate probability law known through its characteristic function."""

    kind = "abstract"

    def cf(self, u):
        raise NotImplementedError

    def log_abs_cf(self, u):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.cf(u)))

    def density(self, x):
        raise NotImplementedError(f"{self.kind} law has no density evaluator")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise ConfigError(f"{self.kind} law cannot be serialized")


@dataclass(frozen=True)
class Gaussian(Law):
    """``N(loc, scale^2)``."""

    loc: float = 0.0
    scale: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError("gaussian scale must be > 0")

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(-0.5 * (self.scale * u) ** 2) * np.exp(1j * self.loc * u)

    def log_abs_cf(self, u):
        return -0.5 * (self.scale * np.asarray(u, dtype=float)) ** 2

    def density(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return np.exp(-0.5 * z * z) / (self.scale * math.sqrt(2.0 * math.pi))

    def sample(self, n, rng):
        return rng.normal(self.loc, self.scale, size=n)

    def mean(self):
        return self.loc

    def variance(self):
        return self.scale ** 2

    def to_dict(self):
        return {"kind": "gaussian", "loc": self.loc, "scale": self.scale}


@dataclass(frozen=True)
class LaplaceK(Law):
    """Symmetric law with cf ``exp(i u loc) (1 + (scale u)^2 / k)^-k``.

    ``k = 1`` is the Laplace law with density ``exp(-|x - loc| / scale) / (2 scale)``.
    In general it is the difference of two independent ``Gamma(k, scale / sqrt(k))``
    variables, equivalently the sum of ``k`` Laplace variables of scale
    ``scale / sqrt(k)``. The variance is ``2 scale^2`` for every ``k``.
    """

    k: int = 1
    scale: float = 1.0
    loc: float = 0.0
    kind = "laplace_k"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError("laplace_k needs a positive integer k")
        if not self.scale > 0:
            raise ConfigError("laplace_k scale must be > 0")

    @property
    def gamma_scale(self) -> float:
        return self.scale / math.sqrt(self.k)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return (1.0 + (self.scale * u) ** 2 / self.k) ** (-self.k) * np.exp(1j * self.loc * u)

    def log_abs_cf(self, u):
        u = np.asarray(u, dtype=float)
        return -self.k * np.log1p((self.scale * u) ** 2 / self.k)

    def density(self, x):
        theta = self.gamma_scale
        nu = self.k - 0.5
        ax = np.abs(np.asarray(x, dtype=float) - self.loc)
        at_zero = math.exp(math.lgamma(nu) - math.lgamma(self.k)) / (2.0 * theta * math.sqrt(math.pi))
        z = ax / theta
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = (nu * np.log(z / 2.0) + np.log(special.kve(nu, z)) - z
                    - math.log(theta * math.sqrt(math.pi)) - math.lgamma(self.k))
            out = np.exp(logf)
        return np.where(ax == 0.0, at_zero, out)

    def sample(self, n, rng):
        theta = self.gamma_scale
        return self.loc + rng.gamma(self.k, theta, size=n) - rng.gamma(self.k, theta, size=n)

    def mean(self):
        return self.loc

    def variance(self):
        return 2.0 * self.scale ** 2

    def to_dict(self):
        return {"kind": "laplace_k", "k": int(self.k), "scale": self.scale, "loc": self.loc}


@dataclass(frozen=True)
class GaussianMixture(Law):
    """Finite mixture of Gaussians."""

    weights: tuple
    locs: tuple
    scales: tuple
    kind = "gaussian_mixture"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if not (len(self.weights) == len(self.locs) == len(self.scales) >= 1):
            raise ConfigError("mixture needs equally many weights, locs and scales")
        if np.any(w < 0) or not math.isclose(w.sum(), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ConfigError("mixture weights must be nonnegative and sum to 1")
        if np.any(np.asarray(self.scales, dtype=float) <= 0):
            raise ConfigError("mixture scales must be > 0")
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        object.__setattr__(self, "locs", tuple(float(v) for v in self.locs))
        object.__setattr__(self, "scales", tuple(float(v) for v in self.scales))

    def _components(self):
        return [Gaussian(m, s) for m, s in zip(self.locs, self.scales)]

    def cf(self, u):
        return sum(w * c.cf(u) for w, c in zip(self.weights, self._components()))

    def density(self, x):
        return sum(w * c.density(x) for w, c in zip(self.weights, self._components()))

    def sample(self, n, rng):
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        locs = np.asarray(self.locs)[idx]
        scales = np.asarray(self.scales)[idx]
        return locs + scales * rng.standard_normal(n)

    def mean(self):
        return float(np.dot(self.weights, self.locs))

    def variance(self):
        w, m, s = (np.asarray(a) for a in (self.weights, self.locs, self.scales))
        return float(np.dot(w, s ** 2 + m ** 2) - np.dot(w, m) ** 2)

    def to_dict(self):
        return {"kind": "gaussian_mixture", "weights": list(self.weights),
                "locs": list(self.locs), "scales": list(self.scales)}


@dataclass(frozen=True)
class PointMass(Law):
    """Degenerate law at ``loc``; as noise it means direct observations."""

    loc: float = 0.0
    kind = "none"

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * self.loc * u)

    def log_abs_cf(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def sample(self, n, rng):
        return np.full(n, float(self.loc))

    def mean(self):
        return self.loc

    def variance(self):
        return 0.0

    def to_dict(self):
        return {"kind": "none", "loc": self.loc}


@dataclass(frozen=True)
class CustomLaw(Law):
    """Law given by user callables (in-process use only)."""

    cf_fn: Callable
    sampler: Callable
    density_fn: Optional[Callable] = None
    mean_value: float = 0.0
    variance_value: float = 1.0
    kind = "custom"

    def cf(self, u):
        return np.asarray(self.cf_fn(np.asarray(u, dtype=float)), dtype=complex)

    def density(self, x):
        if self.density_fn is None:
            return super().density(x)
        return np.asarray(self.density_fn(np.asarray(x, dtype=float)), dtype=float)

    def sample(self, n, rng):
        return np.asarray(self.sampler(n, rng), dtype=float)

    def mean(self):
        return self.mean_value

    def variance(self):
        return self.variance_value


# --------------------------------------------------------------------------
# noise / density models
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Known noise law plus the decay descriptor of its cf."""

    law: Law
    smoothness: SmoothnessDescriptor

    @property
    def kind(self) -> str:
        return self.law.kind

    def cf(self, u):
        return self.law.cf(u)

    def density(self, x):
        return self.law.density(x)

    def sample(self, n, rng):
        return self.law.sample(n, rng)

    @classmethod
    def laplace(cls, k: int = 1, scale: float = 1.0, loc: float = 0.0,
                smoothness: Optional[SmoothnessDescriptor] = None) -> "NoiseModel":
        law = LaplaceK(int(k), float(scale), float(loc))
        return cls(law, smoothness or SmoothnessDescriptor.polynomial(2 * law.k))

    @classmethod
    def gaussian(cls, scale: float = 1.0, loc: float = 0.0,
                 smoothness: Optional[SmoothnessDescriptor] = None) -> "NoiseModel":
        law = Gaussian(float(loc), float(scale))
        return cls(law, smoothness or SmoothnessDescriptor.exponential(scale ** 2 / 2.0, 2.0))

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(PointMass(0.0), SmoothnessDescriptor("none"))

    @classmethod
    def custom(cls, cf, sampler, smoothness: SmoothnessDescriptor, density=None,
               mean=0.0, variance=1.0) -> "NoiseModel":
        return cls(CustomLaw(cf, sampler, density, mean, variance), smoothness)

    def to_dict(self) -> dict:
        d = self.law.to_dict()
        d["smoothness"] = self.smoothness.to_dict()
        return d


@dataclass(frozen=True)
class DensityModel:
    """Signal law plus the smoothness class it is assumed to belong to.

    ``smoothness`` may be omitted; :meth:`smoothness_class` then falls back to
    the natural class of the family (see :func:`natural_class`).
    """

    law: Law
    smoothness: Optional[SmoothnessClass] = None

    @property
    def kind(self) -> str:
        return self.law.kind

    def cf(self, u):
        return self.law.cf(u)

    def density(self, x):
        return self.law.density(x)

    def sample(self, n, rng):
        return self.law.sample(n, rng)

    def smoothness_class(self) -> SmoothnessClass:
        if self.smoothness is not None:
            return self.smoothness
        return natural_class(self.law)

    @classmethod
    def gaussian(cls, loc: float = 0.0, scale: float = 1.0, smoothness=None) -> "DensityModel":
        return cls(Gaussian(float(loc), float(scale)), smoothness)

    @classmethod
    def laplace(cls, k: int = 1, scale: float = 1.0, loc: float = 0.0, smoothness=None) -> "DensityModel":
        return cls(LaplaceK(int(k), float(scale), float(loc)), smoothness)

    @classmethod
    def mixture(cls, weights, locs, scales, smoothness=None) -> "DensityModel":
        return cls(GaussianMixture(tuple(weights), tuple(locs), tuple(scales)), smoothness)

    def to_dict(self) -> dict:
        d = self.law.to_dict()
        if self.smoothness is not None:
            d["smoothness"] = self.smoothness.to_dict()
        return d


def natural_class(law: Law) -> SmoothnessClass:
    """Default class for a signal family, with a radius that contains it.

    Gaussians are supersmooth with ``r = 2`` and ``alpha = 0.4 scale^2``
    (any ``alpha < scale^2 / 2`` works); mixtures use the smallest component
    scale. ``laplace_k`` lies in Sobolev classes of order below ``2k - 1/2``;
    ``beta = 2k - 1`` is used. The radius is twice the class integral.
    """
    if isinstance(law, Gaussian):
        cls = SmoothnessClass.supersmooth(0.4 * law.scale ** 2, 2.0)
    elif isinstance(law, GaussianMixture):
        cls = SmoothnessClass.supersmooth(0.4 * min(law.scales) ** 2, 2.0)
    elif isinstance(law, LaplaceK):
        cls = SmoothnessClass.sobolev(2 * law.k - 1.0)
    else:
        raise ConfigError(f"no natural smoothness class for {law.kind} law; pass one explicitly")
    value = _class_integral(law, cls).value
    return SmoothnessClass(cls.tag, L=2.0 * value, beta=cls.beta, alpha=cls.alpha, r=cls.r)


@dataclass(frozen=True)
class Sample:
    """Observed values ``Y_i`` together with the seed that produced them."""

    values: np.ndarray
    seed: Optional[object] = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def require(self, n_min: int = 2) -> "Sample":
        if self.n < n_min:
            raise ConfigError(f"n ≥ {n_min} required (got n = {self.n})")
        return self


# --------------------------------------------------------------------------
# random streams
# --------------------------------------------------------------------------

def make_rng(seed) -> np.random.Generator:
    """Generator from an int, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ConfigError("an explicit seed is required")
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def replicate_rng(master_seed: int, *index: int) -> np.random.Generator:
    """Independent stream for replicate ``index`` under ``master_seed``.

    Streams depend only on ``(master_seed, index)``, never on how many other
    replicates were drawn or in which order.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in index))
    return np.random.Generator(np.random.PCG64(ss))


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def cf_eval(model, u):
    """Characteristic function of a noise or density model at ``u``."""
    return model.cf(u)


def density_eval(model, x):
    """Density of a signal (or noise) model at ``x``."""
    return model.density(x)


def sample(model, n: int, seed) -> Sample:
    """Draw ``n`` i.i.d. values from ``model``; deterministic given ``seed``."""
    if n < 1:
        raise ConfigError("n ≥ 1 required")
    rng = make_rng(seed)
    return Sample(model.sample(int(n), rng), seed=None if isinstance(seed, np.random.Generator) else seed)


def observe(signal: DensityModel, noise: NoiseModel, n: int, seed) -> Sample:
    """Draw ``Y_i = X_i + eps_i`` with ``X ~ signal`` and ``eps ~ noise``."""
    if n < 1:
        raise ConfigError("n ≥ 1 required")
    rng = make_rng(seed)
    x = signal.sample(int(n), rng)
    eps = noise.sample(int(n), rng)
    return Sample(x + eps, seed=None if isinstance(seed, np.random.Generator) else seed)


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of a class-membership check.

    ``value`` is ``(2 pi)^-1 int |cf|^2 w(u) du`` (``inf`` when the integrand
    blows up). ``passed`` is ``None`` when the integral could not be settled.
    """

    value: float
    radius: float
    passed: Optional[bool]
    status: str = field(default="converged")


def _class_integral(law: Law, cls: SmoothnessClass, rel_tol: float = 1e-12,
                    max_doublings: int = 70) -> MembershipResult:
    def integrand(u):
        return math.exp(2.0 * float(law.log_abs_cf(u)) + float(cls.log_weight(u)))

    def piece(a, b):
        try:
            with np.errstate(over="raise"):
                val, _ = integrate.quad(integrand, a, b, limit=200, epsabs=0.0, epsrel=1e-12)
        except (OverflowError, FloatingPointError):
            return math.inf
        return val

    upper = 1.0
    total = piece(0.0, upper)
    history = []
    for _ in range(max_doublings):
        if not math.isfinite(total):
            break
        p = piece(upper, 2.0 * upper)
        total += p
        history.append(p)
        upper *= 2.0
        if not math.isfinite(total):
            break
        if p <= rel_tol * total:
            return MembershipResult(total / math.pi, cls.L, total / math.pi <= cls.L)
        # a tail that keeps growing cannot be integrable
        if len(history) >= 6 and all(b >= a for a, b in zip(history[-6:], history[-5:])) and upper > 1e6:
            total = math.inf
            break
    if not math.isfinite(total):
        return MembershipResult(math.inf, cls.L, False, status="divergent")
    return MembershipResult(total / math.pi, cls.L, None, status="indeterminate")


def check_smoothness_membership(model: DensityModel,
                                smoothness: Optional[SmoothnessClass] = None) -> MembershipResult:
    """Check ``(2 pi)^-1 int |cf(u)|^2 w(u) du <= L`` for the model's class.

    ``w(u) = |u|^(2 beta)`` for Sobolev classes and ``exp(2 alpha |u|^r)`` for
    supersmooth ones. A divergent integral fails; an integral whose tail
    neither settles nor grows is reported as ``indeterminate``.
    """
    cls = smoothness or model.smoothness
    if cls is None:
        raise ConfigError("model has no smoothness class attached")
    return _class_integral(model.law, cls)


@dataclass(frozen=True)
class TailCheck:
    """Numerical check of ``f0(x) >= c0 / (1 + x^2)`` on a window."""

    c0: float
    argmin: float
    window: tuple
    holds: bool


def check_tail_condition(model, window=(-20.0, 20.0), points: int = 4001,
                         threshold: float = 1e-12) -> TailCheck:
    """Grid-minimize ``f(x) (1 + x^2)`` over ``window`` and report ``c0``."""
    x = np.linspace(window[0], window[1], points)
    vals = np.asarray(model.density(x)) * (1.0 + x ** 2)
    i = int(np.argmin(vals))
    c0 = float(vals[i])
    return TailCheck(c0=c0, argmin=float(x[i]), window=tuple(window), holds=c0 > threshold)


# --------------------------------------------------------------------------
# JSON descriptors and data files
# --------------------------------------------------------------------------

_DESCRIPTOR_FIELDS = {
    "gaussian": {"loc", "scale"},
    "laplace_k": {"k", "scale", "loc"},
    "gaussian_mixture": {"weights", "locs", "scales"},
    "none": {"loc"},
}


def _law_from_dict(d: dict) -> Law:
    if not isinstance(d, dict):
        raise ConfigError("model descriptor must be a JSON object")
    unknown = set(d) - _DESCRIPTOR_FIELDS.get(d.get("kind"), set(d)) - {"kind", "smoothness"}
    if unknown:
        allowed = ", ".join(sorted(_DESCRIPTOR_FIELDS[d["kind"]]))
        raise ConfigError(f"field {sorted(unknown)[0]!r}: not a {d['kind']} parameter (allowed: {allowed})")
    try:
        kind = d["kind"]
        if kind == "gaussian":
            return Gaussian(float(d.get("loc", 0.0)), float(d.get("scale", 1.0)))
        if kind == "laplace_k":
            k = d.get("k", 1)
            if int(k) != k:
                raise ConfigError("field 'k' must be a positive integer")
            return LaplaceK(int(k), float(d.get("scale", 1.0)), float(d.get("loc", 0.0)))
        if kind == "gaussian_mixture":
            return GaussianMixture(tuple(d["weights"]), tuple(d["locs"]), tuple(d["scales"]))
        if kind == "none":
            return PointMass(float(d.get("loc", 0.0)))
    except KeyError as exc:
        raise ConfigError(f"model descriptor is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad model descriptor: {exc}") from None
    raise ConfigError(f"field 'kind': unknown model kind {d.get('kind')!r}")


def noise_from_dict(d: dict) -> NoiseModel:
    law = _law_from_dict(d)
    if "smoothness" in d:
        return NoiseModel(law, SmoothnessDescriptor.from_dict(d["smoothness"]))
    if isinstance(law, LaplaceK):
        return NoiseModel.laplace(law.k, law.scale, law.loc)
    if isinstance(law, Gaussian):
        return NoiseModel.gaussian(law.scale, law.loc)
    if isinstance(law, PointMass):
        return NoiseModel(law, SmoothnessDescriptor("none"))
    raise ConfigError(f"field 'smoothness' is required for {law.kind} noise")


def density_from_dict(d: dict) -> DensityModel:
    law = _law_from_dict(d)
    if isinstance(law, PointMass):
        raise ConfigError("field 'kind': a point mass is not a density")
    cls = SmoothnessClass.from_dict(d["smoothness"]) if "smoothness" in d else None
    return DensityModel(law, cls)


def _load_json(text_or_path: str) -> dict:
    text = text_or_path.strip()
    if not text.startswith("{"):
        text = Path(text_or_path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON model descriptor: {exc}") from None


def noise_from_json(text_or_path: str) -> NoiseModel:
    """Parse an inline JSON noise descriptor or a path to one."""
    return noise_from_dict(_load_json(text_or_path))


def density_from_json(text_or_path: str) -> DensityModel:
    """Parse an inline JSON density descriptor or a path to one."""
    return density_from_dict(_load_json(text_or_path))


def read_data_file(path) -> Sample:
    """One real per line; ``#`` comment lines and blank lines are skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                values.append(float(s))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not a real number: {s!r}") from None
    return Sample(np.asarray(values, dtype=float))


def write_data_file(path, values: Sequence[float], header: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")
