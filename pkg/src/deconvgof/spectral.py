"""Frequency-domain machinery shared by the estimators.

All integrals over frequency are composite trapezoid sums on a symmetric
uniform grid whose half-width equals the kernel support edge over the
bandwidth, so the integrands vanish outside the grid and no truncation error
is made.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, NumericalError, WeightOverflowError

__all__ = [
    "KERNELS",
    "DEFAULT_KERNEL",
    "DEFAULT_GRID_COUNT",
    "KernelSpec",
    "FrequencyGrid",
    "phi_kernel",
    "support_edge",
    "canonical_kernel",
    "make_grid",
    "integrate",
    "deconv_weight",
    "kernel_time_domain",
    "exp_sums",
    "integrate_half_line",
]

KERNELS = {"sinc": 1.0, "smoothed_trapezoid": 2.0}
_ALIASES = {"trapezoid": "smoothed_trapezoid", "sinc": "sinc", "smoothed_trapezoid": "smoothed_trapezoid"}
DEFAULT_KERNEL = "smoothed_trapezoid"
DEFAULT_GRID_COUNT = 4096
# below this |cf| the deconvolution weight is not representable
CF_FLOOR = 1e-300


def canonical_kernel(kind: str) -> str:
    try:
        return _ALIASES[kind]
    except KeyError:
        raise ConfigError(f"unknown kernel {kind!r}; expected one of {sorted(_ALIASES)}") from None


def support_edge(kind: str) -> float:
    """Half-width of the support of the kernel's Fourier transform."""
    return KERNELS[canonical_kernel(kind)]


def phi_kernel(kind: str, u):
    """Fourier transform of the kernel.

    ``sinc``: indicator of ``|u| <= 1``.
    ``smoothed_trapezoid``: 1 on ``|u| <= 1``, ``exp(1 - (|u|(2 - |u|))^-2)``
    on ``1 <= |u| <= 2`` and 0 beyond; infinitely differentiable.
    """
    kind = canonical_kernel(kind)
    u = np.asarray(u, dtype=float)
    au = np.abs(np.atleast_1d(u))
    if kind == "sinc":
        out = np.where(au <= 1.0, 1.0, 0.0)
    else:
        out = np.zeros_like(au)
        out[au <= 1.0] = 1.0
        band = (au > 1.0) & (au < 2.0)
        t = au[band] * (2.0 - au[band])
        out[band] = np.exp(1.0 - t ** -2.0)
    return out.reshape(u.shape) if u.ndim else float(out[0])


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and bandwidth."""

    kind: str = DEFAULT_KERNEL
    h: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kernel(self.kind))
        if not self.h > 0:
            raise ConfigError("bandwidth h must be > 0")

    @property
    def cutoff(self) -> float:
        """Largest frequency where ``phi_kernel(h u)`` can be nonzero."""
        return KERNELS[self.kind] / self.h

    def phi(self, u):
        return phi_kernel(self.kind, self.h * np.asarray(u, dtype=float))


@dataclass(frozen=True)
class FrequencyGrid:
    """Nodes ``u_j = -u_max + j du``, ``j = 0..count``, with ``du = 2 u_max / count``."""

    u_max: float
    count: int

    def __post_init__(self):
        if self.count % 2:
            raise ConfigError(f"grid count must be even (got {self.count})")
        if self.count < 2:
            raise ConfigError("grid count must be ≥ 2")
        if not self.u_max > 0:
            raise ConfigError("u_max must be > 0")

    @property
    def du(self) -> float:
        return 2.0 * self.u_max / self.count

    @cached_property
    def nodes(self) -> np.ndarray:
        # built from the half grid so that nodes[::-1] == -nodes exactly
        half = self.half_nodes
        return np.concatenate([-half[:0:-1], half])

    @cached_property
    def half_nodes(self) -> np.ndarray:
        """Nonnegative nodes ``0, du, ..., u_max``."""
        return np.arange(self.count // 2 + 1) * self.du

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.count + 1, self.du)
        w[0] = w[-1] = 0.5 * self.du
        return w

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Weights that integrate an even integrand from its values on ``half_nodes``."""
        w = np.full(self.count // 2 + 1, 2.0 * self.du)
        w[0] = self.du
        w[-1] = self.du
        return w

    def refine(self) -> "FrequencyGrid":
        return FrequencyGrid(self.u_max, 2 * self.count)


def make_grid(h: float, kernel_kind: str = DEFAULT_KERNEL, count: int = DEFAULT_GRID_COUNT,
              min_count: int = 256) -> FrequencyGrid:
    """Grid spanning exactly the frequency support of ``phi_kernel(h u)``."""
    if count % 2:
        raise ConfigError(f"grid count must be even (got {count})")
    if count < min_count:
        raise ConfigError(f"grid count must be ≥ {min_count} (got {count})")
    if not h > 0:
        raise ConfigError("bandwidth h must be > 0")
    return FrequencyGrid(support_edge(kernel_kind) / h, int(count))


def integrate(grid: FrequencyGrid, values, hermitian: bool = False):
    """Trapezoid rule over ``[-u_max, u_max]`` for values sampled on ``grid.nodes``.

    With ``hermitian=True`` the values are first replaced by
    ``(v(u) + conj(v(-u))) / 2`` and a real number is returned.
    """
    values = np.asarray(values)
    if values.shape[-1] != grid.count + 1:
        raise ConfigError(
            f"expected {grid.count + 1} values on the grid, got {values.shape[-1]}")
    if hermitian:
        values = 0.5 * (values + np.conj(values[..., ::-1])).real
    return values @ grid.weights


def deconv_weight(u, kernel: KernelSpec, noise):
    """``phi_kernel(h u) / cf_noise(u)``; exactly 0 where the kernel vanishes.

    Raises :class:`WeightOverflowError` naming the first offending frequency
    if the noise cf is below ``1e-300`` in modulus where the kernel is active.
    """
    u = np.asarray(u, dtype=float)
    flat = np.atleast_1d(u)
    phik = kernel.phi(flat)
    active = phik != 0.0
    out = np.zeros(flat.shape, dtype=complex)
    if np.any(active):
        ua = flat[active]
        g = np.atleast_1d(np.asarray(noise.cf(ua), dtype=complex))
        small = np.abs(g) < CF_FLOOR
        if np.any(small):
            i = int(np.argmax(small))
            raise WeightOverflowError(ua[i], g[i])
        out[active] = phik[active] / g
    return out.reshape(u.shape) if u.ndim else complex(out[0])


def kernel_time_domain(kernel: KernelSpec, noise, x, count: int = DEFAULT_GRID_COUNT):
    """Rescaled deconvolution kernel ``K_{n,h}(x)`` by inverse Fourier quadrature.

    ``(2 pi)^-1 int exp(-i u x) phi_kernel(h u) / cf_noise(u) du``. Meant for
    O(n^2) reference computations, not for the fast estimators.
    """
    grid = make_grid(kernel.h, kernel.kind, count)
    u = grid.nodes
    w = deconv_weight(u, kernel, noise)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.exp(-1j * np.outer(x, u)) * w
    out = integrate(grid, vals) / (2.0 * math.pi)
    imag = np.max(np.abs(out.imag)) if out.size else 0.0
    if imag > 1e-10 * max(1.0, float(np.max(np.abs(out.real)))):
        raise ConfigError(f"kernel is not real (imaginary residue {imag:.2e}); is the noise symmetric?")
    out = out.real
    return out if out.size > 1 else float(out[0])


def exp_sums(u0: float, du: float, m: int, y, block: int = 64, chunk: int = 8192) -> np.ndarray:
    """``S_j = sum_k exp(i (u0 + j du) y_k)`` for ``j = 0..m-1``.

    Each block of ``block`` consecutive frequencies is obtained from the
    previous one by a single rotation ``exp(i block du y_k)``; only the first
    block is evaluated with transcendental calls. The rotation is exact in
    exact arithmetic; in floating point the drift after ``m / block``
    rotations is a few ulps per rotation.
    """
    y = np.asarray(y, dtype=float).ravel()
    out = np.zeros(m, dtype=complex)
    if m == 0 or y.size == 0:
        return out
    block = max(1, min(block, m))
    offsets = np.arange(block) * du
    for start in range(0, y.size, chunk):
        yc = y[start:start + chunk]
        cur = np.exp(1j * np.outer(u0 + offsets, yc))
        step = np.exp(1j * (block * du) * yc)
        for j in range(0, m, block):
            stop = min(block, m - j)
            out[j:j + stop] += cur[:stop].sum(axis=1)
            if j + block < m:
                cur *= step
    return out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _gauss_panel(fn, a: float, b: float, pieces: int) -> float:
    edges = np.linspace(a, b, pieces + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    vals = np.asarray(fn((mid + half * _GL_X).ravel()), dtype=float).reshape(pieces, -1)
    return float(np.sum((vals @ _GL_W) * half[:, 0]))


def _adaptive_panel(fn, a: float, b: float, rel_tol: float, abs_floor: float) -> float:
    # composite 20-point Gauss-Legendre, doubling the piece count until stable
    pieces = 4
    prev = _gauss_panel(fn, a, b, pieces)
    for _ in range(14):
        pieces *= 2
        cur = _gauss_panel(fn, a, b, pieces)
        scale = _gauss_panel(lambda u: np.abs(fn(u)), a, b, pieces)
        if abs(cur - prev) <= max(rel_tol * abs(cur), abs_floor, 1e-15 * scale):
            return cur
        prev = cur
    raise NumericalError(f"quadrature on [{a:g}, {b:g}] did not settle")


def integrate_half_line(fn, start: float = 0.0, first: float = 1.0, rel_tol: float = 1e-13,
                        max_doublings: int = 80) -> float:
    """``int_start^inf fn(u) du`` for a decaying integrand, by doubling panels.

    ``fn`` must accept arrays. Each panel ``[a, 2a]`` is integrated by
    composite Gauss-Legendre with enough pieces to resolve oscillations; the
    loop stops once a panel contributes less than ``rel_tol`` of the total.
    """
    upper = max(first, 2.0 * start) if start > 0 else first
    total = _adaptive_panel(fn, start, upper, rel_tol, 0.0)
    for _ in range(max_doublings):
        piece = _adaptive_panel(fn, upper, 2.0 * upper, rel_tol, rel_tol * abs(total))
        total += piece
        upper *= 2.0
        if abs(piece) <= rel_tol * abs(total) or total == 0.0 and piece == 0.0:
            return total
    raise NumericalError("integral over the half line did not converge")
