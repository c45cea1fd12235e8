"""Estimate the squared norm of a hidden density and test a simple null.

The signal is N(1, 1.5^2), seen only through Laplace noise. We estimate
``int f^2`` from the noisy draws, then ask whether the signal could be
N(1, 1). Run with ``python3 demos/estimate_and_test.py``.
"""
import math

from deconvgof.functional import EstimationSetup, estimate_d, squared_norm
from deconvgof.gof import TestSetup, gof_test
from deconvgof.models import DensityModel, NoiseModel, SmoothnessClass, observe

signal = DensityModel.gaussian(1.0, 1.5)
noise = NoiseModel.laplace(1, 1.0)
cls = SmoothnessClass.sobolev(2.0, L=1.0)

sample = observe(signal, noise, 1000, seed=42)
setup = EstimationSetup(cls, noise.smoothness)
res = estimate_d(sample, noise, setup=setup)
print(f"d_n = {res.d_n:.5f}  (true {squared_norm(signal):.5f}, h = {res.h:.3f}, {res.regime})")
print(f"bias bound {res.bias_bound:.2e}, sd proxy {math.sqrt(res.variance_proxy):.2e}")

for label, f0 in (("true law", signal), ("narrower law", DensityModel.gaussian(1.0, 1.0))):
    out = gof_test(sample, TestSetup(f0, noise, cls, level=0.05), B=200, seed=7)
    verdict = "reject" if out.reject else "accept"
    print(f"null = {label:13s} T = {out.T:+.5f}  threshold = {out.threshold:.5f}  -> {verdict}")
