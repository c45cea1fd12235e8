"""Bump perturbations that noise hides almost completely.

Signed bumps of width h are added to N(0.5, 1). Their L2 size shrinks
like h^(2 beta), but after convolution with the noise the visible
difference is far smaller still. Run with ``python3 demos/hidden_bumps.py``.
"""
import numpy as np

from deconvgof.adversarial import PerturbationFamily, sample_theta
from deconvgof.models import DensityModel, NoiseModel

f0 = DensityModel.gaussian(0.5, 1.0)
noise = NoiseModel.laplace(1, 0.5)
y = np.linspace(-1.0, 2.0, 301)

print("   h   M   ||f - f0||^2   max |p - p0|")
for h in (0.2, 0.1, 0.05):
    fam = PerturbationFamily(f0, noise, beta=2.0, sigma=2.0, h=h)
    theta = sample_theta(fam.M, 3)
    gap = np.max(np.abs(fam.observation_perturbation(theta, y)))
    print(f"{h:5.2f} {fam.M:3d}   {fam.separation_sq(theta):.3e}      {gap:.3e}")
