"""Rejection rates as the alternative drifts away from the null.

A cut-down run of the Gaussian scale scenario under two noise levels.
Heavier smoothing noise (Laplace_3) should cost power across the
ladder, although with only 40 replicates single steps can cross.
Run with ``python3 demos/power_curve.py``; it takes well under a
minute on one core.
"""
from deconvgof.experiments import preset, run_experiment

for name in ("gauss-scale-laplace1", "gauss-scale-laplace3"):
    rep = run_experiment(preset(name, seed=11, N=40, B=100))
    rates = " ".join(f"{row['rate']:.2f}" for row in rep.summary["per_alternative"])
    print(f"{name:22s} {rates}")
print(rep.notes[0])
