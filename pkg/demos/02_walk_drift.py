"""
Random walks and their drift
============================

A step distribution on PSL(2,R) drives a walk; its linear escape rate is the drift.
"""

from stathyp.estimators import estimate_drift
from stathyp.geom import HalfPlanePoint, distance, to_model
from stathyp.walk import RngSpec, hyperbolic_pointmass, psl2z_uniform_tts, sample_path

x = to_model(HalfPlanePoint(0.0, 1.0))
mu = psl2z_uniform_tts()
print("atoms:", [a.label for a in mu.atoms])

# a single path, read off step by step
path = sample_path(mu, 200, RngSpec(1), 0)
for k in (10, 50, 200):
    print(f"  d(x, w_{k} x) = {distance(x, path.position(k, x)):.3f}")

# Monte Carlo drift; a pure translation has drift equal to its length
print("hyperbolic(1):", estimate_drift(hyperbolic_pointmass(1.0), x, 500, 10, RngSpec(0)).mean)
a = estimate_drift(mu, x, 1000, 100, RngSpec(0))
print(f"uniform on T, T^-1, S: {a.mean:.4f} +- {a.stderr:.4f}")
