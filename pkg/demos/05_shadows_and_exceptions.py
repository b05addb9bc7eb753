"""
Shadows and exceptional events
==============================

The harmonic measure of a shadow cast from far away is small, and the events that
break the asymptotic picture become rare as walks grow longer.
"""

from stathyp.estimators import ExceptionConfig, estimate_drift, exception_rates, shadow_decay
from stathyp.geom import HalfPlanePoint, to_model
from stathyp.walk import RngSpec, psl2z_uniform_tts

x = to_model(HalfPlanePoint(0.0, 1.0))
mu = psl2z_uniform_tts()

# largest shadow mass among directions at each distance
for d, e in shadow_decay(mu, x, [5.0, 10.0, 20.0], 2.0, 10, 500, RngSpec(0)):
    print(f"max shadow mass at d = {d:>4}: {e.mean:.4f}")

A_hat = estimate_drift(mu, x, 1000, 100, RngSpec(0)).mean
for n in (50, 100):
    cfg = ExceptionConfig(n=n, R=9.0, p=0.7, rho=0.2, D=0.5, c=0.1, A_hat=A_hat, a=0.05)
    rates = exception_rates(mu, x, cfg, 100, RngSpec(0))
    print(f"n = {n}:", {k: round(e.mean, 3) for k, e in rates.items()})
