"""
How far apart are two random directions?
========================================

Draw two boundary points from the harmonic measure of a walk, step r along each ray
and divide the distance between the endpoints by r. The mean E(r) tends to 2.
"""

import math

from stathyp.boundary import VisualMeasure
from stathyp.estimators import estimate_E_curve
from stathyp.geom import HalfPlanePoint, to_model
from stathyp.walk import RngSpec, psl2z_uniform_tts

x = to_model(HalfPlanePoint(0.0, 1.0))
radii = [5.0, 10.0, 20.0]

curve = estimate_E_curve(psl2z_uniform_tts(), x, radii, 500, RngSpec(42))
for r, e in curve.entries:
    print(f"harmonic  E({r:>4}) = {e.mean:.4f} +- {e.stderr:.4f}")

# the uniform (visual) measure has the closed form 2 - 2 log 2 / r + o(1/r)
curve = estimate_E_curve(VisualMeasure(), x, radii, 500, RngSpec(42))
for r, e in curve.entries:
    print(f"visual    E({r:>4}) = {e.mean:.4f}   vs {2 - 2 * math.log(2) / r:.4f}")
