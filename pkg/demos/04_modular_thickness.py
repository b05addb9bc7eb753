"""
Thick and thin parts of the modular surface
===========================================

A point is thin when its orbit under PSL(2,Z) climbs above height h in the cusp.
"""

import numpy as np

from stathyp.estimators import thickness_probability
from stathyp.geom import BoundaryDirection, HalfPlanePoint, ray_to_boundary, to_model
from stathyp.lattice import ThinOracle, is_thick, reduce_modular, thickness_proportion
from stathyp.walk import RngSpec, psl2z_uniform_tts

# reduce a point to the standard fundamental domain
z, word = reduce_modular(HalfPlanePoint(0.3, 0.01))
print(f"reduced to {z.re:+.4f} + {z.im:.4f}i via {word!r}")

oracle = ThinOracle.modular(2.0)
for y in (0.5, 1.5, 3.0):
    print(f"  i*{y} thick: {is_thick(oracle, to_model(HalfPlanePoint(0.0, y)))}")

# share of a ray toward an irrational point that stays thick
x = to_model(HalfPlanePoint(0.0, 1.0))
ray = ray_to_boundary(x, BoundaryDirection.from_real(np.sqrt(2.0) - 1.0))
print("thick share of [0, 20]:", thickness_proportion((ray, 0.0, 20.0), oracle))

# probability that both rays of a random pair stay mostly thick
p = thickness_probability(psl2z_uniform_tts(), x, ThinOracle.modular(20.0), 0.5, 0.2, 20.0,
                          100, RngSpec(3))
print(f"P(thick pair) = {p.mean:.3f} +- {p.stderr:.3f}")
