"""
Hyperbolic plane basics
=======================

Points live on the hyperboloid; the upper half-plane is a convenience view.
"""

import math

import numpy as np

from stathyp.geom import (BoundaryDirection, HalfPlanePoint, Isometry, apply, distance,
                          geodesic_between, gromov_product_boundary, point_at, to_halfplane,
                          to_model)

# two points in the half-plane, moved to the hyperboloid
i = to_model(HalfPlanePoint(0.0, 1.0))
z = to_model(HalfPlanePoint(1.0, 2.0))
print("d(i, 1+2i) =", distance(i, z))

# a Mobius map acts as an isometry
g = Isometry.from_sl2([[2.0, 1.0], [1.0, 1.0]])
print("distance preserved:", distance(apply(g, i), apply(g, z)))

# walk along the geodesic through both points
gamma = geodesic_between(i, z)
for t in np.linspace(0.0, distance(i, z), 4):
    h = to_halfplane(point_at(gamma, t))
    print(f"  t = {t:.3f}: {h.re:+.4f} + {h.im:.4f}i")

# Gromov product of two boundary points seen from i
xi = BoundaryDirection.from_real(0.0)
eta = BoundaryDirection.from_real(math.inf)  # antipodal as seen from i
print("(0 | inf)_i =", abs(gromov_product_boundary(i, xi, eta)))
