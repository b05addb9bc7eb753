"""Tolerances and fixed numerical parameters shared across the package."""

#: core geometry (distances, Minkowski form, isometry checks)
GEOM_TOL = 1e-9
#: limits at the boundary (Gromov products at infinity, asymptotic rays)
BOUNDARY_TOL = 1e-6
#: a ModelPoint/Isometry that drifted this far is considered destroyed
DRIFT_TOL = 1e-6
#: half-plane <-> hyperboloid round trip
ROUNDTRIP_TOL = 1e-12
#: weights of a distribution must sum to one within this
WEIGHT_TOL = 1e-12

#: four-point condition constant used in sampled checks
FOUR_POINT_DELTA = 1.1
#: thin-triangle constant used by tripod checks (log(1 + sqrt 2) < 1)
THIN_TRIANGLE_C = 1.0

#: harmonic-measure stopping rule defaults
HARMONIC_TOL = 1e-9
HARMONIC_MAX_STEPS = 100_000

#: walks: B-orthonormalize every this many steps ...
REORTH_EVERY = 64
#: ... but only while the product's entries stay below this size; past it the
#: Minkowski form cannot be resolved in double precision
REORTH_MAX_ENTRY = 1e4

#: increments are drawn from a substream in blocks of this size
RNG_BLOCK = 128
#: Monte Carlo work is split into chunks of this many sample indices;
#: fixed so results never depend on the worker count
CHUNK_SIZE = 256

#: estimators refuse to report when more than this fraction of samples failed
MAX_FAILURE_FRACTION = 0.10

#: grid steps
THICKNESS_GRID = 0.01
EVENT_GRID = 0.1

#: modular reduction guard
REDUCTION_MAX_MOVES = 10_000
