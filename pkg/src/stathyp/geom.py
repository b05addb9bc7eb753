"""
Constant curvature -1 geometry in the hyperboloid model.

Points of H^n are vectors x in R^{n+1} with B(x, x) = -1 and x_0 > 0, where
B(x, y) = -x_0 y_0 + sum_i x_i y_i.  Boundary points are null vectors scaled
to x_0 = 1, so their spatial part is a unit vector (the direction seen from
the standard origin e_0).  For n = 2 the upper half-plane is available as an
adapter through the fixed correspondence

    a + bi  <->  ((a^2 + b^2 + 1) / 2b, (a^2 + b^2 - 1) / 2b, a / b)

which sends i to e_0, the real point a to the direction
((a^2 - 1) / (a^2 + 1), 2a / (a^2 + 1)) and infinity to (1, 0).  Under it an
SL(2, R) matrix g acting by Moebius maps acts on the hyperboloid through
X -> g X g^T on the symmetric matrices X = [[x0 + x1, x2], [x2, x0 - x1]].

Far from the origin the hyperboloid coordinates grow like e^d and lose
absolute precision; the ``polar_*`` and ``segment_distance_from_sides``
helpers work from radii, half-angle sines and side lengths instead and stay
accurate at any scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .constants import DRIFT_TOL, GEOM_TOL, ROUNDTRIP_TOL


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class DimensionMismatch(GeometryError):
    pass


class InvariantViolation(GeometryError):
    """A point or isometry no longer satisfies its defining equations."""


class DegenerateGeodesic(GeometryError):
    pass


def mink(x, y):
    """Minkowski form B along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def _scale(x0: float) -> float:
    return max(1.0, x0 * x0)


@dataclass(frozen=True, eq=False)
class ModelPoint:
    """A point of H^n on the future sheet of the hyperboloid."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 3:
            raise GeometryError("a ModelPoint needs n+1 >= 3 coordinates")
        if not np.all(np.isfinite(c)):
            raise InvariantViolation("non-finite coordinates")
        if c[0] <= 0:
            raise InvariantViolation("point is not on the future sheet")
        # relative check: far points carry absolute error ~ eps * x0^2
        if abs(mink(c, c) + 1.0) > GEOM_TOL * _scale(c[0]):
            raise InvariantViolation(f"B(x,x) = {mink(c, c)!r}, expected -1")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    @classmethod
    def origin(cls, n: int = 2) -> "ModelPoint":
        c = np.zeros(n + 1)
        c[0] = 1.0
        return cls(c)

    @classmethod
    def repaired(cls, coords) -> "ModelPoint":
        """Rescale a vector that drifted slightly off the hyperboloid."""
        c = np.asarray(coords, dtype=float)
        q = -mink(c, c)
        if not abs(q - 1.0) <= DRIFT_TOL * _scale(abs(c[0])):
            raise InvariantViolation(
                f"B(x,x) drifted to {-q!r}; re-orthogonalize the isometry upstream")
        # below the rounding noise of B the rescale would only add error
        if q > 0 and abs(q - 1.0) > 8.0 * np.finfo(float).eps * _scale(abs(c[0])):
            c = c / math.sqrt(q)
        if c[0] < 0:
            raise InvariantViolation("point left the future sheet")
        return cls(c)

    @classmethod
    def polar(cls, t: float, u) -> "ModelPoint":
        """The point at distance t from the origin in unit direction u."""
        u = np.asarray(u, dtype=float)
        return cls(np.concatenate(([math.cosh(t)], math.sinh(t) * u)))

    def __repr__(self):
        return f"ModelPoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True)
class HalfPlanePoint:
    re: float
    im: float

    def __post_init__(self):
        if not self.im > 0:
            raise GeometryError("half-plane points need im > 0")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "HalfPlanePoint":
        return cls(z.real, z.imag)


@dataclass(frozen=True, eq=False)
class BoundaryDirection:
    """A point of the sphere at infinity: null vector with 0-th coordinate 1."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 3 or not c[0] > 0:
            raise GeometryError("boundary direction needs n+1 >= 3 coords, c0 > 0")
        c = c / c[0]
        u = c[1:]
        nu = math.sqrt(float(u @ u))
        if abs(nu - 1.0) > 1e-6:
            raise InvariantViolation("boundary direction is not a null vector")
        c[1:] = u / nu
        c[0] = 1.0
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    @property
    def unit(self) -> np.ndarray:
        return self.coords[1:]

    @classmethod
    def from_unit(cls, u) -> "BoundaryDirection":
        u = np.asarray(u, dtype=float)
        return cls(np.concatenate(([1.0], u / np.linalg.norm(u))))

    @classmethod
    def from_real(cls, a: float) -> "BoundaryDirection":
        """Half-plane boundary point a (use math.inf for infinity)."""
        if math.isinf(a):
            return cls(np.array([1.0, 1.0, 0.0]))
        d = a * a + 1.0
        return cls(np.array([1.0, (a * a - 1.0) / d, 2.0 * a / d]))

    def to_real(self) -> float:
        """Half-plane coordinate of this boundary point (n = 2 only)."""
        r = self.exact_real()
        return math.inf if r is None else float(r)

    def exact_real(self) -> Optional[Fraction]:
        """
        Exact half-plane coordinate of the float direction, or None for
        infinity.  The stored floats are treated as exact rationals so the
        result is a well-defined point to any depth.
        """
        if self.dim != 2:
            raise GeometryError("half-plane adapter is for n = 2 only")
        u1, u2 = (Fraction(float(v)) for v in self.coords[1:])
        if u1 > 0:
            if u2 == 0:
                return None
            return (1 + u1) / u2
        return u2 / (1 - u1)

    def __repr__(self):
        return f"BoundaryDirection({np.array2string(self.coords, precision=6)})"


def _sl2_to_lorentz(g: np.ndarray) -> np.ndarray:
    """3x3 matrix of X -> g X g^T in (x0, x1, x2) coordinates."""
    g = np.asarray(g, dtype=float)
    basis = (np.eye(2), np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    cols = []
    for e in basis:
        y = g @ e @ g.T
        cols.append([(y[0, 0] + y[1, 1]) / 2, (y[0, 0] - y[1, 1]) / 2,
                     (y[0, 1] + y[1, 0]) / 2])
    return np.array(cols).T


def _jmat(n: int) -> np.ndarray:
    j = np.eye(n + 1)
    j[0, 0] = -1.0
    return j


@dataclass(frozen=True, eq=False)
class Isometry:
    """
    An orientation- and sheet-preserving isometry of H^n.

    ``matrix`` is the (n+1)x(n+1) Lorentz matrix.  For n = 2 an optional
    ``sl2`` holds a 2x2 representative (determinant 1, defined up to sign)
    related to ``matrix`` through the half-plane correspondence.
    """

    matrix: np.ndarray
    sl2: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 3:
            raise GeometryError("isometry matrix must be square of size >= 3")
        # relative: long products carry rounding ~ eps * |M|^2 in M^T J M
        j = _jmat(m.shape[0] - 1)
        scale = max(1.0, float(np.max(np.abs(m))) ** 2)
        if not m[0, 0] > 0 or np.max(np.abs(m.T @ j @ m - j)) > DRIFT_TOL * scale:
            raise InvariantViolation("matrix does not preserve B and the future sheet")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.sl2 is not None:
            s = np.array(self.sl2, dtype=float)
            if s.shape != (2, 2) or m.shape != (3, 3):
                raise GeometryError("sl2 representative only exists for n = 2")
            s.setflags(write=False)
            object.__setattr__(self, "sl2", s)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0] - 1

    @classmethod
    def identity(cls, n: int = 2) -> "Isometry":
        return cls(np.eye(n + 1), np.eye(2) if n == 2 else None)

    @classmethod
    def from_sl2(cls, g) -> "Isometry":
        g = np.asarray(g, dtype=float)
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        if not det > 0:
            raise GeometryError("2x2 matrix must have positive determinant")
        g = g / math.sqrt(det)
        return cls(_sl2_to_lorentz(g), g)

    @classmethod
    def hyperbolic(cls, length: float) -> "Isometry":
        """Translation by ``length`` along the imaginary axis, toward infinity."""
        e = math.exp(length / 2)
        return cls.from_sl2([[e, 0.0], [0.0, 1.0 / e]])

    @classmethod
    def rotation(cls, angle: float) -> "Isometry":
        """Rotation about i (the origin) by ``angle``."""
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return cls.from_sl2([[c, s], [-s, c]])

    def __matmul__(self, other: "Isometry") -> "Isometry":
        if self.dim != other.dim:
            raise DimensionMismatch("isometries of different dimension")
        s = None
        if self.sl2 is not None and other.sl2 is not None:
            s = self.sl2 @ other.sl2
        return Isometry(self.matrix @ other.matrix, s)

    def inverse(self) -> "Isometry":
        j = _jmat(self.dim)
        s = None
        if self.sl2 is not None:
            a, b, c, d = self.sl2.ravel()
            s = np.array([[d, -b], [-c, a]])
        return Isometry(j @ self.matrix.T @ j, s)

    def defect(self) -> float:
        """Largest entry of |M^T J M - J|."""
        j = _jmat(self.dim)
        return float(np.max(np.abs(self.matrix.T @ j @ self.matrix - j)))

    def close_to(self, other: "Isometry", tol: float = GEOM_TOL) -> bool:
        return bool(np.allclose(self.matrix, other.matrix, atol=tol, rtol=tol))

    def moebius(self, z: complex) -> complex:
        if self.sl2 is None:
            raise GeometryError("no 2x2 representative")
        a, b, c, d = self.sl2.ravel()
        return (a * z + b) / (c * z + d)

    def translation_length(self) -> float:
        """inf over x of d(x, gx); zero for elliptic and parabolic elements."""
        if self.sl2 is not None:
            tr = abs(self.sl2[0, 0] + self.sl2[1, 1])
            return 2 * math.acosh(tr / 2) if tr > 2 else 0.0
        ev = np.abs(np.linalg.eigvals(self.matrix))
        return float(math.log(max(ev.max(), 1.0)))

    def __repr__(self):
        if self.sl2 is not None:
            return f"Isometry(sl2={self.sl2.tolist()})"
        return f"Isometry({self.matrix.tolist()})"


def _check_dims(*objs):
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def distance(x: ModelPoint, y: ModelPoint) -> float:
    """Hyperbolic distance arccosh(-B(x, y)), evaluated stably for near points."""
    _check_dims(x, y)
    m = -float(mink(x.coords, y.coords))
    if m < 1.0 - GEOM_TOL * max(1.0, x.coords[0] * y.coords[0]):
        raise InvariantViolation(f"-B(x,y) = {m!r} < 1")
    if m > 2.0:
        return math.acosh(m)
    diff = x.coords - y.coords
    q = max(float(mink(diff, diff)), 0.0)
    return 2.0 * math.asinh(math.sqrt(q) / 2.0)


@dataclass(frozen=True, eq=False)
class Geodesic:
    """
    Unit-speed geodesic gamma(t) = cosh(t) anchor + sinh(t) tangent, oriented
    toward the forward endpoint (t -> +inf).
    """

    anchor: ModelPoint
    tangent: np.ndarray

    def __post_init__(self):
        v = np.array(self.tangent, dtype=float)
        o = self.anchor.coords
        if v.shape != o.shape:
            raise DimensionMismatch("tangent and anchor dimensions differ")
        sc = _scale(o[0])
        if abs(mink(v, v) - 1.0) > 1e-6 * sc or abs(mink(o, v)) > 1e-6 * sc:
            raise InvariantViolation("tangent is not a unit vector orthogonal to the anchor")
        v.setflags(write=False)
        object.__setattr__(self, "tangent", v)

    @property
    def dim(self) -> int:
        return self.anchor.dim

    @property
    def forward(self) -> BoundaryDirection:
        return BoundaryDirection(self.anchor.coords + self.tangent)

    @property
    def backward(self) -> BoundaryDirection:
        return BoundaryDirection(self.anchor.coords - self.tangent)

    @property
    def endpoints(self) -> tuple[BoundaryDirection, BoundaryDirection]:
        return self.backward, self.forward

    def __call__(self, t: float) -> ModelPoint:
        return point_at(self, t)

    def reanchored(self, t: float) -> "Geodesic":
        """Same oriented geodesic with parameter 0 moved to the old parameter t."""
        o, v = self.anchor.coords, self.tangent
        ch, sh = math.cosh(t), math.sinh(t)
        return Geodesic(ModelPoint.repaired(ch * o + sh * v), sh * o + ch * v)

    @classmethod
    def from_endpoints(cls, backward: BoundaryDirection, forward: BoundaryDirection,
                       near: Optional[ModelPoint] = None) -> "Geodesic":
        """Geodesic from ``backward`` to ``forward``, anchored at the foot of ``near``."""
        _check_dims(backward, forward)
        a, b = backward.coords, forward.coords
        q = -2.0 * float(mink(a, b))
        if q <= 1e-300:
            raise DegenerateGeodesic("endpoints coincide")
        r = math.sqrt(q)
        g = cls(ModelPoint.repaired((a + b) / r), (b - a) / r)
        if near is not None:
            _, t = dist_to_geodesic(near, g)
            g = g.reanchored(t)
        return g


def point_at(gamma: Geodesic, t: float) -> ModelPoint:
    o, v = gamma.anchor.coords, gamma.tangent
    return ModelPoint.repaired(math.cosh(t) * o + math.sinh(t) * v)


def geodesic_between(x: ModelPoint, y: ModelPoint) -> Geodesic:
    """Geodesic anchored at x and passing through y at parameter d(x, y)."""
    _check_dims(x, y)
    d = distance(x, y)
    if d == 0.0:
        raise DegenerateGeodesic("x = y")
    if d < 1e-4:
        # (y - cosh d x) / sinh d cancels badly for tiny d
        w = y.coords - x.coords
        w = w + mink(x.coords, w) * x.coords
        v = w / math.sqrt(mink(w, w))
    else:
        v = (y.coords - math.cosh(d) * x.coords) / math.sinh(d)
    return Geodesic(x, v)


def ray_to_boundary(x: ModelPoint, xi: BoundaryDirection) -> Geodesic:
    _check_dims(x, xi)
    c = -float(mink(x.coords, xi.coords))
    return Geodesic(x, xi.coords / c - x.coords)


def gromov_product(x: ModelPoint, y: ModelPoint, z: ModelPoint) -> float:
    return 0.5 * (distance(x, y) + distance(x, z) - distance(y, z))


def half_angle_sine(o: ModelPoint, xi: BoundaryDirection, eta: BoundaryDirection) -> float:
    """sin(theta / 2) for the visual angle theta at o between xi and eta."""
    _check_dims(o, xi, eta)
    du = xi.unit - eta.unit
    nb = 0.5 * float(du @ du)  # -B(xi, eta) for unit-normalized null vectors
    s2 = nb / (2.0 * float(mink(o.coords, xi.coords)) * float(mink(o.coords, eta.coords)))
    return math.sqrt(max(s2, 0.0))


def gromov_product_boundary(o: ModelPoint, xi: BoundaryDirection,
                            eta: BoundaryDirection) -> float:
    """
    (xi, eta)_o = -log sin(theta / 2); returns ``math.inf`` when xi = eta.
    """
    s = half_angle_sine(o, xi, eta)
    return math.inf if s == 0.0 else -math.log(s)


def dist_to_geodesic(x: ModelPoint, gamma: Geodesic) -> tuple[float, float]:
    """Distance from x to gamma and the (unique) parameter of the closest point."""
    _check_dims(x, gamma)
    alpha = -float(mink(x.coords, gamma.anchor.coords))
    beta = float(mink(x.coords, gamma.tangent))
    t = math.atanh(max(min(beta / alpha, 1.0 - 1e-16), -1.0 + 1e-16))
    return distance(x, point_at(gamma, t)), t


def apply(g: Isometry, p: Union[ModelPoint, BoundaryDirection, Geodesic]):
    """Action on points, boundary directions and geodesics."""
    _check_dims(g, p)
    m = g.matrix
    if isinstance(p, ModelPoint):
        return ModelPoint.repaired(m @ p.coords)
    if isinstance(p, BoundaryDirection):
        y = m @ p.coords
        if not y[0] > 0:
            raise InvariantViolation("isometry does not preserve the future cone")
        return BoundaryDirection(y)
    if isinstance(p, Geodesic):
        return Geodesic(apply(g, p.anchor), m @ p.tangent)
    raise TypeError(f"cannot apply an isometry to {type(p).__name__}")


def shadow_product(o: ModelPoint, y: ModelPoint, xi: BoundaryDirection) -> float:
    """(y, xi)_o = lim_t (y, gamma_xi(t))_o for the ray from o toward xi."""
    _check_dims(o, y, xi)
    d = distance(o, y)
    ratio = float(mink(y.coords, xi.coords)) / float(mink(o.coords, xi.coords))
    return 0.5 * (d - math.log(ratio))


def in_shadow(o: ModelPoint, y: ModelPoint, tau: float, xi: BoundaryDirection) -> bool:
    """Membership of xi in the shadow shad_o(y, tau)."""
    if tau < 0:
        raise GeometryError("tau must be nonnegative")
    d = distance(o, y)
    if tau >= d:
        return True
    # the boundary case (xi behind y, tau = 0) is an equality; allow rounding
    return shadow_product(o, y, xi) >= d - tau - GEOM_TOL


# -- half-plane adapter (n = 2) ------------------------------------------

def to_model(p: HalfPlanePoint) -> ModelPoint:
    a, b = p.re, p.im
    r2 = a * a + b * b
    return ModelPoint(np.array([(r2 + 1.0) / (2 * b), (r2 - 1.0) / (2 * b), a / b]))


def to_halfplane(x: ModelPoint) -> HalfPlanePoint:
    if x.dim != 2:
        raise GeometryError("half-plane adapter is for n = 2 only")
    x0, x1, x2 = x.coords
    b = 1.0 / float(x0 - x1)
    return HalfPlanePoint(float(x2) * b, b)


def convert(p: Union[HalfPlanePoint, ModelPoint]):
    """Half-plane point to hyperboloid point and back (n = 2)."""
    if isinstance(p, HalfPlanePoint):
        return to_model(p)
    return to_halfplane(p)


def halfplane_distance(p: HalfPlanePoint, q: HalfPlanePoint) -> float:
    dz2 = (p.re - q.re) ** 2 + (p.im - q.im) ** 2
    return 2.0 * math.asinh(math.sqrt(dz2 / (4.0 * p.im * q.im)))


def frame(x: ModelPoint) -> Isometry:
    """An isometry taking the origin e_0 to x (upper-triangular sl2 for n = 2)."""
    if x.dim == 2:
        z = to_halfplane(x)
        sb = math.sqrt(z.im)
        return Isometry.from_sl2([[sb, z.re / sb], [0.0, 1.0 / sb]])
    c = x.coords
    n = x.dim
    m = np.empty((n + 1, n + 1))
    m[0, 0] = c[0]
    m[0, 1:] = c[1:]
    m[1:, 0] = c[1:]
    m[1:, 1:] = np.eye(n) + np.outer(c[1:], c[1:]) / (1.0 + c[0])
    return Isometry(m)


# -- scale-free helpers ----------------------------------------------------

def polar_distance(t1, t2, s):
    """
    Distance between the points at radii t1, t2 from a common centre whose
    directions make an angle with half-angle sine s.  Works with arrays.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    h = np.sinh((t1 - t2) / 2.0)
    q = h * h + np.sinh(t1) * np.sinh(t2) * np.square(s)
    return 2.0 * np.arcsinh(np.sqrt(q))


def segment_distance_from_sides(a, b, D):
    """
    Distance from P to the segment [Q1, Q2] given a = d(P, Q1),
    b = d(P, Q2) and D = d(Q1, Q2).  Vectorized.
    """
    a, b, D = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, D)))
    out = np.minimum(a, b)
    # foot strictly inside iff both base angles are acute:
    # cos^2(A/2) > sin^2(A/2) at Q1, and the same at Q2
    p1 = np.sinh(np.maximum((a + b + D) / 2, 0.0))
    pa = np.sinh(np.maximum((a + D - b) / 2, 0.0))
    pb = np.sinh(np.maximum((b + D - a) / 2, 0.0))
    p0 = np.sinh(np.maximum((a + b - D) / 2, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        acute1 = p1 * pa > p0 * pb   # angle at Q1
        acute2 = p1 * pb > p0 * pa   # angle at Q2
        sinh_h = 2.0 * np.sqrt(p0 * pb * p1 * pa) / np.sinh(D)
    inside = acute1 & acute2 & (D > 0)
    out = np.where(inside, np.arcsinh(np.where(inside, sinh_h, 0.0)), out)
    return out if out.ndim else float(out)


__all__ = [
    "BoundaryDirection", "DegenerateGeodesic", "DimensionMismatch", "Geodesic",
    "GeometryError", "HalfPlanePoint", "InvariantViolation", "Isometry",
    "ModelPoint", "apply", "convert", "dist_to_geodesic", "distance", "frame",
    "geodesic_between", "gromov_product", "gromov_product_boundary",
    "half_angle_sine", "halfplane_distance", "in_shadow", "mink", "point_at",
    "polar_distance", "ray_to_boundary", "segment_distance_from_sides",
    "shadow_product", "to_halfplane", "to_model", "ROUNDTRIP_TOL",
]
