import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from stathyp.geom import (BoundaryDirection, DegenerateGeodesic, DimensionMismatch,
                          GeometryError, HalfPlanePoint, InvariantViolation, Isometry,
                          ModelPoint, apply, convert, dist_to_geodesic, distance, frame,
                          geodesic_between, gromov_product, gromov_product_boundary,
                          halfplane_distance, in_shadow, point_at, polar_distance,
                          ray_to_boundary, segment_distance_from_sides, shadow_product,
                          to_halfplane, to_model)

I = to_model(HalfPlanePoint(0.0, 1.0))


def hp(a, b):
    return to_model(HalfPlanePoint(a, b))


angles = st.floats(0.0, 2 * math.pi)
radii = st.floats(0.0, 6.0)


def polar(t, a, n=2):
    u = np.zeros(n)
    u[0], u[1] = math.cos(a), math.sin(a)
    return ModelPoint.polar(t, u)


def random_iso(rng):
    a, b = rng.uniform(0, 2 * math.pi, 2)
    ell = rng.uniform(0, 3)
    rot = lambda t: np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    return Isometry.from_sl2(rot(a) @ np.diag([math.exp(ell / 2), math.exp(-ell / 2)]) @ rot(b))


# -- types ---------------------------------------------------------------------

def test_model_point_validation():
    with pytest.raises(InvariantViolation):
        ModelPoint([1.0, 1.0, 0.0])
    with pytest.raises(InvariantViolation):
        ModelPoint([-1.0, 0.0, 0.0])
    with pytest.raises(GeometryError):
        ModelPoint([1.0, 0.0])


def test_halfplane_roundtrip():
    for z in (2j, 1 + 1j, -3.5 + 0.01j, 7 + 40j):
        p = HalfPlanePoint.from_complex(z)
        q = to_halfplane(to_model(p))
        assert abs(q.z - z) <= 1e-12 * max(1.0, abs(z))
    assert np.allclose(convert(HalfPlanePoint(0, 1)).coords, [1, 0, 0], atol=0)
    with pytest.raises(GeometryError):
        HalfPlanePoint(0.0, -1.0)
    with pytest.raises(GeometryError):
        to_halfplane(ModelPoint.origin(3))


def test_halfplane_distance_agrees():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        p = HalfPlanePoint(rng.uniform(-3, 3), math.exp(rng.uniform(-2, 2)))
        q = HalfPlanePoint(rng.uniform(-3, 3), math.exp(rng.uniform(-2, 2)))
        assert abs(halfplane_distance(p, q) - distance(to_model(p), to_model(q))) < 1e-9


def test_isometry_invariants():
    rng = np.random.default_rng(0)
    g, h, k = (random_iso(rng) for _ in range(3))
    assert g.defect() < 1e-9
    assert ((g @ h) @ k).close_to(g @ (h @ k))
    assert (g @ g.inverse()).close_to(Isometry.identity())
    with pytest.raises(InvariantViolation):
        Isometry(np.diag([1.0, 2.0, 1.0]))


def test_boundary_direction_normalized():
    xi = BoundaryDirection([2.0, 0.0, 2.0])
    assert xi.coords[0] == 1.0
    assert abs(-xi.coords[0] ** 2 + xi.coords[1] ** 2 + xi.coords[2] ** 2) < 1e-9
    assert BoundaryDirection.from_real(3.0).to_real() == pytest.approx(3.0, rel=1e-14)
    assert BoundaryDirection.from_real(math.inf).exact_real() is None


# -- distance ------------------------------------------------------------------------

def test_distance_examples():
    assert distance(I, I) == 0.0
    assert distance(I, hp(0, 2)) == pytest.approx(math.log(2), abs=1e-12)
    assert distance(I, hp(1, 1)) == pytest.approx(0.962424, abs=1e-6)


def test_distance_against_arc_length_integral():
    # the geodesic from i to 1+i is the circle |z - 1/2| = sqrt(5)/2
    c, R = 0.5, math.sqrt(5) / 2
    a0, a1 = math.atan2(1, -0.5), math.atan2(1, 0.5)
    length, _ = quad(lambda a: R / (R * math.sin(a)), a1, a0, epsabs=1e-13)
    assert distance(I, hp(1, 1)) == pytest.approx(length, abs=1e-9)
    assert distance(I, hp(1, 1)) == pytest.approx(math.acosh(1.5), abs=1e-12)


def test_distance_errors():
    with pytest.raises(DimensionMismatch):
        distance(I, ModelPoint.origin(3))


@settings(max_examples=200, deadline=None)
@given(radii, angles, radii, angles)
def test_distance_symmetric_and_zero_iff_equal(t1, a1, t2, a2):
    x, y = polar(t1, a1), polar(t2, a2)
    assert distance(x, y) == pytest.approx(distance(y, x), abs=1e-12)
    assert distance(x, x) == 0.0


# -- geodesics ----------------------------------------------------------------------

def test_geodesic_between_vertical():
    g = geodesic_between(I, hp(0, 4))
    assert g.backward.to_real() == pytest.approx(0.0, abs=1e-12)
    assert g.forward.exact_real() is None
    z = to_halfplane(point_at(g, math.log(4))).z
    assert abs(z - 4j) < 1e-9
    assert np.allclose(point_at(g, 0).coords, I.coords)
    with pytest.raises(DegenerateGeodesic):
        geodesic_between(I, I)


def test_geodesic_endpoints_by_shooting():
    # circle through i and 1+i orthogonal to R: centre 1/2, radius sqrt(5)/2
    g = geodesic_between(I, hp(1, 1))
    roots = (0.5 - math.sqrt(5) / 2, 0.5 + math.sqrt(5) / 2)
    fwd = to_halfplane(point_at(g, 40.0)).re
    bwd = to_halfplane(point_at(g, -40.0)).re
    assert fwd == pytest.approx(roots[1], abs=1e-6)
    assert bwd == pytest.approx(roots[0], abs=1e-6)
    assert g.forward.to_real() == pytest.approx(roots[1], abs=1e-9)
    assert g.backward.to_real() == pytest.approx(roots[0], abs=1e-9)


def test_rays_vertical():
    up = ray_to_boundary(I, BoundaryDirection.from_real(math.inf))
    down = ray_to_boundary(I, BoundaryDirection.from_real(0.0))
    for t in (0.5, 1.0, 3.0):
        assert abs(to_halfplane(point_at(up, t)).z - 1j * math.exp(t)) < 1e-9 * math.exp(t)
        assert abs(to_halfplane(point_at(down, t)).z - 1j * math.exp(-t)) < 1e-9
    assert abs(to_halfplane(point_at(up, 1.0)).z - math.e * 1j) < 1e-12


def test_asymptotic_rays():
    # up to an isometry the common endpoint is infinity; rays from a + ib are
    # vertical, and the ray from a different anchor catches up after the
    # Busemann shift log(b / b')
    rng = np.random.default_rng(5)
    up = BoundaryDirection.from_real(math.inf)
    for _ in range(20):
        (a, a2), (b, b2) = rng.uniform(-3, 3, 2), np.exp(rng.uniform(-1, 1, 2))
        g, g2 = ray_to_boundary(hp(a, b), up), ray_to_boundary(hp(a2, b2), up)
        for t in (0.5, 2.0, 6.0):
            assert abs(to_halfplane(point_at(g, t)).z - complex(a, b * math.exp(t))) < 1e-9 * math.exp(t)
            assert abs(to_halfplane(point_at(g2, t)).z - complex(a2, b2 * math.exp(t))) < 1e-9 * math.exp(t)
        c = math.log(b / b2)
        far = halfplane_distance(HalfPlanePoint(a, b * math.exp(30.0)),
                                 HalfPlanePoint(a2, b2 * math.exp(30.0 + c)))
        assert far < 1e-6
        near = distance(point_at(g, 2.0), point_at(g2, 2.0 + c))
        assert far < near


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 2.0), angles, angles, st.floats(-5, 5), st.floats(-5, 5))
def test_unit_speed(t0, a, b, s, t):
    g = ray_to_boundary(polar(t0, a), BoundaryDirection.from_unit([math.cos(b), math.sin(b)]))
    assert distance(point_at(g, s), point_at(g, t)) == pytest.approx(abs(s - t), abs=1e-9)


def test_point_at_anchor():
    g = ray_to_boundary(hp(2, 3), BoundaryDirection.from_real(-1.0))
    assert distance(point_at(g, 0.0), g.anchor) == 0.0


# -- Gromov products -----------------------------------------------------------------

def test_gromov_product_examples():
    y = hp(0, 2)
    assert gromov_product(I, y, y) == pytest.approx(distance(I, y), abs=1e-12)
    assert gromov_product(I, hp(0, 2), hp(0, 0.5)) == pytest.approx(0.0, abs=1e-12)


def test_four_point_condition():
    rng = np.random.default_rng(11)
    delta = 1.1
    for _ in range(2000):
        o, y, z, w = (polar(rng.uniform(0, 6), rng.uniform(0, 6.3)) for _ in range(4))
        lhs = gromov_product(o, y, z)
        assert lhs >= min(gromov_product(o, y, w), gromov_product(o, z, w)) - delta
        assert -1e-9 <= lhs <= min(distance(o, y), distance(o, z)) + 1e-9


def test_boundary_gromov_product():
    o = ModelPoint.origin(2)
    d = lambda a: BoundaryDirection.from_unit([math.cos(a), math.sin(a)])
    assert gromov_product_boundary(o, d(0.0), d(math.pi)) == pytest.approx(0.0, abs=1e-15)
    gp = gromov_product_boundary(o, d(0.0), d(math.pi / 3))
    assert gp == pytest.approx(math.log(2), abs=1e-12)
    # the t = 20 finite product
    p, q = point_at(ray_to_boundary(o, d(0.0)), 20.0), point_at(ray_to_boundary(o, d(math.pi / 3)), 20.0)
    assert gromov_product(o, p, q) == pytest.approx(math.log(2), abs=1e-6)
    assert gromov_product_boundary(o, d(1.0), d(1.0)) == math.inf


def test_boundary_product_at_other_base_points():
    # the formula is evaluated away from the origin as well
    x = hp(0.3, 2.0)
    xi, eta = BoundaryDirection.from_real(-1.0), BoundaryDirection.from_real(4.0)
    p = point_at(ray_to_boundary(x, xi), 20.0)
    q = point_at(ray_to_boundary(x, eta), 20.0)
    assert gromov_product(x, p, q) == pytest.approx(gromov_product_boundary(x, xi, eta), abs=1e-6)


# -- distance to geodesics -------------------------------------------------------------

def test_dist_to_geodesic_closed_form_and_golden_section():
    axis = ray_to_boundary(I, BoundaryDirection.from_real(math.inf))
    x = hp(1, 1)
    d, t = dist_to_geodesic(x, axis)
    assert d == pytest.approx(math.asinh(1.0), abs=1e-12)
    res = minimize_scalar(lambda s: distance(x, point_at(axis, s)), bracket=(-2, 0, 2),
                          method="golden", tol=1e-12)
    assert d == pytest.approx(res.fun, abs=1e-8)
    assert t == pytest.approx(res.x, abs=1e-5)
    assert dist_to_geodesic(point_at(axis, 2.0), axis)[0] == pytest.approx(0.0, abs=1e-9)


def test_dist_to_geodesic_invariance():
    rng = np.random.default_rng(2)
    for _ in range(200):
        g = random_iso(rng)
        x = polar(rng.uniform(0, 3), rng.uniform(0, 6.3))
        gam = ray_to_boundary(polar(rng.uniform(0, 3), rng.uniform(0, 6.3)),
                              BoundaryDirection.from_unit([math.cos(a := rng.uniform(0, 6.3)), math.sin(a)]))
        assert dist_to_geodesic(apply(g, x), apply(g, gam))[0] == pytest.approx(
            dist_to_geodesic(x, gam)[0], abs=1e-9)


# -- action ----------------------------------------------------------------------------

def test_apply_examples():
    T = Isometry.from_sl2([[1, 1], [0, 1]])
    S = Isometry.from_sl2([[0, -1], [1, 0]])
    assert abs(to_halfplane(apply(T, I)).z - (1 + 1j)) < 1e-12
    assert abs(to_halfplane(apply(S, hp(0, 2))).z - 0.5j) < 1e-12
    assert np.array_equal(apply(Isometry.identity(), I).coords, I.coords)
    # the 2x2 and 3x3 actions correspond
    z = 0.3 + 2.0j
    assert abs(to_halfplane(apply(T @ S, hp(0.3, 2.0))).z - (T @ S).moebius(z)) < 1e-12


def test_apply_detects_drift():
    bad = Isometry.__new__(Isometry)
    object.__setattr__(bad, "matrix", np.diag([1.0, 1.1, 1.0]))
    object.__setattr__(bad, "sl2", None)
    with pytest.raises(InvariantViolation):
        apply(bad, hp(0.5, 3.0))


def test_frame_takes_origin_to_point():
    for x in (hp(0.3, 2.0), hp(-4, 0.1), ModelPoint.polar(2.0, [0.0, 0.6, 0.8])):
        f = frame(x)
        assert distance(apply(f, ModelPoint.origin(x.dim)), x) < 1e-9


# -- shadows ---------------------------------------------------------------------------

def test_in_shadow_examples():
    y = hp(0, 5)
    d = distance(I, y)
    assert in_shadow(I, y, d + 0.1, BoundaryDirection.from_real(0.0))
    assert in_shadow(I, y, 0.0, BoundaryDirection.from_real(math.inf))
    assert shadow_product(I, y, BoundaryDirection.from_real(math.inf)) == pytest.approx(d, abs=1e-9)
    assert not in_shadow(I, y, 0.5 * d, BoundaryDirection.from_real(0.0))
    assert shadow_product(I, y, BoundaryDirection.from_real(0.0)) == pytest.approx(0.0, abs=1e-9)


def test_shadow_product_is_a_limit():
    x, y = hp(0.2, 1.5), hp(1.0, 0.4)
    xi = BoundaryDirection.from_real(-2.0)
    far = point_at(ray_to_boundary(x, xi), 25.0)
    assert gromov_product(x, y, far) == pytest.approx(shadow_product(x, y, xi), abs=1e-6)


# -- scale-free helpers -----------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(radii, radii, angles, angles)
def test_polar_distance_matches_model(t1, t2, a, b):
    s = abs(math.sin((a - b) / 2))
    assert float(polar_distance(t1, t2, s)) == pytest.approx(
        distance(polar(t1, a), polar(t2, b)), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 4), angles, st.floats(0, 4), angles, st.floats(0, 4), angles)
def test_segment_distance_matches_minimization(t0, a0, t1, a1, t2, a2):
    p, q1, q2 = polar(t0, a0), polar(t1, a1), polar(t2, a2)
    D = distance(q1, q2)
    if D < 1e-6:
        return
    g = geodesic_between(q1, q2)
    res = minimize_scalar(lambda s: distance(p, point_at(g, s)), bounds=(0, D),
                          method="bounded", options={"xatol": 1e-10})
    brute = min(res.fun, distance(p, q1), distance(p, q2))
    got = segment_distance_from_sides(distance(p, q1), distance(p, q2), D)
    assert got == pytest.approx(brute, abs=1e-6)
