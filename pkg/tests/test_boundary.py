import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import ks_2samp, kstest

from stathyp.boundary import (DegenerateTracking, HarmonicMeasure, NonConvergenceError,
                              VisualMeasure, forward_limit, sample_harmonic, sphere_point,
                              to_frame, to_global, track_frames, tracked_geodesic)
from stathyp.geom import (BoundaryDirection, HalfPlanePoint, Isometry, ModelPoint, apply,
                          dist_to_geodesic, distance, gromov_product_boundary, point_at,
                          to_halfplane, to_model)
from stathyp.walk import (BiInfinitePath, GroupDistribution, RngSpec, hyperbolic_pointmass,
                          identity_pointmass, parabolic_pointmass, psl2z_uniform_tts, sample_bi_infinite,
                          sample_path)

I = to_model(HalfPlanePoint(0.0, 1.0))
INF = BoundaryDirection.from_real(math.inf)


def angle(xi: BoundaryDirection) -> float:
    u = xi.unit
    return math.atan2(u[1], u[0])


def gap(a: BoundaryDirection, b: BoundaryDirection) -> float:
    return float(np.linalg.norm(a.unit - b.unit))


# -- forward limits ----------------------------------------------------------------

def test_hyperbolic_attracting_point():
    p = sample_path(hyperbolic_pointmass(1.0), 0, RngSpec(0), 0)
    assert gap(forward_limit(p, I), INF) < 1e-9
    p = sample_path(hyperbolic_pointmass(-1.0), 0, RngSpec(0), 0)
    assert gap(forward_limit(p, I), BoundaryDirection.from_real(0.0)) < 1e-9
    s = sample_harmonic(hyperbolic_pointmass(1.0), I, RngSpec(0), 0)
    assert s.steps_used < 40 and s.achieved_tol <= 1e-9


def test_forward_limit_extends_path():
    p = sample_path(psl2z_uniform_tts(), 5, RngSpec(1), 0)
    forward_limit(p, I)
    assert p.n > 5


def test_identity_does_not_converge():
    p = sample_path(identity_pointmass(), 0, RngSpec(0), 0)
    with pytest.raises(NonConvergenceError) as err:
        forward_limit(p, I, max_steps=500)
    assert err.value.steps == 500 and err.value.diameter > 0.1


def test_parabolic_goes_to_infinity():
    # T^n i = n + i; the ball-model error decays like 1/n, so the stopping rule
    # with tol = 1e-9 halts at its own precision floor near 1e-4 from infinity
    p = sample_path(parabolic_pointmass(), 0, RngSpec(0), 0)
    xi = forward_limit(p, I, tol=1e-9, max_steps=100_000)
    assert gap(xi, INF) < 1e-4


def test_sample_harmonic_is_deterministic():
    mu = psl2z_uniform_tts()
    a = sample_harmonic(mu, I, RngSpec(5), 12)
    b = sample_harmonic(mu, I, RngSpec(5), 12)
    c = sample_harmonic(mu, I, RngSpec(5), 13)
    assert np.array_equal(a.direction.coords, b.direction.coords)
    assert gap(a.direction, c.direction) > 0
    assert a.achieved_tol <= 1e-9


def test_batch_matches_single():
    mu = psl2z_uniform_tts()
    batch = HarmonicMeasure(mu).directions(I, RngSpec(7), range(20))
    for i in range(20):
        single = sample_harmonic(mu, I, RngSpec(7), i)
        assert gap(to_global(I, batch.units[i]), single.direction) == 0.0
        assert batch.steps[i] == single.steps_used


def test_harmonic_is_non_atomic():
    d = HarmonicMeasure(psl2z_uniform_tts(), tol=1e-9).directions(I, RngSpec(11), range(10_000))
    assert d.ok.all()
    keys = Counter(map(tuple, np.round(d.units, 6)))
    assert max(keys.values()) / 10_000 < 0.01


def test_frame_conversions_roundtrip():
    x = to_model(HalfPlanePoint(0.4, 2.5))
    u = np.array([0.6, -0.8])
    assert np.allclose(to_frame(x, to_global(x, u)), u, atol=1e-12)


def test_visual_measure_uniform():
    d = VisualMeasure().directions(I, RngSpec(3), range(5000))
    phi = np.arctan2(d.units[:, 1], d.units[:, 0])
    assert kstest(phi, "uniform", args=(-math.pi, 2 * math.pi)).pvalue > 0.001


# -- equivariance --------------------------------------------------------------------

def test_equivariance_deterministic():
    g = Isometry.from_sl2([[2.0, 1.0], [1.0, 1.0]])
    x = to_model(HalfPlanePoint(0.3, 0.7))
    mu = hyperbolic_pointmass(0.8)
    xi = sample_harmonic(mu, x, RngSpec(0), 0).direction
    eta = sample_harmonic(mu.conjugate(g), apply(g, x), RngSpec(0), 0).direction
    assert gap(apply(g, xi), eta) < 1e-8


def test_equivariance_same_substream():
    g = Isometry.from_sl2([[1.0, 2.0], [0.0, 1.0]]) @ Isometry.rotation(0.4)
    mu = psl2z_uniform_tts()
    for i in range(20):
        xi = sample_harmonic(mu, I, RngSpec(2), i).direction
        eta = sample_harmonic(mu.conjugate(g), apply(g, I), RngSpec(2), i).direction
        assert gap(apply(g, xi), eta) < 1e-6


def test_equivariance_in_distribution():
    g = Isometry.from_sl2([[1.0, 0.5], [0.0, 1.0]]) @ Isometry.hyperbolic(0.7)
    mu = psl2z_uniform_tts()
    n = 2000
    xs = HarmonicMeasure(mu).directions(I, RngSpec(21), range(n))
    moved = [angle(apply(g, to_global(I, u))) for u in xs.units]
    gx = apply(g, I)
    ys = HarmonicMeasure(mu.conjugate(g)).directions(gx, RngSpec(22), range(n))
    direct = [angle(to_global(gx, u)) for u in ys.units]
    assert ks_2samp(moved, direct).pvalue > 0.001


# -- spheres --------------------------------------------------------------------------

def test_sphere_point_example():
    sp = sphere_point(I, INF, 1.0)
    h = to_halfplane(sp.point)
    assert abs(h.re) < 1e-12 and h.im == pytest.approx(math.e, abs=1e-12)
    with pytest.raises(ValueError):
        sphere_point(I, INF, 0.0)
    with pytest.raises(ValueError):
        sphere_point(I, INF, -1.0)


def test_sphere_point_contract_and_consistency():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = to_model(HalfPlanePoint(rng.uniform(-2, 2), math.exp(rng.uniform(-1, 1))))
        xi = to_global(x, (math.cos(a := rng.uniform(0, 2 * math.pi)), math.sin(a)))
        r = rng.uniform(0.1, 8)
        s = rng.uniform(0.0, r)
        pr, ps = sphere_point(x, xi, r).point, sphere_point(x, xi, max(s, 1e-12)).point
        assert abs(distance(x, pr) - r) < 1e-9
        assert abs(distance(x, ps) + distance(ps, pr) - distance(x, pr)) < 1e-9


def test_sphere_gap_asymptotics():
    o = ModelPoint.origin(2)
    theta = math.pi / 2
    xi = BoundaryDirection.from_unit([1.0, 0.0])
    eta = BoundaryDirection.from_unit([math.cos(theta), math.sin(theta)])
    r = 25.0
    d = distance(sphere_point(o, xi, r).point, sphere_point(o, eta, r).point)
    assert gromov_product_boundary(o, xi, eta) == pytest.approx(-math.log(math.sin(theta / 2)))
    assert abs(d - (2 * r - 2 * (-math.log(math.sin(theta / 2))))) < 1e-4


# -- tracked geodesics ------------------------------------------------------------------

def test_tracked_geodesic_hyperbolic_axis():
    bp = sample_bi_infinite(hyperbolic_pointmass(1.0), 1, RngSpec(0), 0)
    x = to_model(HalfPlanePoint(0.5, 2.0))
    gamma = tracked_geodesic(bp, x)
    assert gap(gamma.forward, INF) < 1e-9
    assert gap(gamma.backward, BoundaryDirection.from_real(0.0)) < 1e-9
    d, _ = dist_to_geodesic(x, gamma)
    assert abs(d - distance(x, gamma(0.0))) < 1e-9


def test_tracked_geodesic_anchor_contract():
    mu = psl2z_uniform_tts()
    x = to_model(HalfPlanePoint(0.2, 1.3))
    for i in range(30):
        gamma = tracked_geodesic(sample_bi_infinite(mu, 1, RngSpec(4), i), x)
        d, _ = dist_to_geodesic(x, gamma)
        assert abs(d - distance(x, gamma(0.0))) < 1e-9


def test_tracked_geodesic_degenerate():
    # both halves pushed toward the same endpoint
    fwd = sample_path(hyperbolic_pointmass(1.0), 1, RngSpec(0), 0)
    bwd = sample_path(hyperbolic_pointmass(1.0), 1, RngSpec(0), 0, lane=1)
    with pytest.raises(DegenerateTracking):
        tracked_geodesic(BiInfinitePath(fwd, bwd, 1), I)


def test_tracked_geodesic_propagates_nonconvergence():
    mu = GroupDistribution.from_pairs([("r", Isometry.rotation(math.pi), 1.0)])
    with pytest.raises(NonConvergenceError):
        tracked_geodesic(sample_bi_infinite(mu, 1, RngSpec(0), 0), I, max_steps=200)


def test_tracked_geodesic_nondegenerate_500():
    mu = psl2z_uniform_tts()
    tr = track_frames(mu, I, RngSpec(8), range(500), 0)
    assert tr.ok.all()
    gaps = np.linalg.norm(tr.fwd[:, 0] - tr.bwd[:, 0], axis=1)
    assert gaps.min() > 1e-9


def test_track_frames_matches_tracked_geodesic():
    mu = psl2z_uniform_tts()
    K = 30
    tr = track_frames(mu, I, RngSpec(6), range(5), K)
    for b in range(5):
        bp = sample_bi_infinite(mu, K, RngSpec(6), b)
        gamma = tracked_geodesic(bp, I)
        for k in (0, 7, K):
            xk = bp.position(k, I)
            want, _ = dist_to_geodesic(xk, gamma)
            assert abs(tr.geodesic_distance()[b, k] - want) < 1e-6
            assert abs(tr.dist[b, k] - distance(I, xk)) < 1e-9
