import math

import numpy as np
import pytest
from scipy.integrate import quad

from stathyp.boundary import HarmonicMeasure, VisualMeasure
from stathyp.estimators import (ECurve, EstimatorError, ExceptionConfig, MonteCarloEstimate,
                                estimate_drift, estimate_E, estimate_E_curve, event_grid,
                                exception_rates, mechanism_check, recurrence_frequency,
                                recurrence_sweep, separation_probability, shadow_decay,
                                shadow_products, thickness_probability, tripod_check)
from stathyp.geom import (BoundaryDirection, HalfPlanePoint, ModelPoint, apply, distance,
                          gromov_product, point_at, ray_to_boundary, to_model)
from stathyp.lattice import ThinOracle
from stathyp.walk import (RngSpec, hyperbolic_pointmass, identity_pointmass,
                          parabolic_pointmass, psl2z_uniform_tts)

I = to_model(HalfPlanePoint(0.0, 1.0))
TTS = psl2z_uniform_tts()


def visual_E(r: float) -> float:
    """E(r) for independent uniform angles: sinh(d/2) = sinh(r) sin(theta/2)."""
    f = lambda th: 2.0 * math.asinh(math.sinh(r) * math.sin(th / 2.0)) / r
    return quad(f, 0.0, math.pi, epsabs=1e-12, limit=200)[0] / math.pi


# -- types ------------------------------------------------------------------------------

def test_monte_carlo_estimate():
    e = MonteCarloEstimate.from_values([1.0, 2.0, 3.0], 0, 1, "h")
    assert e.mean == 2.0 and e.stderr == pytest.approx(1 / math.sqrt(3)) and not e.flagged
    assert MonteCarloEstimate.from_values([], 2, 1, "h").flagged


def test_ecurve_requires_increasing_radii():
    e = MonteCarloEstimate.from_values([1.0, 1.0], 0, 0, "")
    with pytest.raises(ValueError):
        ECurve([(2.0, e), (1.0, e)])


def test_exception_config_validation():
    ok = dict(n=10, R=9, p=0.7, rho=0.2, D=0.5, c=0.1, A_hat=0.1, a=0.05)
    assert ExceptionConfig(**ok).m_max == 40
    for bad in (dict(rho=0.8), dict(a=0.2), dict(D=0.0), dict(c=-1), dict(m_max=5)):
        with pytest.raises(ValueError):
            ExceptionConfig(**{**ok, **bad})


def test_event_grid():
    g = event_grid(2.0, 10.0, 0.1)
    assert g[0] == 2.0 and g[-1] == 10.0 and len(g) == 81


# -- E ----------------------------------------------------------------------------------

def test_atomic_measure_gives_zero():
    curve = estimate_E_curve(hyperbolic_pointmass(1.0), I, [1.0, 5.0, 20.0], 50, RngSpec(0))
    assert np.all(curve.means == 0.0)
    assert estimate_E(hyperbolic_pointmass(1.0), I, 3.0, 10, RngSpec(0)).mean == 0.0


def test_visual_control_matches_quadrature():
    r = 20.0
    exact = visual_E(r)
    assert exact == pytest.approx(2 - 2 * math.log(2) / r, abs=1e-6)
    e = estimate_E(VisualMeasure(), I, r, 4000, RngSpec(42))
    assert abs(e.mean - exact) < 3 * e.stderr


def test_visual_control_fit():
    radii = np.array([5.0, 10.0, 20.0, 40.0])
    curve = estimate_E_curve(VisualMeasure(), I, radii, 4000, RngSpec(1))
    y = 2.0 - curve.means
    c = float(np.sum(y / radii) / np.sum(radii ** -2.0))
    assert abs(c - 2 * math.log(2)) < 0.2 * 2 * math.log(2)


def test_coupled_identity_at_r40():
    curve = estimate_E_curve(TTS, I, [40.0], 1000, RngSpec(3))
    gm = curve.gromov_mean.mean
    assert abs(curve.means[0] - (2.0 - 2.0 * gm / 40.0)) < 1e-3


def test_coupled_monotonicity():
    curve = estimate_E_curve(TTS, I, [10.0, 20.0, 40.0], 500, RngSpec(4))
    assert np.all(np.diff(curve.means) >= -1e-3)


def test_estimate_E_matches_direct_geometry():
    # recompute a few samples with model points and full distance computations
    meas = HarmonicMeasure(TTS)
    from stathyp.boundary import to_global
    from stathyp.walk import SECOND, FORWARD
    x = to_model(HalfPlanePoint(0.3, 1.2))
    rng = RngSpec(8)
    r = 6.0
    u = meas.directions(x, rng, range(20), FORWARD)
    v = meas.directions(x, rng, range(20), SECOND)
    vals = []
    for a, b in zip(u.units, v.units):
        p = point_at(ray_to_boundary(x, to_global(x, a)), r)
        q = point_at(ray_to_boundary(x, to_global(x, b)), r)
        vals.append(distance(p, q) / r)
    e = estimate_E(TTS, x, r, 20, rng)
    assert e.mean == pytest.approx(np.mean(vals), abs=1e-9)


def test_halving_tol_moves_E_less_than_one_stderr():
    a = estimate_E(TTS, I, 20.0, 1000, RngSpec(12), tol=1e-9)
    b = estimate_E(TTS, I, 20.0, 1000, RngSpec(12), tol=5e-10)
    assert abs(a.mean - b.mean) < a.stderr


def test_failure_fraction_raises():
    with pytest.raises(EstimatorError):
        estimate_E(identity_pointmass(), I, 5.0, 20, RngSpec(0), max_steps=50)


def test_worker_count_does_not_change_output():
    a = estimate_E_curve(TTS, I, [5.0, 10.0], 600, RngSpec(9), workers=1)
    b = estimate_E_curve(TTS, I, [5.0, 10.0], 600, RngSpec(9), workers=3)
    assert a.means.tobytes() == b.means.tobytes() and a.stderrs.tobytes() == b.stderrs.tobytes()


# -- drift -------------------------------------------------------------------------------

def test_drift_fixtures():
    assert estimate_drift(identity_pointmass(), I, 10, 5, RngSpec(0)).mean == 0.0
    assert abs(estimate_drift(hyperbolic_pointmass(1.0), I, 50, 5, RngSpec(0)).mean - 1.0) < 1e-9
    for n in (10, 1000):
        got = estimate_drift(parabolic_pointmass(), I, n, 3, RngSpec(0)).mean
        assert got == pytest.approx(math.acosh(1 + n * n / 2) / n, abs=1e-9)
    assert estimate_drift(parabolic_pointmass(), I, 1000, 3, RngSpec(0)).mean < 0.02


def test_drift_matches_path_products():
    from stathyp.walk import sample_path
    rng = RngSpec(2)
    n = 60
    d = [distance(I, sample_path(TTS, n, rng, i).position(n, I)) / n for i in range(40)]
    assert estimate_drift(TTS, I, n, 40, rng).mean == pytest.approx(np.mean(d), abs=1e-9)


def test_drift_positive_for_lattice_walk():
    e = estimate_drift(TTS, I, 500, 300, RngSpec(0))
    assert e.mean > 0.05 and e.stderr < 0.01


# -- recurrence -------------------------------------------------------------------------

def test_recurrence_on_axis():
    freq, lam = recurrence_frequency(hyperbolic_pointmass(1.0), I, 0.5, 20, 5, RngSpec(0))
    assert freq.mean == 1.0 and lam.mean == 1.0


def test_recurrence_small_R():
    x = to_model(HalfPlanePoint(0.7, 0.9))
    freq, lam = recurrence_frequency(TTS, x, 1e-9, 20, 100, RngSpec(0))
    assert freq.mean == 0.0 and lam.mean == 0.0


def test_recurrence_monotone_in_R():
    res = recurrence_sweep(TTS, I, [1.0, 3.0, 9.0], 20, 500, RngSpec(1))
    lams = [lam for _, lam in res]
    for a, b in zip(lams, lams[1:]):
        assert b.mean >= a.mean - 2 * math.hypot(a.stderr, b.stderr)


# -- separation and thickness ------------------------------------------------------------

def test_separation_fixtures():
    assert separation_probability(hyperbolic_pointmass(1.0), I, 1.0, 0.2, 10.0, 20, RngSpec(0)).mean == 0.0
    assert separation_probability(TTS, I, 0.0, 0.2, 10.0, 50, RngSpec(0)).mean == 1.0
    with pytest.raises(ValueError):
        separation_probability(TTS, I, 1.0, 1.5, 10.0, 50, RngSpec(0))


def test_thickness_fixtures():
    assert thickness_probability(TTS, I, ThinOracle.all_thick(), 1.0, 0.2, 20.0, 30, RngSpec(0)).mean == 1.0
    e = thickness_probability(parabolic_pointmass(), I, ThinOracle.modular(2.0), 0.5, 0.2, 20.0,
                              3, RngSpec(0))
    assert e.mean == 0.0


# -- shadows --------------------------------------------------------------------------------

def test_shadow_products_formula():
    o = ModelPoint.origin(2)
    rng = np.random.default_rng(0)
    for _ in range(50):
        d = rng.uniform(0.1, 8)
        a, b = rng.uniform(0, 2 * math.pi, 2)
        y = ModelPoint.polar(d, [math.cos(a), math.sin(a)])
        s = abs(math.sin((a - b) / 2))
        xi_far = ModelPoint.polar(30.0, [math.cos(b), math.sin(b)])
        want = gromov_product(o, y, xi_far)
        assert shadow_products(d, np.array([s]))[0] == pytest.approx(want, abs=1e-8)


def test_shadow_fixtures():
    res = shadow_decay(TTS, I, [2.0, 5.0], 5.0, 10, 50, RngSpec(0))
    assert all(e.mean == 1.0 for _, e in res)
    res = shadow_decay(TTS, I, [0.0], 0.0, 10, 50, RngSpec(0))
    assert res[0][1].mean == 1.0


def test_shadow_decreasing():
    res = shadow_decay(TTS, I, [5.0, 10.0, 20.0], 2.0, 200, 2000, RngSpec(42))
    for (_, a), (_, b) in zip(res, res[1:]):
        assert b.mean <= a.mean + 2 * math.hypot(a.stderr, b.stderr)
    assert res[0][1].mean > res[-1][1].mean


# -- exceptional sets -------------------------------------------------------------------------

def test_exception_fixtures():
    g = hyperbolic_pointmass(1.0)
    cfg = ExceptionConfig(n=10, R=3.0, p=0.7, rho=0.2, D=5.0, c=0.1, A_hat=1.0, a=0.1)
    rates = exception_rates(g, I, cfg, 5, RngSpec(0))
    assert rates["E1"].mean == 0.0 and rates["E2"].mean == 0.0 and rates["E3"].mean == 0.0
    cfg = ExceptionConfig(n=10, R=3.0, p=0.7, rho=0.2, D=100.0, c=0.01, A_hat=0.1, a=0.05)
    assert exception_rates(TTS, I, cfg, 50, RngSpec(0))["E2"].mean == 0.0


# -- thin triangles and mechanism -----------------------------------------------------------

def test_tripod_examples():
    o = ModelPoint.origin(2)
    p = ModelPoint.polar(4.0, [1.0, 0.0])
    q = ModelPoint.polar(6.0, [0.0, 1.0])
    assert tripod_check(o, p, p, 0.1)
    assert tripod_check(o, p, ModelPoint.polar(9.0, [1.0, 0.0]), 0.01)
    assert tripod_check(o, p, q, 1.0)
    # a vanishing C fails for a genuine triangle
    assert not tripod_check(o, ModelPoint.polar(8.0, [1.0, 0.0]), q, 1e-3)
    with pytest.raises(ValueError):
        tripod_check(o, p, q, 0.0)


def test_tripod_random_triangles():
    rng = np.random.default_rng(0)
    pts = lambda: ModelPoint.polar(rng.uniform(0, 6), [math.cos(a := rng.uniform(0, 7)), math.sin(a)])
    for _ in range(300):
        assert tripod_check(pts(), pts(), pts(), 1.0, 0.01)


def test_mechanism_small():
    rep = mechanism_check(TTS, I, 20.0, 0.2, 1.0, ThinOracle.modular(20.0), 0.5, 100, RngSpec(0))
    assert rep.n_pairs == 100 and rep.n_qualifying > 50 and rep.n_violations == 0
    assert rep.min_margin >= 0.0 and rep.bound == pytest.approx(1.2 * 20 - 2)
