"""
Sampled invariant suites for the geometry and lattice layers.

Each check draws its own random instances from a fixed seed and reports the
number of instances, the number of failures and the worst deviation seen.
``scale`` shrinks every sample count proportionally (1.0 gives the full
sizes: 1e5 triples, 1e4 triangles and direction pairs, 1e3 excursion
instances).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import BOUNDARY_TOL, GEOM_TOL, THIN_TRIANGLE_C
from .estimators import tripod_check
from .geom import (BoundaryDirection, HalfPlanePoint, Isometry, ModelPoint, apply,
                   distance, gromov_product_boundary, point_at, ray_to_boundary,
                   geodesic_between, to_model)
from .lattice import (ThinOracle, ball_excursions, reduce_modular, word_matrix)


@dataclass(frozen=True)
class CheckResult:
    name: str
    n_checked: int
    n_failed: int
    worst: float

    @property
    def passed(self) -> bool:
        return self.n_failed == 0


def _n(full: int, scale: float) -> int:
    return max(10, int(round(full * scale)))


def _points(rng, k: int, n: int = 2, rmax: float = 6.0) -> np.ndarray:
    """k hyperboloid points at uniform radius <= rmax in uniform directions."""
    t = rng.uniform(0.0, rmax, k)
    u = rng.standard_normal((k, n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    return np.concatenate((np.cosh(t)[:, None], np.sinh(t)[:, None] * u), axis=1)


def _dist(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    m = X[:, 0] * Y[:, 0] - np.sum(X[:, 1:] * Y[:, 1:], axis=1)
    diff = X - Y
    q = np.maximum(-diff[:, 0] ** 2 + np.sum(diff[:, 1:] ** 2, axis=1), 0.0)
    return np.where(m > 2.0, np.arccosh(np.maximum(m, 1.0)), 2.0 * np.arcsinh(np.sqrt(q) / 2.0))


def _random_sl2(rng) -> np.ndarray:
    """Moderate random element of SL(2, R): rotation * boost * rotation."""
    a, b = rng.uniform(0, 2 * math.pi, 2)
    ell = rng.uniform(0.0, 3.0)
    rot = lambda t: np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    return rot(a) @ np.diag([math.exp(ell / 2), math.exp(-ell / 2)]) @ rot(b)


# -- geom ------------------------------------------------------------------------

def check_metric(rng, k: int) -> list:
    res = []
    for n in (2, 3):
        X, Y, Z = (_points(rng, k, n) for _ in range(3))
        dxy, dyx, dyz, dxz = _dist(X, Y), _dist(Y, X), _dist(Y, Z), _dist(X, Z)
        sym = np.abs(dxy - dyx)
        slack = dxy + dyz - dxz
        res.append(CheckResult(f"symmetry (H^{n})", k, int(np.sum(sym > GEOM_TOL)), float(sym.max())))
        res.append(CheckResult(f"triangle inequality (H^{n})", k, int(np.sum(slack < -GEOM_TOL)),
                               max(0.0, float(-slack.min()))))
    return res


def check_isometry_invariance(rng, k: int) -> CheckResult:
    worst, bad = 0.0, 0
    for _ in range(k):
        g = Isometry.from_sl2(_random_sl2(rng))
        x, y = (ModelPoint(p) for p in _points(rng, 2, 2, 4.0))
        e = abs(distance(apply(g, x), apply(g, y)) - distance(x, y))
        worst = max(worst, e)
        bad += e > GEOM_TOL
    return CheckResult("isometry invariance", k, bad, worst)


def check_thin_triangles(rng, k: int, C: float = THIN_TRIANGLE_C) -> CheckResult:
    bad = 0
    for _ in range(k):
        x, x1, x2 = (ModelPoint(p) for p in _points(rng, 3, 2, 5.0))
        bad += not tripod_check(x, x1, x2, C, 0.01)
    return CheckResult("thin triangles (C = 1)", k, bad, 0.0)


def _pair_dirs(rng, k: int, min_angle: float):
    o = ModelPoint.origin(2)
    phi = rng.uniform(0, 2 * math.pi, k)
    dphi = rng.uniform(min_angle, 2 * math.pi - min_angle, k)
    for a, b in zip(phi, phi + dphi):
        yield o, (BoundaryDirection.from_unit([math.cos(a), math.sin(a)]),
                  BoundaryDirection.from_unit([math.cos(b), math.sin(b)]))


def check_boundary_product(rng, k: int, t: float = 20.0) -> CheckResult:
    """Boundary Gromov product vs the finite product of the t-points (angles > 0.01)."""
    worst, bad = 0.0, 0
    for o, (xi, eta) in _pair_dirs(rng, k, 0.01):
        p, q = point_at(ray_to_boundary(o, xi), t), point_at(ray_to_boundary(o, eta), t)
        fin = 0.5 * (2 * t - distance(p, q))
        e = abs(fin - gromov_product_boundary(o, xi, eta))
        worst = max(worst, e)
        bad += e > BOUNDARY_TOL
    return CheckResult("boundary Gromov product limit", k, bad, worst)


def check_sphere_gap(rng, k: int, t: float = 20.0) -> CheckResult:
    """d(gamma_xi(t), gamma_eta(t)) - (2t - 2 (xi, eta)_o) at t = 20 (angles > 0.1)."""
    worst, bad = 0.0, 0
    for o, (xi, eta) in _pair_dirs(rng, k, 0.1):
        p, q = point_at(ray_to_boundary(o, xi), t), point_at(ray_to_boundary(o, eta), t)
        e = abs(distance(p, q) - (2 * t - 2 * gromov_product_boundary(o, xi, eta)))
        worst = max(worst, e)
        bad += e > 1e-4
    return CheckResult("sphere distance asymptotics", k, bad, worst)


# -- lattice ------------------------------------------------------------------------

def _random_z(rng) -> HalfPlanePoint:
    return HalfPlanePoint(rng.uniform(-5, 5), math.exp(rng.uniform(-4, 3)))


def _random_word(rng, length: int) -> np.ndarray:
    m = np.eye(2, dtype=object)
    for _ in range(length):
        g = [np.array([[1, 1], [0, 1]], dtype=object), np.array([[1, -1], [0, 1]], dtype=object),
             np.array([[0, -1], [1, 0]], dtype=object)][rng.integers(3)]
        m = m.dot(g)
    return m


def _moebius(m, z: complex) -> complex:
    a, b, c, d = (float(v) for v in m.ravel())
    return (a * z + b) / (c * z + d)


def check_reduction(rng, k: int) -> list:
    idem = dom = exact = 0
    worst = 0.0
    for _ in range(k):
        z = _random_z(rng)
        w, word = reduce_modular(z)
        w2, word2 = reduce_modular(w)
        idem += (w2 != w) or word2 != ""
        dom += not (-0.5 <= w.re < 0.5 and w.re * w.re + w.im * w.im >= 1.0
                    and not (w.re * w.re + w.im * w.im == 1.0 and w.re > 0))
        e = abs(_moebius(word_matrix(word), z.z) - w.z)
        worst = max(worst, e)
        exact += e > 1e-9 * max(1.0, abs(w.z))
    return [CheckResult("reduction idempotent", k, idem, 0.0),
            CheckResult("reduction lands in the fundamental domain", k, dom, 0.0),
            CheckResult("reduction word reproduces the output", k, exact, worst)]


def check_thickness_invariance(rng, k: int) -> CheckResult:
    bad = 0
    worst = 0.0
    for _ in range(k):
        z = _random_z(rng)
        g = _random_word(rng, int(rng.integers(1, 11)))
        gz = _moebius(g, z.z)
        if not gz.imag > 1e-300:
            continue
        h = float(rng.uniform(1.0, 4.0))
        o = ThinOracle.modular(h)
        t1, y1 = o.query(to_model(z))
        t2, y2 = o.query(to_model(HalfPlanePoint(gz.real, gz.imag)))
        e = abs(y1 - y2) / y1
        worst = max(worst, e)
        # heights agree to rounding; a flip needs a height within rounding of h
        bad += (t1 != t2 and abs(y1 - h) > 1e-9 * h) or e > 1e-9
    return CheckResult("thickness invariant under the modular group", k, bad, worst)


def check_excursions(rng, k: int) -> list:
    mono = ineq = 0
    for _ in range(k):
        R = float(rng.uniform(0.5, 6.0))
        d = float(rng.uniform(0.5, 6.0))
        c1 = ModelPoint.origin(2)
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        c2 = ModelPoint.polar(2 * d, u)
        p1 = ModelPoint.polar(float(rng.uniform(0, R / 3)), _unit(rng))
        q = ModelPoint.polar(float(rng.uniform(0, R / 3)), _unit(rng))
        # q is placed around c2 by moving the origin there along u
        p2 = apply(_boost_to(u, 2 * d), q)
        if distance(p1, p2) == 0.0:
            continue
        seg = (geodesic_between(p1, p2), 0.0, distance(p1, p2))
        L = [ball_excursions(seg, c1, c2, rho).total_length for rho in (0.1, 1.0, 10.0)]
        mono += not (L[0] >= L[1] >= L[2]) or L[0] > seg[2] + 1e-12
        full = ball_excursions(seg, c1, c2, R).total_length
        ineq += not (full <= seg[2] + 1e-12 and seg[2] <= 2 * R + 2 * d + 1e-9)
    return [CheckResult("excursion length monotone in the radius", k, mono, 0.0),
            CheckResult("segment length <= 2R + 2d", k, ineq, 0.0)]


def _unit(rng) -> np.ndarray:
    u = rng.standard_normal(2)
    return u / np.linalg.norm(u)


def _boost_to(u: np.ndarray, t: float) -> Isometry:
    """Isometry taking the origin to the point at distance t in direction u."""
    ch, sh = math.cosh(t), math.sinh(t)
    m = np.eye(3)
    m[0, 0] = ch
    m[0, 1:] = sh * u
    m[1:, 0] = sh * u
    m[1:, 1:] = np.eye(2) + (ch - 1.0) * np.outer(u, u)
    return Isometry(m)


# -- suites -------------------------------------------------------------------------

def geom_suite(scale: float = 1.0, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    return (check_metric(rng, _n(100_000, scale))
            + [check_isometry_invariance(rng, _n(10_000, scale)),
               check_thin_triangles(rng, _n(10_000, scale)),
               check_boundary_product(rng, _n(10_000, scale)),
               check_sphere_gap(rng, _n(10_000, scale))])


def lattice_suite(scale: float = 1.0, seed: int = 1) -> list:
    rng = np.random.default_rng(seed)
    return (check_reduction(rng, _n(10_000, scale))
            + [check_thickness_invariance(rng, _n(10_000, scale))]
            + check_excursions(rng, _n(1_000, scale)))


def run_all(scale: float = 1.0) -> list:
    return geom_suite(scale) + lattice_suite(scale)
