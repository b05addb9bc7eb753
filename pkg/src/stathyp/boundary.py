"""
Boundary limits of random walks, harmonic measure, sphere measures and
tracked geodesics.

All heavy lifting goes through a batched kernel that advances many walks in
lockstep with numpy.  The kernel works in the frame of the base point x (the
walk is conjugated so that x becomes the origin), which keeps the ball-model
stopping rule centred at x and makes every returned direction a unit vector
seen from x.  Only elementwise +, -, *, / and sqrt are used on per-sample
data, so a sample's result does not depend on which batch it was computed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .constants import HARMONIC_MAX_STEPS, HARMONIC_TOL, RNG_BLOCK
from .geom import (BoundaryDirection, DegenerateGeodesic, Geodesic, Isometry,
                   ModelPoint, apply, frame, point_at, ray_to_boundary)
from .walk import (BACKWARD, FORWARD, BiInfinitePath, GroupDistribution,
                   IncrementStream, RngSpec, SamplePath, reflect)


class NonConvergenceError(RuntimeError):
    """A walk did not reach the boundary within ``max_steps``."""

    def __init__(self, msg, steps=None, diameter=None, index=None):
        super().__init__(msg)
        self.steps = steps
        self.diameter = diameter
        self.index = index


class DegenerateTracking(DegenerateGeodesic):
    """Forward and backward limits coincide."""


# -- kernel ----------------------------------------------------------------

def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched a @ b written as elementwise ops (fixed summation order)."""
    out = a[:, :, 0, None] * b[:, None, 0, :]
    for j in range(1, a.shape[2]):
        out = out + a[:, :, j, None] * b[:, None, j, :]
    return out


def _matvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = a[:, :, 0] * v[:, None, 0]
    for j in range(1, a.shape[2]):
        out = out + a[:, :, j] * v[:, None, j]
    return out


def _ball(y: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Ball-model coordinates of hyperboloid vectors stored as y * 2**-e."""
    return y[..., 1:] / (scale[..., None] + y[..., :1])


def _normalize_null(v: np.ndarray) -> np.ndarray:
    """Rescale null vectors to v0 = 1 and project the spatial part to the sphere."""
    u = v[:, 1:] / v[:, :1]
    nrm = np.sqrt(np.sum(u * u, axis=1))
    return u / nrm[:, None]


def _test_points(n: int) -> np.ndarray:
    """Origin plus the two points at distance 1 along +-e_1."""
    p = np.zeros((3, n + 1))
    p[:, 0] = [1.0, math.cosh(1.0), math.cosh(1.0)]
    p[1, 1] = math.sinh(1.0)
    p[2, 1] = -math.sinh(1.0)
    return p


@dataclass
class LimitBatch:
    """Kernel output.  ``units`` are directions seen from the base point."""

    units: np.ndarray
    steps: np.ndarray
    diameter: np.ndarray
    ok: np.ndarray


def converge(mats: np.ndarray, streams: Sequence[IncrementStream], tol: float,
             max_steps: int) -> LimitBatch:
    """
    Run the walks w_k = g_1 ... g_k (atoms ``mats``, already in the base
    frame) until the images of the test triple have ball-model diameter
    < tol.  Streams are consumed from their current position.
    """
    nb = len(streams)
    d = mats.shape[1]
    pts = _test_points(d - 1)
    units = np.full((nb, d - 1), np.nan)
    steps = np.zeros(nb, dtype=np.int64)
    diam = np.full(nb, np.inf)
    ok = np.zeros(nb, dtype=bool)
    if nb == 0:
        return LimitBatch(units, steps, diam, ok)

    active = np.arange(nb)
    m = np.broadcast_to(np.eye(d), (nb, d, d)).copy()
    scale = np.ones(nb)  # 2**-e, the factor the stored matrices carry
    buf = np.empty((nb, RNG_BLOCK), dtype=np.intp)
    pos = RNG_BLOCK
    for k in range(1, max_steps + 1):
        if pos == RNG_BLOCK:
            for r, s in enumerate(active):
                buf[r] = streams[s].take(RNG_BLOCK)
            pos = 0
        m = _matmul(m, mats[buf[:len(active), pos]])
        pos += 1
        big = np.max(np.abs(m), axis=(1, 2)) > 2.0 ** 200
        if big.any():
            m[big] *= 2.0 ** -200
            scale[big] *= 2.0 ** -200
        imgs = np.stack([_ball(_matvec(m, np.broadcast_to(p, (len(active), d))), scale)
                         for p in pts], axis=1)
        dd = np.maximum.reduce([
            np.sum((imgs[:, 0] - imgs[:, 1]) ** 2, axis=1),
            np.sum((imgs[:, 0] - imgs[:, 2]) ** 2, axis=1),
            np.sum((imgs[:, 1] - imgs[:, 2]) ** 2, axis=1)])
        dia = np.sqrt(dd)
        done = dia < tol
        if done.any() or k == max_steps:
            idx = active[done]
            w = imgs[done, 0]
            units[idx] = w / np.sqrt(np.sum(w * w, axis=1))[:, None]
            steps[idx] = k
            diam[idx] = dia[done]
            ok[idx] = True
            if k == max_steps:
                rest = active[~done]
                steps[rest] = k
                diam[rest] = dia[~done]
                break
            keep = ~done
            active = active[keep]
            if len(active) == 0:
                break
            m, scale = m[keep], scale[keep]
            buf = buf[keep]
    return LimitBatch(units, steps, diam, ok)


def _frame_mats(mu: GroupDistribution, x: ModelPoint) -> tuple[np.ndarray, Isometry]:
    f = frame(x)
    fi = f.inverse()
    return np.stack([(fi @ a.g @ f).matrix for a in mu.atoms]), f


# -- measures on the boundary ----------------------------------------------

@dataclass(frozen=True)
class HarmonicMeasure:
    """Hitting measure of the mu-walk, sampled by the stopping rule."""

    mu: GroupDistribution
    tol: float = HARMONIC_TOL
    max_steps: int = HARMONIC_MAX_STEPS

    def directions(self, x: ModelPoint, rng: RngSpec, indices, lane: int = FORWARD) -> LimitBatch:
        mats, _ = _frame_mats(self.mu, x)
        streams = [rng.increments(self.mu, i, lane) for i in indices]
        return converge(mats, streams, self.tol, self.max_steps)

    def describe(self) -> dict:
        return {"kind": "harmonic", "mu": self.mu.to_json(), "tol": self.tol,
                "max_steps": self.max_steps}


@dataclass(frozen=True)
class VisualMeasure:
    """Uniform (Lebesgue) measure on the sphere of directions at the base point."""

    n: int = 2

    def directions(self, x: ModelPoint, rng: RngSpec, indices, lane: int = FORWARD) -> LimitBatch:
        units = np.empty((len(indices), self.n))
        for r, i in enumerate(indices):
            g = rng.generator(i, lane)
            if self.n == 2:
                phi = 2.0 * math.pi * g.random()
                units[r] = (math.cos(phi), math.sin(phi))
            else:
                v = g.standard_normal(self.n)
                units[r] = v / np.linalg.norm(v)
        nb = len(indices)
        return LimitBatch(units, np.zeros(nb, dtype=np.int64), np.zeros(nb), np.ones(nb, dtype=bool))

    def describe(self) -> dict:
        return {"kind": "visual", "n": self.n}


BoundaryMeasure = Union[HarmonicMeasure, VisualMeasure]


def as_measure(m) -> BoundaryMeasure:
    if isinstance(m, GroupDistribution):
        return HarmonicMeasure(m)
    return m


def to_global(x: ModelPoint, unit) -> BoundaryDirection:
    """Boundary direction seen from x (unit vector in x's frame) in model coordinates."""
    return apply(frame(x), BoundaryDirection.from_unit(unit))


def to_frame(x: ModelPoint, xi: BoundaryDirection) -> np.ndarray:
    """Unit vector at x pointing to xi (inverse of :func:`to_global`)."""
    return apply(frame(x).inverse(), xi).unit


# -- single-path operations ---------------------------------------------------

@dataclass(frozen=True)
class HarmonicSample:
    direction: BoundaryDirection
    steps_used: int
    achieved_tol: float
    index: int


def forward_limit(path: SamplePath, x: ModelPoint, tol: float = HARMONIC_TOL,
                  max_steps: int = HARMONIC_MAX_STEPS) -> BoundaryDirection:
    """
    Limit direction of w_n x for the walk behind ``path`` (same substream,
    read from the start).  The path is extended to the steps used.
    """
    mats, f = _frame_mats(path.distribution, x)
    rng = RngSpec(path.seed)
    res = converge(mats, [rng.increments(path.distribution, path.index, path.lane)],
                   tol, max_steps)
    if not res.ok[0]:
        raise NonConvergenceError(
            f"walk did not converge within {max_steps} steps "
            f"(test-triple diameter {res.diameter[0]:.3g})",
            steps=int(res.steps[0]), diameter=float(res.diameter[0]), index=path.index)
    if path.n < res.steps[0]:
        path.extend(int(res.steps[0]) - path.n)
    return apply(f, BoundaryDirection.from_unit(res.units[0]))


def sample_harmonic(mu: GroupDistribution, x: ModelPoint, rng: RngSpec, index: int,
                    tol: float = HARMONIC_TOL, max_steps: int = HARMONIC_MAX_STEPS,
                    lane: int = FORWARD) -> HarmonicSample:
    res = HarmonicMeasure(mu, tol, max_steps).directions(x, rng, [index], lane)
    if not res.ok[0]:
        raise NonConvergenceError(
            f"sample {index} did not converge within {max_steps} steps",
            steps=int(res.steps[0]), diameter=float(res.diameter[0]), index=index)
    return HarmonicSample(to_global(x, res.units[0]), int(res.steps[0]),
                          float(res.diameter[0]), index)


@dataclass(frozen=True)
class SpherePoint:
    point: ModelPoint
    origin_direction: BoundaryDirection
    radius: float


def sphere_point(x: ModelPoint, xi: BoundaryDirection, r: float) -> SpherePoint:
    """The point of S_r(x) on the ray from x toward xi."""
    if not r > 0:
        raise ValueError("radius must be positive")
    return SpherePoint(point_at(ray_to_boundary(x, xi), r), xi, r)


def tracked_geodesic(path: BiInfinitePath, x: ModelPoint, tol: float = HARMONIC_TOL,
                     max_steps: int = HARMONIC_MAX_STEPS) -> Geodesic:
    """Geodesic from lambda^- to lambda^+, anchored at its closest point to x."""
    lam_plus = forward_limit(path.forward, x, tol, max_steps)
    lam_minus = forward_limit(path.backward, x, tol, max_steps)
    gap = np.linalg.norm(lam_plus.unit - lam_minus.unit)
    if gap < tol:
        raise DegenerateTracking(f"lambda+ and lambda- coincide (gap {gap:.3g})")
    return Geodesic.from_endpoints(lam_minus, lam_plus, near=x)


# -- tracked geodesics seen from every point of a path ----------------------------

@dataclass
class FrameTrack:
    """
    For paths b and frames k = 0..K: ``fwd[b, k]`` and ``bwd[b, k]`` are the
    directions of w_k^-1 lambda^+ and w_k^-1 lambda^- seen from the base point
    (so the tracked geodesic as seen from x_k), ``dist[b, k]`` = d(x, x_k),
    ``steps[b, i]`` = d(x, g_{i+1} x).
    """

    fwd: np.ndarray
    bwd: np.ndarray
    dist: np.ndarray
    steps: np.ndarray
    ok: np.ndarray

    def geodesic_distance(self) -> np.ndarray:
        """d(x_k, gamma_omega), from cosh d = 2 / |u - v| at the origin."""
        gap = np.sqrt(np.sum((self.fwd - self.bwd) ** 2, axis=2))
        with np.errstate(divide="ignore"):
            return np.arccosh(np.maximum(2.0 / gap, 1.0))

    def recurrent(self, R: float) -> np.ndarray:
        """Indicator of d(x_k, gamma_omega) < R / 3."""
        gap = np.sqrt(np.sum((self.fwd - self.bwd) ** 2, axis=2))
        return gap > 2.0 / math.cosh(R / 3.0)


def _apply_null(mats: np.ndarray, units: np.ndarray) -> np.ndarray:
    v = np.concatenate((np.ones((len(units), 1)), units), axis=1)
    return _normalize_null(_matvec(mats, v))


def track_frames(mu: GroupDistribution, x: ModelPoint, rng: RngSpec, indices,
                 n_frames: int, tol: float = HARMONIC_TOL,
                 max_steps: int = HARMONIC_MAX_STEPS) -> FrameTrack:
    """
    Tracked geodesic of each bi-infinite path, seen from x_0, ..., x_K.

    lambda^+ in frame K comes from the walk g_{K+1} g_{K+2} ...; earlier frames
    follow from xi_k = g_{k+1} xi_{k+1}, which contracts errors.  lambda^- in
    frame 0 comes from the backward walk; later frames follow from
    eta_k = g_k^-1 eta_{k-1}, which also contracts.
    """
    mats, _ = _frame_mats(mu, x)
    inv = np.stack([Isometry(m).inverse().matrix for m in mats])
    mu_hat = reflect(mu)
    nb, K = len(indices), n_frames
    d = mats.shape[1]

    fstreams = [rng.increments(mu, i, FORWARD) for i in indices]
    incs = np.stack([s.take(K) for s in fstreams]) if K else np.empty((nb, 0), dtype=np.intp)
    tail = converge(mats, fstreams, tol, max_steps)
    head = converge(_frame_mats(mu_hat, x)[0],
                    [rng.increments(mu_hat, i, BACKWARD) for i in indices], tol, max_steps)
    ok = tail.ok & head.ok

    fwd = np.empty((nb, K + 1, d - 1))
    bwd = np.empty((nb, K + 1, d - 1))
    fwd[:, K] = np.where(ok[:, None], tail.units, 1.0 / math.sqrt(d - 1))
    bwd[:, 0] = np.where(ok[:, None], head.units, -1.0 / math.sqrt(d - 1))
    for k in range(K - 1, -1, -1):
        fwd[:, k] = _apply_null(mats[incs[:, k]], fwd[:, k + 1])
    for k in range(1, K + 1):
        bwd[:, k] = _apply_null(inv[incs[:, k - 1]], bwd[:, k - 1])

    # d(x, x_k) from the (0,0) entry of w_k, with power-of-two rescaling
    dist = np.zeros((nb, K + 1))
    m = np.broadcast_to(np.eye(d), (nb, d, d)).copy()
    logscale = np.zeros(nb)
    for k in range(1, K + 1):
        m = _matmul(m, mats[incs[:, k - 1]])
        big = np.max(np.abs(m), axis=(1, 2)) > 2.0 ** 200
        if big.any():
            m[big] *= 2.0 ** -200
            logscale[big] += 200 * math.log(2.0)
        m00 = m[:, 0, 0]
        small = logscale == 0
        dist[:, k] = np.where(
            small, np.arccosh(np.maximum(np.where(small, m00, 1.0), 1.0)),
            logscale + np.log(2.0 * m00))
    lengths = _atom_lengths(mats)
    return FrameTrack(fwd, bwd, dist, lengths[incs], ok)


def _atom_lengths(mats: np.ndarray) -> np.ndarray:
    """d(o, g o) for atoms given in the base frame."""
    m00 = np.maximum(mats[:, 0, 0], 1.0)
    sp = np.sqrt(np.sum(mats[:, 1:, 0] ** 2, axis=1))
    # arcsinh of the spatial part is accurate for tiny steps
    return np.where(m00 < 2.0, np.arcsinh(sp), np.arccosh(m00))
