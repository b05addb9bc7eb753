"""
Monte Carlo estimators.

Every estimator works in the frame of the base point x: boundary samples are
unit vectors seen from x, so points on the spheres S_r(x) are described by
(radius, direction) and all distances come from the polar formula in
:func:`stathyp.geom.polar_distance`.  This stays accurate at r = 40, where
hyperboloid coordinates (of size e^40) would not.

Sample index i is an independent work unit.  Indices are processed in fixed
chunks of ``CHUNK_SIZE`` and reduced in index order, so output is the same
for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence

import numpy as np

from .boundary import (HarmonicMeasure, as_measure,
                       to_global, track_frames)
from .constants import (CHUNK_SIZE, EVENT_GRID, HARMONIC_MAX_STEPS, HARMONIC_TOL,
                        MAX_FAILURE_FRACTION, THICKNESS_GRID)
from .geom import (ModelPoint, apply, distance, frame, polar_distance,
                   ray_to_boundary, segment_distance_from_sides)
from .lattice import ThinOracle, thick_mask
from .walk import (CENTER, FORWARD, SECOND, TARGET, GroupDistribution, IncrementStream,
                   RngSpec, config_hash, step_lengths)


class EstimatorError(RuntimeError):
    pass


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_samples: int
    n_failures: int
    seed: int
    config_hash: str

    @property
    def flagged(self) -> bool:
        """True when some samples failed and the estimate is conditional on success."""
        return self.n_failures > 0

    @classmethod
    def from_values(cls, values, n_failures: int, seed: int, chash: str) -> "MonteCarloEstimate":
        v = np.asarray(values, dtype=float)
        n = v.size
        if n == 0:
            return cls(math.nan, math.nan, 0, n_failures, seed, chash)
        mean = float(np.mean(v))
        se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n, n_failures, seed, chash)


@dataclass(frozen=True)
class ECurve:
    entries: list
    gromov_mean: Optional[MonteCarloEstimate] = None

    def __post_init__(self):
        rs = [r for r, _ in self.entries]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("radii must be strictly increasing")

    @property
    def radii(self) -> list:
        return [r for r, _ in self.entries]

    @property
    def means(self) -> np.ndarray:
        return np.array([e.mean for _, e in self.entries])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([e.stderr for _, e in self.entries])


@dataclass(frozen=True)
class ExceptionConfig:
    """Parameters of the three exceptional sets; m_max defaults to 4n."""

    n: int
    R: float
    p: float
    rho: float
    D: float
    c: float
    A_hat: float
    a: float
    m_max: Optional[int] = None

    def __post_init__(self):
        if self.m_max is None:
            object.__setattr__(self, "m_max", 4 * self.n)
        errs = self.violations()
        if errs:
            raise ValueError("; ".join(errs))

    def violations(self) -> list:
        errs = []
        if not self.n >= 1:
            errs.append("n must be >= 1")
        if not self.R > 0:
            errs.append("R must be positive")
        if not 0 < self.rho < self.p < 1:
            errs.append("need 0 < rho < p < 1")
        if not self.D > 0:
            errs.append("D must be positive")
        if not self.c > 0:
            errs.append("c must be positive")
        if not 0 < self.a < self.A_hat:
            errs.append("need 0 < a < A_hat")
        if not self.n <= self.m_max:
            errs.append("need n <= m_max")
        return errs


# -- plumbing ----------------------------------------------------------------------

def _chunks(N: int) -> list:
    return [(s, min(s + CHUNK_SIZE, N)) for s in range(0, N, CHUNK_SIZE)]


def _run(fn, N: int, workers: int = 1) -> dict:
    """Apply fn(start, stop) -> dict of arrays over fixed chunks; concatenate in order."""
    chunks = _chunks(N)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, *zip(*chunks)))
    else:
        parts = [fn(a, b) for a, b in chunks]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _check_failures(n_fail: int, N: int, what: str):
    if N and n_fail / N > MAX_FAILURE_FRACTION:
        raise EstimatorError(f"{what}: {n_fail} of {N} samples failed to converge "
                             f"(limit {MAX_FAILURE_FRACTION:.0%})")


def _describe(mu) -> dict:
    m = as_measure(mu)
    return m.describe()


def _hash(name: str, mu, x: ModelPoint, rng: RngSpec, **params) -> str:
    return config_hash({"estimator": name, "measure": _describe(mu),
                        "x": x.coords, "seed": rng.master_seed, **params})


def _measure(mu, tol: float, max_steps: int):
    if isinstance(mu, GroupDistribution):
        return HarmonicMeasure(mu, tol, max_steps)
    return mu


def _pair_chunk(meas, x, rng, a, b):
    idx = range(a, b)
    d1 = meas.directions(x, rng, idx, FORWARD)
    d2 = meas.directions(x, rng, idx, SECOND)
    s = 0.5 * np.sqrt(np.sum((d1.units - d2.units) ** 2, axis=1))
    return {"s": s, "ok": d1.ok & d2.ok, "u": d1.units, "v": d2.units}


def _pairs(mu, x, N, rng, workers, tol, max_steps, what):
    meas = _measure(mu, tol, max_steps)
    out = _run(partial(_pair_chunk, meas, x, rng), N, workers)
    nf = int(np.sum(~out["ok"]))
    _check_failures(nf, N, what)
    return out, nf


# -- E ------------------------------------------------------------------------

def estimate_E_curve(mu, x: ModelPoint, radii: Sequence[float], N: int, rng: RngSpec,
                     workers: int = 1, tol: float = HARMONIC_TOL,
                     max_steps: int = HARMONIC_MAX_STEPS) -> ECurve:
    """
    Mean of d(x'_r, x''_r) / r over independent pairs of boundary samples,
    one pair per index, the same pairs reused for every radius.  ``mu`` is a
    GroupDistribution (harmonic measure) or a boundary measure object.
    """
    radii = [float(r) for r in radii]
    if any(not r > 0 for r in radii):
        raise ValueError("radii must be positive")
    if N < 2:
        raise ValueError("N must be >= 2")
    out, nf = _pairs(mu, x, N, rng, workers, tol, max_steps, "estimate_E")
    s = out["s"][out["ok"]]
    h = _hash("estimate_E", mu, x, rng, radii=radii, N=N)
    entries = [(r, MonteCarloEstimate.from_values(polar_distance(r, r, s) / r, nf,
                                                  rng.master_seed, h)) for r in radii]
    with np.errstate(divide="ignore"):
        gp = -np.log(s)
    gm = MonteCarloEstimate.from_values(gp, nf, rng.master_seed, h) if np.all(np.isfinite(gp)) else None
    return ECurve(entries, gm)


def estimate_E(mu, x: ModelPoint, r: float, N: int, rng: RngSpec, **kw) -> MonteCarloEstimate:
    return estimate_E_curve(mu, x, [r], N, rng, **kw).entries[0][1]


# -- drift -------------------------------------------------------------------------

def _arccosh_from_log(logy: np.ndarray) -> np.ndarray:
    """arccosh(e^logy) without forming e^logy when it is huge."""
    big = logy > 20.0
    near = np.arccosh(np.maximum(np.exp(np.where(big, 0.0, logy)), 1.0))
    far = logy + np.log1p(np.sqrt(1.0 - np.exp(-2.0 * np.where(big, logy, 20.0))))
    return np.where(big, far, near)


def _drift_chunk(mats, sl2, cum, rng, n, a, b):
    nb = b - a
    inc = np.stack([IncrementStream(rng.generator(i, FORWARD), cum).take(n) for i in range(a, b)])
    if sl2 is not None:
        p = np.broadcast_to(np.eye(2), (nb, 2, 2)).copy()
        expo = np.zeros(nb)
        for k in range(n):
            g = sl2[inc[:, k]]
            p = p[:, :, 0, None] * g[:, None, 0, :] + p[:, :, 1, None] * g[:, None, 1, :]
            _, e = np.frexp(np.max(np.abs(p), axis=(1, 2)))
            p = np.ldexp(p, -e[:, None, None])
            expo += e
        # cosh d = |P|_F^2 / 2 with P = 2^expo * p
        f2 = np.sum(p * p, axis=(1, 2))
        logy = 2.0 * expo * math.log(2.0) + np.log(f2) - math.log(2.0)
        d = _arccosh_from_log(logy)
    else:
        dd = mats.shape[1]
        m = np.broadcast_to(np.eye(dd), (nb, dd, dd)).copy()
        logscale = np.zeros(nb)
        for k in range(n):
            g = mats[inc[:, k]]
            out = m[:, :, 0, None] * g[:, None, 0, :]
            for j in range(1, dd):
                out = out + m[:, :, j, None] * g[:, None, j, :]
            m = out
            _, e = np.frexp(np.max(np.abs(m), axis=(1, 2)))
            m = np.ldexp(m, -e[:, None, None])
            logscale += e * math.log(2.0)
        m00 = m[:, 0, 0]
        logy = logscale + np.log(m00)
        d = _arccosh_from_log(logy)
    return {"d": d / n}


def estimate_drift(mu: GroupDistribution, x: ModelPoint, n: int, N: int, rng: RngSpec,
                   workers: int = 1) -> MonteCarloEstimate:
    """Mean of d(x, w_n x) / n over N paths (bounded products, exact power-of-two rescaling)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if N < 1:
        raise ValueError("N must be >= 1")
    f = frame(x)
    fi = f.inverse()
    conj = [fi @ a.g @ f for a in mu.atoms]
    mats = np.stack([g.matrix for g in conj])
    sl2 = np.stack([g.sl2 for g in conj]) if all(g.sl2 is not None for g in conj) else None
    out = _run(partial(_drift_chunk, mats, sl2, mu.cumulative, rng, n), N, workers)
    return MonteCarloEstimate.from_values(out["d"], 0, rng.master_seed,
                                          _hash("drift", mu, x, rng, n=n, N=N))


# -- recurrence ------------------------------------------------------------------

def _track_chunk(mu, x, rng, K, tol, max_steps, a, b):
    ft = track_frames(mu, x, rng, range(a, b), K, tol, max_steps)
    gap = np.sqrt(np.sum((ft.fwd - ft.bwd) ** 2, axis=2))
    return {"gap": gap, "steps": ft.steps, "dist": ft.dist, "ok": ft.ok & (gap[:, 0] > tol)}


def _tracks(mu, x, rng, K, N, workers, tol, max_steps, what):
    out = _run(partial(_track_chunk, mu, x, rng, K, tol, max_steps), N, workers)
    nf = int(np.sum(~out["ok"]))
    _check_failures(nf, N, what)
    return out, nf


def recurrence_frequency(mu: GroupDistribution, x: ModelPoint, R: float, n: int, N: int,
                         rng: RngSpec, workers: int = 1, tol: float = HARMONIC_TOL,
                         max_steps: int = HARMONIC_MAX_STEPS):
    """
    (freq, lambda_R): the fraction of k in {0..n} with d(x_k, gamma) < R/3,
    averaged over paths, and the fraction of paths with d(x, gamma) < R/3.
    Degenerate or non-convergent tracking counts as a failure.
    """
    return recurrence_sweep(mu, x, [R], n, N, rng, workers, tol, max_steps)[0]


def recurrence_sweep(mu, x, Rs, n, N, rng, workers=1, tol=HARMONIC_TOL,
                     max_steps=HARMONIC_MAX_STEPS) -> list:
    """recurrence_frequency for several R from one set of tracked paths."""
    if any(not R > 0 for R in Rs):
        raise ValueError("R must be positive")
    if n < 0:
        raise ValueError("n must be >= 0")
    out, nf = _tracks(mu, x, rng, n, N, workers, tol, max_steps, "recurrence")
    gap = out["gap"][out["ok"]]
    res = []
    for R in Rs:
        rec = gap > 2.0 / math.cosh(R / 3.0)
        h = _hash("recurrence", mu, x, rng, R=R, n=n, N=N)
        res.append((MonteCarloEstimate.from_values(rec.mean(axis=1), nf, rng.master_seed, h),
                    MonteCarloEstimate.from_values(rec[:, 0], nf, rng.master_seed, h)))
    return res


# -- separation and thickness -------------------------------------------------------

def event_grid(lo: float, hi: float, step: float = EVENT_GRID) -> np.ndarray:
    """lo, lo + step', ..., hi with step' ~ step dividing [lo, hi] evenly."""
    k = max(1, int(round((hi - lo) / step)))
    return lo + np.arange(k + 1) * ((hi - lo) / k)


def separation_probability(mu, x: ModelPoint, M: float, eta: float, r: float, N: int,
                           rng: RngSpec, step: float = EVENT_GRID, workers: int = 1,
                           tol: float = HARMONIC_TOL,
                           max_steps: int = HARMONIC_MAX_STEPS) -> MonteCarloEstimate:
    """Fraction of pairs with d(x'_t, x''_t) >= M at every grid t in [eta r, r]."""
    if not M >= 0:
        raise ValueError("M must be nonnegative")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0,1)")
    if not step > 0:
        raise ValueError("grid step must be positive")
    out, nf = _pairs(mu, x, N, rng, workers, tol, max_steps, "separation")
    s = out["s"][out["ok"]]
    ts = event_grid(eta * r, r, step)
    d = polar_distance(ts[None, :], ts[None, :], s[:, None])
    ev = np.all(d >= M, axis=1)
    return MonteCarloEstimate.from_values(ev, nf, rng.master_seed,
                                          _hash("separation", mu, x, rng, M=M, eta=eta, r=r, N=N, step=step))


def ray_thickness_profile(x: ModelPoint, unit, oracle: ThinOracle, ts: np.ndarray,
                          grid: float = THICKNESS_GRID) -> np.ndarray:
    """
    thick%([x, x'_t]) for each t in ``ts`` along the ray from x in direction
    ``unit`` (seen from x).  Uses the global grid of cell midpoints
    (k + 1/2) * grid, so each [0, t] with t a multiple of ``grid`` is scored
    on the same cells thickness_proportion would use.
    """
    ray = ray_to_boundary(x, to_global(x, unit))
    ncell = np.maximum(1, np.rint(ts / grid).astype(int))
    mids = (np.arange(ncell.max()) + 0.5) * grid
    cum = np.cumsum(thick_mask(ray, mids, oracle))
    return cum[ncell - 1] / ncell


def _thick_chunk(meas, x, rng, oracle, ts, grid, lane, a, b):
    d = meas.directions(x, rng, range(a, b), lane)
    prof = np.zeros((b - a, len(ts)))
    for i in range(b - a):
        if d.ok[i]:
            prof[i] = ray_thickness_profile(x, d.units[i], oracle, ts, grid)
    return {"prof": prof, "ok": d.ok}


def thickness_probability(mu, x: ModelPoint, oracle: ThinOracle, theta: float, eta: float,
                          r: float, N: int, rng: RngSpec, step: float = EVENT_GRID,
                          grid: float = THICKNESS_GRID, workers: int = 1,
                          tol: float = HARMONIC_TOL,
                          max_steps: int = HARMONIC_MAX_STEPS) -> MonteCarloEstimate:
    """Fraction of rays with thick%([x, x'_t]) >= theta at every grid t in [eta r, r]."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0,1]")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0,1)")
    meas = _measure(mu, tol, max_steps)
    ts = event_grid(eta * r, r, step)
    out = _run(partial(_thick_chunk, meas, x, rng, oracle, ts, grid, FORWARD), N, workers)
    nf = int(np.sum(~out["ok"]))
    _check_failures(nf, N, "thickness")
    ev = np.all(out["prof"][out["ok"]] >= theta, axis=1)
    return MonteCarloEstimate.from_values(
        ev, nf, rng.master_seed,
        _hash("thickness", mu, x, rng, oracle=[oracle.kind, oracle.h], theta=theta,
              eta=eta, r=r, N=N, step=step, grid=grid))


# -- shadows --------------------------------------------------------------------

def shadow_products(d: float, s: np.ndarray) -> np.ndarray:
    """(y, xi)_x for y at distance d from x, with half-angle sine s between y and xi."""
    s2 = np.square(s)
    return 0.5 * (d - np.log(np.exp(-d) * (1.0 - s2) + np.exp(d) * s2))


def _dir_chunk(meas, x, rng, lane, a, b):
    d = meas.directions(x, rng, range(a, b), lane)
    return {"u": d.units, "ok": d.ok}


def shadow_decay(mu, x: ModelPoint, distances: Sequence[float], tau: float, N_dir: int,
                 N_boundary: int, rng: RngSpec, workers: int = 1, tol: float = HARMONIC_TOL,
                 max_steps: int = HARMONIC_MAX_STEPS) -> list:
    """
    For each d: centres y at distance d toward N_dir harmonic directions, the
    shadow mass of each estimated from N_boundary harmonic targets, and the
    largest mass.  Centres and targets are shared across distances, so the
    shadows at one centre direction are nested.  Returns (d, estimate) with the
    binomial stderr of the maximising centre.
    """
    if not tau >= 0:
        raise ValueError("tau must be nonnegative")
    ds = [float(d) for d in distances]
    if any(b <= a for a, b in zip(ds, ds[1:])):
        raise ValueError("distances must be increasing")
    meas = _measure(mu, tol, max_steps)
    cen = _run(partial(_dir_chunk, meas, x, rng, CENTER), N_dir, workers)
    tgt = _run(partial(_dir_chunk, meas, x, rng, TARGET), N_boundary, workers)
    nf = int(np.sum(~cen["ok"])) + int(np.sum(~tgt["ok"]))
    _check_failures(nf, N_dir + N_boundary, "shadow_decay")
    cu, tu = cen["u"][cen["ok"]], tgt["u"][tgt["ok"]]
    s = 0.5 * np.sqrt(np.sum((cu[:, None, :] - tu[None, :, :]) ** 2, axis=2))
    nb = len(tu)
    res = []
    for d in ds:
        if tau >= d:
            mass = np.ones(len(cu))
        else:
            mass = np.mean(shadow_products(d, s) >= d - tau, axis=1)
        j = int(np.argmax(mass))
        p = float(mass[j])
        h = _hash("shadow", mu, x, rng, d=d, tau=tau, N_dir=N_dir, N_boundary=N_boundary)
        res.append((d, MonteCarloEstimate(p, math.sqrt(p * (1.0 - p) / nb), nb, nf,
                                          rng.master_seed, h)))
    return res


# -- exceptional sets ------------------------------------------------------------

def exception_rates(mu: GroupDistribution, x: ModelPoint, cfg: ExceptionConfig, N: int,
                    rng: RngSpec, workers: int = 1, tol: float = HARMONIC_TOL,
                    max_steps: int = HARMONIC_MAX_STEPS) -> dict:
    """
    Membership rates of the three exceptional sets, each checked for some
    m in [n, m_max]:

    * "E1": (1/m) #{k <= m : d(x_k, gamma) < R/3} < p - rho
    * "E2": (1/m) sum_{i <= m} b_i > C + c, with b_i = l_i 1[l_i > D],
      l_i = d(x, g_i x) and C = sum over atoms of mu(g) l(g) 1[l(g) > D]
    * "E3": d(x, x_m) outside ((A_hat - a) m, (A_hat + a) m)
    """
    out, nf = _tracks(mu, x, rng, cfg.m_max, N, workers, tol, max_steps, "exceptions")
    ok = out["ok"]
    ms = np.arange(cfg.n, cfg.m_max + 1)

    rec = out["gap"][ok] > 2.0 / math.cosh(cfg.R / 3.0)
    freq = np.cumsum(rec, axis=1)[:, ms] / ms
    e1 = np.any(freq < cfg.p - cfg.rho, axis=1)

    lengths = out["steps"][ok]
    b = np.where(lengths > cfg.D, lengths, 0.0)
    C = math.fsum(a.weight * l for a, l in zip(mu.atoms, step_lengths(mu, x)) if l > cfg.D)
    avg = np.cumsum(b, axis=1)[:, ms - 1] / ms
    e2 = np.any(avg > C + cfg.c, axis=1)

    dist = out["dist"][ok][:, ms]
    e3 = np.any((dist <= (cfg.A_hat - cfg.a) * ms) | (dist >= (cfg.A_hat + cfg.a) * ms), axis=1)

    h = _hash("exceptions", mu, x, rng, cfg=cfg.__dict__, N=N)
    return {k: MonteCarloEstimate.from_values(v, nf, rng.master_seed, h)
            for k, v in (("E1", e1), ("E2", e2), ("E3", e3))}


# -- thin triangles and the lower-bound mechanism ---------------------------------------

def _tripod_polar(r1: float, r2: float, s: float, ts: np.ndarray, C: float) -> np.ndarray:
    """
    Distances from the points at parameters ``ts`` on [x, x'] to
    [x, x''] and [x', x''], for x' = (r1, u), x'' = (r2, v) around x with
    |u - v| = 2 s.  Returns the distance to the nearer side.
    """
    b = polar_distance(ts, r2, s)
    side1 = segment_distance_from_sides(ts, b, np.full_like(ts, r2))
    d12 = float(polar_distance(r1, r2, s))
    side2 = segment_distance_from_sides(r1 - ts, b, np.full_like(ts, d12))
    return np.minimum(side1, side2)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    return event_grid(lo, hi, step)


def tripod_check(x: ModelPoint, x1: ModelPoint, x2: ModelPoint, C: float,
                 step: float = 0.01) -> bool:
    """Every grid point of [x, x1] lies within C of [x, x2] u [x1, x2]."""
    if not C > 0 or not step > 0:
        raise ValueError("C and the grid step must be positive")
    r1, r2 = distance(x, x1), distance(x, x2)
    if r1 == 0.0 or r2 == 0.0:
        return True
    fi = frame(x).inverse()
    u = apply(fi, x1).coords[1:]
    v = apply(fi, x2).coords[1:]
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    s = 0.5 * float(np.linalg.norm(u - v))
    return bool(np.all(_tripod_polar(r1, r2, s, _grid(0.0, r1, step), C) <= C))


@dataclass(frozen=True)
class MechanismReport:
    n_pairs: int
    n_qualifying: int
    n_violations: int
    min_margin: float
    bound: float


def mechanism_check(mu, x: ModelPoint, r: float, eta: float, C: float, oracle: ThinOracle,
                    theta: float, N: int, rng: RngSpec, step: float = EVENT_GRID,
                    tripod_step: float = 0.01, workers: int = 1,
                    tol: float = HARMONIC_TOL, max_steps: int = HARMONIC_MAX_STEPS) -> MechanismReport:
    """
    Lower-bound mechanism on sampled pairs: among pairs that pass the
    separation event (M = 3C), the thickness event for both rays, and the
    tripod condition along [x'_{eta r}, x'_{2 eta r}], count those with
    d(x', x'') < (2 - 4 eta) r - 2C.
    """
    out, nf = _pairs(mu, x, N, rng, workers, tol, max_steps, "mechanism")
    ok = out["ok"]
    s_all, u_all, v_all = out["s"][ok], out["u"][ok], out["v"][ok]
    ts = event_grid(eta * r, r, step)
    sep = np.all(polar_distance(ts[None, :], ts[None, :], s_all[:, None]) >= 3.0 * C, axis=1)
    bound = (2.0 - 4.0 * eta) * r - 2.0 * C
    tI = _grid(eta * r, 2.0 * eta * r, tripod_step)
    nq = nv = 0
    margin = math.inf
    for s, u, v, sp in zip(s_all, u_all, v_all, sep):
        if not sp:
            continue
        if np.any(ray_thickness_profile(x, u, oracle, ts) < theta):
            continue
        if np.any(ray_thickness_profile(x, v, oracle, ts) < theta):
            continue
        if not np.all(_tripod_polar(r, r, s, tI, C) <= C):
            continue
        nq += 1
        d = float(polar_distance(r, r, s))
        margin = min(margin, d - bound)
        nv += d < bound
    return MechanismReport(len(s_all), nq, nv, margin, bound)


__all__ = [
    "ECurve", "EstimatorError", "ExceptionConfig", "MechanismReport", "MonteCarloEstimate",
    "estimate_E", "estimate_E_curve", "estimate_drift", "event_grid", "exception_rates",
    "mechanism_check", "ray_thickness_profile", "recurrence_frequency", "recurrence_sweep",
    "separation_probability", "shadow_decay", "shadow_products", "thickness_probability",
    "tripod_check",
]
