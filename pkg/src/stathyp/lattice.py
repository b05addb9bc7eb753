"""
Modular-group tooling: reduction to the standard fundamental domain, the
cusp thickness oracle, thickness proportions of geodesic segments and the
decomposition of a segment into excursions away from two balls.

Thickness uses the reduced height: a point is thick when its image in the
fundamental domain has imaginary part at most ``h``.  Far along a ray the
hyperboloid coordinates are too large for floating-point reduction, so for
geodesics the modular oracle works with exact horoball intervals instead
(see :meth:`ThinOracle.thin_intervals`).  The grid in
:func:`thickness_proportion` is the same either way; only the per-point test
changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .constants import REDUCTION_MAX_MOVES, THICKNESS_GRID
from .geom import (GeometryError, Geodesic, HalfPlanePoint, ModelPoint,
                   dist_to_geodesic, point_at, to_halfplane)


class ReductionError(RuntimeError):
    pass


# -- reduction ------------------------------------------------------------------

def reduce_modular(z: HalfPlanePoint) -> tuple[HalfPlanePoint, str]:
    """
    Move z into {-1/2 <= re < 1/2, |z| >= 1} (on the unit circle only
    re <= 0 is kept).  Returns the reduced point and the word g with
    reduced = g z, written as a product of T^k and S tokens; the rightmost
    token acts first.
    """
    x, y = float(z.re), float(z.im)
    moves: list[str] = []
    for _ in range(REDUCTION_MAX_MOVES):
        k = math.floor(x + 0.5)
        if k:
            x -= k
            moves.append(f"T^{-k}")
        r2 = x * x + y * y
        if r2 < 1.0:
            x, y = -x / r2, y / r2
            moves.append("S")
            continue
        if r2 == 1.0 and x > 0.0:
            x = -x
            moves.append("S")
        break
    else:
        raise ReductionError(f"reduction of {z} did not terminate in {REDUCTION_MAX_MOVES} moves")
    return HalfPlanePoint(x, y), " ".join(reversed(moves))


def word_matrix(word: str) -> np.ndarray:
    """Integer 2x2 matrix of a T/S word (as produced by :func:`reduce_modular`)."""
    m = np.eye(2, dtype=object)
    for tok in word.split():
        if tok == "S":
            g = np.array([[0, -1], [1, 0]], dtype=object)
        elif tok.startswith("T"):
            k = int(tok[2:]) if tok.startswith("T^") else 1
            g = np.array([[1, k], [0, 1]], dtype=object)
        else:
            raise ValueError(f"bad token {tok!r}")
        m = m.dot(g)
    return m


# -- exact horoball geometry ------------------------------------------------------

def convergents(x: Fraction) -> list[tuple[int, int]]:
    """Continued-fraction convergents p/q of a rational x."""
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
        num, den = den, r
    return out


def _sin2_half(x0: Fraction, y0: Fraction, e1: Optional[Fraction], e2: Optional[Fraction]) -> Fraction:
    """sin^2 of half the visual angle at x0 + i y0 between two real/infinite points."""
    if e1 is None and e2 is None:
        return Fraction(0)
    if e1 is None or e2 is None:
        e = e2 if e1 is None else e1
        return y0 * y0 / ((e - x0) ** 2 + y0 * y0)
    return (e1 - e2) ** 2 * y0 * y0 / (((e1 - x0) ** 2 + y0 * y0) * ((e2 - x0) ** 2 + y0 * y0))


def horoball_interval(x0: Fraction, y0: Fraction, fwd: Optional[Fraction],
                      bwd: Optional[Fraction], p: int, q: int, h: Fraction):
    """
    Parameter interval of the geodesic through x0 + i y0 (unit speed, t = 0
    there, running from ``bwd`` to ``fwd``) inside the horoball of reduced
    height > h based at p/q (q = 0 means infinity).  ``None`` is infinity.
    Returns (lo, hi) with infinite ends allowed, or None if disjoint.
    """
    beta = None if q == 0 else Fraction(p, q)
    a = _sin2_half(x0, y0, fwd, beta)
    b = _sin2_half(x0, y0, bwd, beta)
    if q == 0:
        k = y0 / h
    else:
        k = y0 / (h * ((q * x0 - p) ** 2 + (q * y0) ** 2))
    # inside iff a e^t + b e^-t < k
    if a == 0 and b == 0:
        return None
    if a == 0:
        return (math.log(b / k), math.inf)
    if b == 0:
        return (-math.inf, math.log(k / a))
    disc = k * k - 4 * a * b
    if disc <= 0:
        return None
    s = float(k) + math.sqrt(float(disc))
    lo = math.log(2.0 * float(b)) - math.log(s)
    hi = math.log(s) - math.log(2.0 * float(a))
    return (lo, hi)


# -- oracle -----------------------------------------------------------------------

@dataclass(frozen=True)
class ThinOracle:
    """
    Thickness oracle.  ``kind`` is "modular-cusp" (thick iff reduced height
    <= h), "all-thick", or "predicate" (``predicate(x)`` returns a bool or
    a (bool, height) pair).
    """

    kind: str
    h: Optional[float] = None
    predicate: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "modular-cusp":
            if self.h is None or not self.h > 0:
                raise ValueError("modular-cusp oracle needs a cutoff height h > 0")
        elif self.kind == "predicate":
            if self.predicate is None:
                raise ValueError("predicate oracle needs a callable")
        elif self.kind != "all-thick":
            raise ValueError(f"unknown oracle kind {self.kind!r}")

    @classmethod
    def modular(cls, h: float) -> "ThinOracle":
        return cls("modular-cusp", float(h))

    @classmethod
    def all_thick(cls) -> "ThinOracle":
        return cls("all-thick")

    @classmethod
    def from_predicate(cls, fn: Callable) -> "ThinOracle":
        return cls("predicate", predicate=fn)

    def query(self, x: ModelPoint) -> tuple[bool, float]:
        """(is_thick, excursion_height)."""
        if self.kind == "all-thick":
            return True, 0.0
        if self.kind == "predicate":
            out = self.predicate(x)
            return (bool(out[0]), float(out[1])) if isinstance(out, tuple) else (bool(out), math.nan)
        z, _ = reduce_modular(to_halfplane(x))
        return z.im <= self.h, z.im

    def thin_intervals(self, gamma: Geodesic) -> Optional[list[tuple[float, float]]]:
        """
        Sorted disjoint parameter intervals where ``gamma`` is thin, computed
        exactly from horoballs, or None when that route does not apply.

        Candidate cusps are infinity and the convergents of both endpoints:
        a horoball of diameter 1/(h q^2) meeting a geodesic whose endpoints
        are at least 1 apart lies within 1/(h q^2) of one endpoint, which for
        h >= 2 forces p/q to be a convergent of that endpoint.
        """
        if self.kind == "all-thick":
            return []
        if self.kind != "modular-cusp" or gamma.dim != 2 or self.h < 2:
            return None
        fwd, bwd = gamma.forward.exact_real(), gamma.backward.exact_real()
        if fwd is not None and bwd is not None and abs(fwd - bwd) < 1:
            return None
        z0 = to_halfplane(gamma.anchor)
        x0, y0, h = Fraction(z0.re), Fraction(z0.im), Fraction(self.h)
        cands = {(1, 0)}
        for e in (fwd, bwd):
            if e is not None:
                cands.update(convergents(e))
        ivs = []
        for p, q in sorted(cands):
            iv = horoball_interval(x0, y0, fwd, bwd, p, q, h)
            if iv is not None:
                ivs.append(iv)
        return _union(ivs)


def _union(ivs):
    out = []
    for lo, hi in sorted(ivs):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def is_thick(oracle: ThinOracle, x: ModelPoint) -> bool:
    return oracle.query(x)[0]


def excursion_height(oracle: ThinOracle, x: ModelPoint) -> float:
    return oracle.query(x)[1]


def oracle_from_json(spec: dict) -> ThinOracle:
    """{"kind": "modular-cusp", "h": 2.0} or {"kind": "all-thick"}."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("oracle spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "modular-cusp":
        if "h" not in spec:
            raise ValueError("modular-cusp oracle needs 'h'")
        return ThinOracle.modular(float(spec["h"]))
    if kind == "all-thick":
        return ThinOracle.all_thick()
    raise ValueError(f"unknown oracle kind {kind!r} (expected modular-cusp or all-thick)")


# -- thickness along segments ---------------------------------------------------

def grid_midpoints(t0: float, t1: float, step: float) -> np.ndarray:
    """Midpoints of round((t1 - t0) / step) equal cells of [t0, t1]."""
    n = max(1, int(round((t1 - t0) / step)))
    return t0 + (np.arange(n) + 0.5) * ((t1 - t0) / n)


def thick_mask(gamma: Geodesic, ts: np.ndarray, oracle: ThinOracle) -> np.ndarray:
    """Thickness of gamma(t) for each t in ``ts``."""
    ivs = oracle.thin_intervals(gamma)
    if ivs is None:
        return np.array([is_thick(oracle, point_at(gamma, float(t))) for t in ts], dtype=bool)
    thin = np.zeros(len(ts), dtype=bool)
    for lo, hi in ivs:
        thin |= (ts > lo) & (ts < hi)
    return ~thin


def thickness_proportion(segment: tuple, oracle: ThinOracle, step: float = THICKNESS_GRID) -> float:
    """
    Fraction of cell midpoints of [t0, t1] (cells of length ~step) where
    gamma is thick.  Reduced height moves by at most a factor e^s along an
    arc of length s, so only cells within step/2 of a level crossing can be
    misclassified.
    """
    gamma, t0, t1 = segment
    if not t1 > t0:
        raise ValueError("segment needs t1 > t0")
    if not step > 0:
        raise ValueError("grid step must be positive")
    ts = grid_midpoints(t0, t1, step)
    return float(np.mean(thick_mask(gamma, ts, oracle)))


# -- excursions -----------------------------------------------------------------------

@dataclass(frozen=True)
class ExcursionReport:
    intervals: list
    total_length: float


def ball_interval(gamma: Geodesic, c: ModelPoint, rho: float):
    """
    {t : d(gamma(t), c) < rho}, from cosh d(gamma(t), c) = cosh(m) cosh(t - t*)
    with m the distance to the foot gamma(t*).  None when empty.
    """
    m, ts = dist_to_geodesic(c, gamma)
    if m >= rho:
        return None
    w = math.acosh(math.cosh(rho) / math.cosh(m))
    return (ts - w, ts + w)


def ball_excursions(segment: tuple, c1: ModelPoint, c2: ModelPoint, rho: float) -> ExcursionReport:
    """Parts of the segment outside B(c1, rho) and B(c2, rho)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    gamma, t0, t1 = segment
    covered = [iv for iv in (ball_interval(gamma, c1, rho), ball_interval(gamma, c2, rho))
               if iv is not None]
    out = []
    cur = t0
    for lo, hi in _union(covered):
        if lo > cur:
            out.append((cur, min(lo, t1)))
        cur = max(cur, hi)
        if cur >= t1:
            break
    if cur < t1:
        out.append((cur, t1))
    out = [(a, b) for a, b in out if b > a]
    return ExcursionReport(out, math.fsum(b - a for a, b in out))


__all__ = [
    "ExcursionReport", "ReductionError", "ThinOracle", "ball_excursions",
    "ball_interval", "convergents", "excursion_height", "grid_midpoints",
    "horoball_interval", "is_thick", "oracle_from_json", "reduce_modular",
    "thick_mask", "thickness_proportion", "word_matrix",
]
