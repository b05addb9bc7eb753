"""
Finitely supported random walks on isometry groups of H^n.

Randomness is counter based: every (master seed, sample index, lane) triple
names its own Philox stream, so a sample path depends only on that triple and
never on the order in which paths are built or on how work is split across
processes.  Lanes separate the independent streams one sample index needs
(forward and backward halves of a bi-infinite path, the two coordinates of a
pair, ...).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import REORTH_EVERY, REORTH_MAX_ENTRY, RNG_BLOCK, WEIGHT_TOL
from .geom import Isometry, ModelPoint, distance, apply, mink

#: stream lanes
FORWARD = 0
BACKWARD = 1
SECOND = 2
CENTER = 3
TARGET = 4


def config_hash(obj) -> str:
    """Short stable hash of a JSON-serializable object."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


@dataclass(frozen=True)
class Atom:
    label: str
    g: Isometry
    weight: float


class DistributionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupDistribution:
    """A finitely supported probability measure on isometries."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise DistributionError("a distribution needs at least one atom")
        labels = [a.label for a in atoms]
        if len(set(labels)) != len(labels):
            raise DistributionError(f"atom labels must be unique: {labels}")
        if any(not a.weight > 0 for a in atoms):
            raise DistributionError("atom weights must be positive")
        total = math.fsum(a.weight for a in atoms)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise DistributionError(f"weights must sum to 1, got {total!r}")
        if len({a.g.dim for a in atoms}) != 1:
            raise DistributionError("atoms act on different dimensions")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_pairs(cls, pairs: Sequence) -> "GroupDistribution":
        """From (label, isometry, weight) triples."""
        return cls(tuple(Atom(l, g, float(w)) for l, g, w in pairs))

    @property
    def dim(self) -> int:
        return self.atoms[0].g.dim

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms])

    @property
    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c

    @property
    def matrices(self) -> np.ndarray:
        return np.stack([a.g.matrix for a in self.atoms])

    @property
    def has_sl2(self) -> bool:
        return all(a.g.sl2 is not None for a in self.atoms)

    def conjugate(self, h: Isometry) -> "GroupDistribution":
        """The distribution of h g h^-1."""
        hi = h.inverse()
        return GroupDistribution(tuple(Atom(a.label, h @ a.g @ hi, a.weight)
                                       for a in self.atoms))

    def to_json(self) -> dict:
        out = []
        for a in self.atoms:
            d = {"label": a.label, "weight": a.weight}
            if a.g.sl2 is not None:
                d["matrix"] = a.g.sl2.tolist()
            else:
                d["matrix"] = a.g.matrix.tolist()
            out.append(d)
        return {"atoms": out}

    def non_elementary(self, max_word: int = 4) -> bool:
        """
        Diagnostic: look for two loxodromic words (length <= max_word) in the
        support with distinct axes.  Warns and returns False if none found.
        """
        axes = []
        gs = [a.g for a in self.atoms]
        for k in range(1, max_word + 1):
            for word in itertools.product(gs, repeat=k):
                g = word[0]
                for h in word[1:]:
                    g = g @ h
                if g.translation_length() > 1e-6:
                    ax = _axis(g)
                    if any(not np.allclose(ax, b, atol=1e-8) for b in axes):
                        return True
                    axes.append(ax)
        warnings.warn("support does not look non-elementary: no two loxodromics "
                      "with distinct axes among short words", stacklevel=2)
        return False


def _axis(g: Isometry) -> np.ndarray:
    """Sorted pair of fixed boundary points of a loxodromic, as unit vectors."""
    w, v = np.linalg.eig(g.matrix)
    order = np.argsort(np.abs(w))
    ends = []
    for idx in (order[0], order[-1]):
        e = np.real(v[:, idx])
        e = e / e[0]
        ends.append(e[1:] / np.linalg.norm(e[1:]))
    ends.sort(key=lambda e: tuple(np.round(e, 10)))
    return np.concatenate(ends)


def reflect(mu: GroupDistribution) -> GroupDistribution:
    """The reflected measure mu_hat(g) = mu(g^-1)."""
    return GroupDistribution(tuple(Atom(_inv_label(a.label), a.g.inverse(), a.weight)
                                   for a in mu.atoms))


def _inv_label(label: str) -> str:
    return label[:-3] if label.endswith("^-1") else label + "^-1"


# -- built-in distributions --------------------------------------------------

T_MATRIX = [[1.0, 1.0], [0.0, 1.0]]
S_MATRIX = [[0.0, -1.0], [1.0, 0.0]]


def psl2z_uniform_tts() -> GroupDistribution:
    """Uniform measure on {T, T^-1, S} in PSL(2, Z)."""
    t = Isometry.from_sl2(T_MATRIX)
    return GroupDistribution.from_pairs([
        ("T", t, 1 / 3), ("T^-1", t.inverse(), 1 / 3),
        ("S", Isometry.from_sl2(S_MATRIX), 1 / 3)])


def hyperbolic_pointmass(length: float = 1.0) -> GroupDistribution:
    """Point mass on the translation of ``length`` along the imaginary axis."""
    return GroupDistribution.from_pairs([("H", Isometry.hyperbolic(length), 1.0)])


def parabolic_pointmass() -> GroupDistribution:
    return GroupDistribution.from_pairs([("T", Isometry.from_sl2(T_MATRIX), 1.0)])


def identity_pointmass(n: int = 2) -> GroupDistribution:
    return GroupDistribution.from_pairs([("e", Isometry.identity(n), 1.0)])


BUILTINS = {
    "psl2z-uniform-TTS": psl2z_uniform_tts,
    "hyperbolic-pointmass": hyperbolic_pointmass,
    "parabolic-pointmass": parabolic_pointmass,
    "identity-pointmass": identity_pointmass,
}


def parse_builtin(name: str) -> GroupDistribution:
    """Resolve names such as ``psl2z-uniform-TTS`` or ``hyperbolic-pointmass(0.5)``."""
    base, _, arg = name.partition("(")
    if base not in BUILTINS:
        raise DistributionError(
            f"unknown distribution {name!r}; built-ins: {sorted(BUILTINS)}")
    if arg:
        if not arg.endswith(")"):
            raise DistributionError(f"malformed built-in {name!r}")
        try:
            value = float(arg[:-1])
        except ValueError:
            raise DistributionError(f"malformed built-in {name!r}") from None
        if base != "hyperbolic-pointmass":
            raise DistributionError(f"{base} takes no parameter")
        return BUILTINS[base](value)
    return BUILTINS[base]()


def distribution_from_json(spec) -> GroupDistribution:
    """A built-in name or {"atoms": [{"label", "matrix", "weight"}, ...]}."""
    if isinstance(spec, str):
        return parse_builtin(spec)
    if not isinstance(spec, dict) or "atoms" not in spec:
        raise DistributionError("distribution must be a built-in name or {'atoms': [...]}")
    pairs = []
    for k, a in enumerate(spec["atoms"]):
        try:
            m = np.asarray(a["matrix"], dtype=float)
            w = float(a["weight"])
        except (KeyError, TypeError, ValueError) as e:
            raise DistributionError(f"atom {k}: {e}") from None
        label = str(a.get("label", f"g{k}"))
        if m.shape == (2, 2):
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det - 1.0) > 1e-9:
                raise DistributionError(f"atom {label}: determinant {det!r} != 1")
            g = Isometry.from_sl2(m)
        else:
            g = Isometry(m)
            if g.defect() > 1e-9:
                raise DistributionError(f"atom {label}: matrix does not preserve B")
        pairs.append((label, g, w))
    return GroupDistribution.from_pairs(pairs)


# -- randomness -----------------------------------------------------------------

@dataclass(frozen=True)
class RngSpec:
    """
    Master seed plus the substream scheme: sample index ``i`` on lane ``l``
    reads the Philox stream keyed by SeedSequence(master_seed,
    spawn_key=(i, l)).
    """

    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master seed must be an unsigned 64-bit integer")

    def generator(self, index: int, lane: int = FORWARD) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(index), int(lane)))
        return np.random.Generator(np.random.Philox(ss))

    def increments(self, mu: GroupDistribution, index: int, lane: int = FORWARD) -> "IncrementStream":
        return IncrementStream(self.generator(index, lane), mu.cumulative)


class IncrementStream:
    """Atom indices drawn i.i.d. from a substream, in fixed-size blocks."""

    def __init__(self, gen: np.random.Generator, cumulative: np.ndarray):
        self._gen = gen
        self._cum = cumulative
        self._buf = np.empty(0, dtype=np.intp)
        self._pos = 0

    def _refill(self):
        u = self._gen.random(RNG_BLOCK)
        idx = np.searchsorted(self._cum, u, side="right")
        self._buf = np.minimum(idx, len(self._cum) - 1)
        self._pos = 0

    def take(self, k: int) -> np.ndarray:
        out = np.empty(k, dtype=np.intp)
        filled = 0
        while filled < k:
            if self._pos == len(self._buf):
                self._refill()
            m = min(k - filled, len(self._buf) - self._pos)
            out[filled:filled + m] = self._buf[self._pos:self._pos + m]
            self._pos += m
            filled += m
        return out

    def next(self) -> int:
        return int(self.take(1)[0])


# -- paths -------------------------------------------------------------------

def b_orthonormalize(m: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the columns of m with respect to B (column 0 timelike)."""
    m = np.array(m, dtype=float)
    c0 = m[:, 0] / math.sqrt(-mink(m[:, 0], m[:, 0]))
    if c0[0] < 0:
        c0 = -c0
    cols = [c0]
    for i in range(1, m.shape[1]):
        c = m[:, i] + mink(m[:, i], c0) * c0
        for cj in cols[1:]:
            c = c - mink(c, cj) * cj
        cols.append(c / math.sqrt(mink(c, c)))
    return np.stack(cols, axis=1)


def _renorm_sl2(m: np.ndarray) -> tuple[np.ndarray, int]:
    """Divide by a power of two near the largest entry (exact), return exponent."""
    _, e = math.frexp(float(np.max(np.abs(m))))
    return np.ldexp(m, -e), e


@dataclass(eq=False)
class SamplePath:
    """
    A sample path w_1, ..., w_n with w_k = g_1 ... g_k.

    ``products[k]`` holds w_k as an (n+1)x(n+1) matrix (w_0 = identity).  For
    SL(2, R) distributions ``sl2[k] * 2**sl2_exp[k]`` is a 2x2 representative
    of w_k kept bounded by exact power-of-two renormalization;
    ``renorm_log`` = sl2_exp * log 2 is the accumulated log scale.
    """

    distribution: GroupDistribution
    seed: int
    index: int
    lane: int
    increments: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    products: list = field(default_factory=list)
    sl2: list = field(default_factory=list)
    sl2_exp: list = field(default_factory=list)
    _stream: Optional[IncrementStream] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.products) - 1

    @property
    def renorm_log(self) -> np.ndarray:
        return np.asarray(self.sl2_exp, dtype=float) * math.log(2.0)

    @property
    def config_hash(self) -> str:
        return config_hash({"mu": self.distribution.to_json(), "seed": self.seed,
                            "index": self.index, "lane": self.lane})

    def extend(self, k: int) -> "SamplePath":
        """Append k more steps from the same substream."""
        mu = self.distribution
        new = self._stream.take(k)
        mats = mu.matrices
        sl2s = [a.g.sl2 for a in mu.atoms] if mu.has_sl2 else None
        m = self.products[-1]
        # entries beyond float range become inf; product() reports it
        with np.errstate(over="ignore", invalid="ignore"):
            self._grow(new, mats, sl2s, m)
        self.increments = np.concatenate((self.increments, new))
        return self

    def _grow(self, new, mats, sl2s, m):
        for a in new:
            step = len(self.products)
            m = m @ mats[a]
            if step % REORTH_EVERY == 0 and np.max(np.abs(m)) < REORTH_MAX_ENTRY:
                m = b_orthonormalize(m)
            self.products.append(m)
            if sl2s is not None:
                s, e = _renorm_sl2(self.sl2[-1] @ sl2s[a])
                self.sl2.append(s)
                self.sl2_exp.append(self.sl2_exp[-1] + e)

    def product(self, k: int) -> Isometry:
        m = self.products[k]
        if not np.all(np.isfinite(m)):
            raise OverflowError(f"w_{k} is not representable in floating point; "
                                "use moebius() or the renormalized sl2 factors")
        s = None
        if self.sl2:
            s = np.ldexp(self.sl2[k], self.sl2_exp[k])
        return Isometry(m, s)

    def moebius(self, k: int, z: complex) -> complex:
        """w_k z from the renormalized 2x2 factor (projective, no overflow)."""
        if not self.sl2:
            raise ValueError("path has no 2x2 representation")
        a, b, c, d = self.sl2[k].ravel()
        with np.errstate(divide="ignore", invalid="ignore"):
            return complex((a * z + b) / (c * z + d))

    def position(self, k: int, x: ModelPoint) -> ModelPoint:
        return apply(Isometry(self.products[k]), x)

    def labels(self) -> list[str]:
        return [self.distribution.atoms[i].label for i in self.increments]


def sample_path(mu: GroupDistribution, n: int, rng: RngSpec, index: int,
                lane: int = FORWARD) -> SamplePath:
    """w_n = g_1 ... g_n with g_i i.i.d. from mu on substream (index, lane)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    d = mu.dim
    path = SamplePath(mu, rng.master_seed, index, lane,
                      products=[np.eye(d + 1)],
                      sl2=[np.eye(2)] if mu.has_sl2 else [],
                      sl2_exp=[0] if mu.has_sl2 else [],
                      _stream=rng.increments(mu, index, lane))
    return path.extend(n)


@dataclass(eq=False)
class BiInfinitePath:
    """
    Window [-n, n] of a bi-infinite path: w_k for k >= 0 from the forward
    walk under mu, w_{-k} from the backward walk under the reflected measure.
    """

    forward: SamplePath
    backward: SamplePath
    window: int

    def product(self, k: int) -> Isometry:
        if abs(k) > self.window:
            raise IndexError(f"k = {k} outside the window [-{self.window}, {self.window}]")
        return self.forward.product(k) if k >= 0 else self.backward.product(-k)

    def position(self, k: int, x: ModelPoint) -> ModelPoint:
        return apply(self.product(k), x)

    def shifted_product(self, k: int, j: int) -> Isometry:
        """The j-th product of sigma^k(omega), i.e. w_k^-1 w_{k+j}."""
        return self.product(k).inverse() @ self.product(k + j)


def sample_bi_infinite(mu: GroupDistribution, n: int, rng: RngSpec, index: int) -> BiInfinitePath:
    if n < 1:
        raise ValueError("n must be >= 1")
    fwd = sample_path(mu, n, rng, index, FORWARD)
    bwd = sample_path(reflect(mu), n, rng, index, BACKWARD)
    return BiInfinitePath(fwd, bwd, n)


def step_lengths(mu: GroupDistribution, x: ModelPoint) -> np.ndarray:
    """d(x, g x) for each atom."""
    return np.array([distance(x, apply(a.g, x)) for a in mu.atoms])


def step_moment(mu: GroupDistribution, x: ModelPoint) -> float:
    """First moment sum mu(g) d(x, g x)."""
    return math.fsum(a.weight * l for a, l in zip(mu.atoms, step_lengths(mu, x)))
