"""Invariant measures with exact cylinder probabilities, and seeded samplers.

Haar measure on an algebraic subshift is handled through *functionals*: a
matrix ``F`` with one row per site such that, for a uniformly random vector
``c`` of free coordinates, ``F @ c (mod q)`` has the law of the configuration
on those sites.  The marginal on a shape is then uniform on the column space
of ``F``, so its size is ``q**rank(F)``.

When the constraint can be solved for a single top site (the three-dot
relation and linear second-order CAs), the free coordinates are a block of
base rows and ``F`` is built by propagating rows upward.  Otherwise ``F`` is
the kernel of all constraint translates inside the shape's bounding box.

All randomness goes through :func:`rng`, a Philox counter-based generator
keyed by ``(seed, stream)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from . import gf
from .errors import MarginTooSmall, UnsupportedShape
from .lattice import ShapeSet
from .systems import ConfigWindow, PatternWindow, SystemKind, SystemSpec, spacetime_window

__all__ = [
    "rng",
    "Rect",
    "MeasureKind",
    "MeasureModel",
    "RankCertificate",
    "haar_functionals",
    "projection_count",
    "pattern_prob",
    "pattern_probs",
    "cylinder_prob",
    "sample_config",
    "check_invariance",
]

_MASK64 = (1 << 64) - 1


def rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream); independent of call order."""
    key = (int(seed) & _MASK64) | ((int(stream) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


class Rect(NamedTuple):
    m0: int
    n0: int
    width: int
    height: int


class MeasureKind(str, Enum):
    BERNOULLI = "bernoulli"
    ROW_MARKOV = "row_markov"
    HAAR = "haar"
    EMPIRICAL = "empirical"


def _normalise(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0):
        raise ValueError("probability vector must be 1-D and nonnegative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities sum to %r, not 1" % p.sum())
    return p / p.sum()


@dataclass(frozen=True, eq=False)
class MeasureModel:
    kind: MeasureKind
    q: int
    probs: np.ndarray | None = field(default=None, repr=False)
    transition: np.ndarray | None = field(default=None, repr=False)
    stationary: np.ndarray | None = field(default=None, repr=False)
    system: SystemSpec | None = None
    samples: tuple[ConfigWindow, ...] = field(default=(), repr=False)

    @classmethod
    def bernoulli(cls, p) -> "MeasureModel":
        p = _normalise(p)
        return cls(MeasureKind.BERNOULLI, p.size, probs=p)

    @classmethod
    def uniform(cls, q: int = 2) -> "MeasureModel":
        return cls.bernoulli(np.full(q, 1.0 / q))

    @classmethod
    def point_mass(cls, q: int = 2, symbol: int = 0) -> "MeasureModel":
        p = np.zeros(q)
        p[symbol] = 1.0
        return cls.bernoulli(p)

    @classmethod
    def row_markov(cls, transition) -> "MeasureModel":
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("transition matrix must be square")
        P = np.vstack([_normalise(row) for row in P])
        vals, vecs = np.linalg.eig(P.T)
        k = int(np.argmin(np.abs(vals - 1.0)))
        pi = np.real(vecs[:, k])
        pi = pi / pi.sum()
        if np.any(pi < -1e-12) or np.max(np.abs(pi @ P - pi)) > 1e-10:
            raise ValueError("could not find a stationary vector")
        return cls(MeasureKind.ROW_MARKOV, P.shape[0], transition=P, stationary=np.clip(pi, 0, None))

    @classmethod
    def haar(cls, spec: SystemSpec) -> "MeasureModel":
        if spec.linear_constraint() is None and spec.kind is not SystemKind.FULL_SHIFT:
            raise ValueError("Haar measure needs a linear (algebraic) system")
        return cls(MeasureKind.HAAR, spec.q, system=spec)

    @classmethod
    def empirical(cls, samples: Sequence[ConfigWindow]) -> "MeasureModel":
        samples = tuple(samples)
        if not samples:
            raise ValueError("empirical measure needs samples")
        return cls(MeasureKind.EMPIRICAL, samples[0].q, samples=samples)

    @property
    def is_point_mass(self) -> bool:
        return self.kind is MeasureKind.BERNOULLI and float(self.probs.max()) == 1.0

    @property
    def is_uniform_bernoulli(self) -> bool:
        return self.kind is MeasureKind.BERNOULLI and np.allclose(self.probs, 1.0 / self.q, rtol=0, atol=1e-15)

    @property
    def is_linear_uniform(self) -> bool:
        """Uniform on a GF(q) group: Haar, or the uniform Bernoulli measure (q prime)."""
        if self.kind is MeasureKind.HAAR:
            return True
        return self.is_uniform_bernoulli and gf.is_prime(self.q)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "q": self.q}
        if self.kind is MeasureKind.BERNOULLI:
            d["p"] = self.probs.tolist()
        elif self.kind is MeasureKind.ROW_MARKOV:
            d["transition"] = self.transition.tolist()
        elif self.kind is MeasureKind.HAAR:
            d["system"] = self.system.to_dict()
        else:
            d["n_samples"] = len(self.samples)
        return d

    @classmethod
    def from_dict(cls, d: dict, system: SystemSpec | None = None) -> "MeasureModel":
        kind = MeasureKind(d["kind"])
        if kind is MeasureKind.BERNOULLI:
            return cls.bernoulli(d["p"])
        if kind is MeasureKind.ROW_MARKOV:
            return cls.row_markov(d["transition"])
        if kind is MeasureKind.HAAR:
            spec = SystemSpec.from_dict(d["system"]) if "system" in d else system
            if spec is None:
                raise ValueError("Haar measure needs a system")
            return cls.haar(spec)
        if "samples" in d:
            return cls.empirical([ConfigWindow.from_json(s) for s in d["samples"]])
        raise ValueError("empirical measures must carry their samples")


@dataclass(frozen=True)
class RankCertificate:
    shape: ShapeSet
    free_dim: int
    constraint_rows: int
    q: int
    raw_free_dim: int
    method: str

    @property
    def count(self) -> int:
        return self.q**self.free_dim


def _constraint_rows(cons, shape: ShapeSet, index: dict) -> list[np.ndarray]:
    """Coefficient rows (over ``index`` coordinates) of constraint translates inside the site set."""
    (s0, _) = cons[0]
    rows = []
    seen = set()
    for site in index:
        v = (site[0] - s0[0], site[1] - s0[1])
        if v in seen:
            continue
        seen.add(v)
        cols = []
        for s, c in cons:
            t = (s[0] + v[0], s[1] + v[1])
            k = index.get(t)
            if k is None:
                break
            cols.append((k, c))
        else:
            row = np.zeros(len(index), dtype=np.int64)
            for k, c in cols:
                row[k] = c
            rows.append(row)
    return rows


def _row_ranges(prop, a: int, c: int, n_lo: int, n_hi: int) -> dict[int, list[int]]:
    h = prop.height
    ranges = {n: [a, c] for n in range(n_lo, n_hi + 1)}
    offs = prop.offsets()
    for n in range(n_hi, n_lo + h - 1, -1):
        lo, hi = ranges[n]
        for dm, dn, _ in offs:
            r = ranges[n + dn]
            r[0] = min(r[0], lo + dm)
            r[1] = max(r[1], hi + dm)
    return ranges


def _propagate(prop, q: int, ranges: dict, base: dict, n_lo: int, n_hi: int) -> dict:
    """Fill rows ``n_lo + height .. n_hi`` from the supplied base rows.

    Each row is an array whose first axis runs over its column range; any
    trailing axes (functional coordinates) are carried along.
    """
    rows = dict(base)
    offs = prop.offsets()
    for n in range(n_lo + prop.height, n_hi + 1):
        lo, hi = ranges[n]
        acc = None
        for dm, dn, w in offs:
            src = rows[n + dn]
            s_lo = ranges[n + dn][0]
            piece = src[lo + dm - s_lo : hi + dm - s_lo + 1]
            term = w * piece
            acc = term if acc is None else acc + term
        rows[n] = acc % q
    return rows


def _propagation_functionals(spec: SystemSpec, shape: ShapeSet) -> np.ndarray:
    prop = spec.propagator
    q = spec.q
    a, n_lo, c, n_hi = shape.bbox()
    h = prop.height
    ranges = _row_ranges(prop, a, c, n_lo, max(n_hi, n_lo + h - 1))
    base_rows = [n for n in range(n_lo, n_lo + h)]
    widths = [ranges[n][1] - ranges[n][0] + 1 for n in base_rows]
    L = sum(widths)
    dtype = np.int16 if q < 64 else np.int64
    base = {}
    start = 0
    for n, w in zip(base_rows, widths):
        arr = np.zeros((w, L), dtype=dtype)
        arr[np.arange(w), start + np.arange(w)] = 1
        base[n] = arr
        start += w
    rows = _propagate(prop, q, ranges, base, n_lo, n_hi)
    arr = shape.array
    out = np.empty((len(shape), L), dtype=np.int64)
    for k, (m, n) in enumerate(arr.tolist()):
        out[k] = rows[n][m - ranges[n][0]]
    return out


def _box_functionals(spec: SystemSpec, shape: ShapeSet) -> np.ndarray:
    a, b, c, d = shape.bbox()
    sites = [(m, n) for m in range(a, c + 1) for n in range(b, d + 1)]
    index = {s: k for k, s in enumerate(sites)}
    rows = _constraint_rows(spec.linear_constraint(), shape, index)
    A = np.array(rows, dtype=np.int64).reshape(-1, len(sites))
    K = gf.nullspace(A, spec.q, ncols=len(sites))  # (dim, nvars)
    cols = [index[s] for s in shape.sites]
    return K[:, cols].T.copy()


@lru_cache(maxsize=256)
def _functionals_cached(spec: SystemSpec, shape: ShapeSet, method: str) -> np.ndarray:
    if spec.kind is SystemKind.FULL_SHIFT:
        F = np.eye(len(shape), dtype=np.int64)
    elif method == "propagation":
        F = _propagation_functionals(spec, shape)
    else:
        F = _box_functionals(spec, shape)
    F.setflags(write=False)
    return F


def haar_functionals(spec: SystemSpec, shape: ShapeSet, method: str = "auto") -> np.ndarray:
    """Functional matrix (one row per site of ``shape``) of the Haar marginal."""
    if len(shape) == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if spec.kind is not SystemKind.FULL_SHIFT and spec.linear_constraint() is None:
        raise ValueError("system has no linear presentation")
    if method == "auto":
        method = "propagation" if spec.propagator is not None else "box"
    if method == "propagation" and spec.propagator is None:
        raise ValueError("constraint cannot be solved for a single top site")
    return _functionals_cached(spec, shape, method)


def _space_rank(rows, q: int) -> int:
    space = gf.RowSpace(q)
    for r in rows:
        space.add(r)
    return space.rank


def projection_count(spec: SystemSpec, shape: ShapeSet, method: str = "auto") -> RankCertificate:
    """Dimension of the set of patterns on ``shape`` seen under Haar measure.

    ``raw_free_dim`` counts patterns that merely satisfy constraints inside the
    shape; ``free_dim`` is the extension-corrected dimension (patterns of
    configurations valid on the whole bounding box, or globally when the
    constraint propagates row by row).
    """
    q = spec.q
    k = len(shape)
    if k == 0:
        return RankCertificate(shape, 0, 0, q, 0, "empty")
    if spec.kind is SystemKind.FULL_SHIFT:
        return RankCertificate(shape, k, 0, q, k, "full")
    cons = spec.linear_constraint()
    index = {s: i for i, s in enumerate(shape.sites)}
    inner = _constraint_rows(cons, shape, index)
    raw = k - _space_rank(inner, q)
    if method == "auto":
        method = "propagation" if spec.propagator is not None else "box"
    if method == "propagation":
        free = _space_rank(haar_functionals(spec, shape, "propagation"), q)
    elif method == "box":
        a, b, c, d = shape.bbox()
        box_sites = [(m, n) for m in range(a, c + 1) for n in range(b, d + 1)]
        box_index = {s: i for i, s in enumerate(box_sites)}
        A = _constraint_rows(cons, shape, box_index)
        space = gf.RowSpace(q)
        for r in A:
            space.add(r)
        base_rank = space.rank
        for s in shape.sites:
            e = np.zeros(len(box_sites), dtype=np.int64)
            e[box_index[s]] = 1
            space.add(e)
        free = space.rank - base_rank
    else:
        raise ValueError("unknown method %r" % method)
    return RankCertificate(shape, free, len(inner), q, raw, method)


def _row_runs(shape: ShapeSet) -> list[list[int]]:
    """Site indices grouped by row; each row must be a contiguous run of columns."""
    rows: dict[int, list[int]] = {}
    for k, (m, n) in enumerate(shape.sites):
        rows.setdefault(n, []).append(k)
    runs = []
    for n, idx in rows.items():
        ms = [shape.sites[k][0] for k in idx]
        if ms != list(range(ms[0], ms[0] + len(ms))):
            raise UnsupportedShape("row %d of the shape has a gap; row-Markov marginal not exact" % n)
        runs.append(idx)
    return runs


def _empirical_counts(samples, shape: ShapeSet) -> dict:
    counts: dict[tuple, int] = {}
    a, b, c, d = shape.bbox()
    arr = shape.array
    for x in samples:
        m0, n0, m1, n1 = x.rect
        for dm in range(m0 - a, m1 - c + 1):
            for dn in range(n0 - b, n1 - d + 1):
                key = tuple(x.data[arr[:, 0] + dm - m0, arr[:, 1] + dn - n0].tolist())
                counts[key] = counts.get(key, 0) + 1
    return counts


def pattern_probs(m: MeasureModel, shape: ShapeSet, patterns) -> np.ndarray:
    """Probabilities of many patterns (rows of ``patterns``) on one shape."""
    P = np.atleast_2d(np.asarray(patterns, dtype=np.int64))
    if len(shape) == 0:
        return np.ones(P.shape[0])
    if m.kind is MeasureKind.BERNOULLI:
        return np.prod(m.probs[P], axis=1)
    if m.kind is MeasureKind.ROW_MARKOV:
        out = np.ones(P.shape[0])
        for idx in _row_runs(shape):
            out *= m.stationary[P[:, idx[0]]]
            for k0, k1 in zip(idx[:-1], idx[1:]):
                out *= m.transition[P[:, k0], P[:, k1]]
        return out
    if m.kind is MeasureKind.HAAR:
        F = haar_functionals(m.system, shape)
        r = _space_rank(F, m.q)
        rel = gf.nullspace(F.T, m.q) if F.shape[1] else np.eye(len(shape), dtype=np.int64)
        ok = np.all((P @ rel.T) % m.q == 0, axis=1) if rel.size else np.ones(P.shape[0], bool)
        return ok * float(m.q) ** (-r)
    counts = _empirical_counts(m.samples, shape)
    total = sum(counts.values())
    if total == 0:
        raise UnsupportedShape("shape does not fit in any sample")
    return np.array([counts.get(tuple(row), 0) / total for row in P.tolist()])


def pattern_prob(m: MeasureModel, p: PatternWindow) -> float:
    return float(pattern_probs(m, p.shape, [p.values])[0])


def cylinder_prob(m: MeasureModel, shape: ShapeSet, patterns) -> float:
    """Measure of a union of cylinders on one window (``patterns`` distinct)."""
    patterns = list(patterns)
    if not patterns:
        return 0.0
    return float(pattern_probs(m, shape, patterns).sum())


def _haar_window(spec: SystemSpec, rect: Rect, gen: np.random.Generator, base_width: int | None) -> np.ndarray:
    q = spec.q
    prop = spec.propagator
    m0, n0, W, H = rect
    if prop is None:
        # uniform element of the locally valid rectangle patterns
        shape = ShapeSet(tuple((m0 + i, n0 + j) for i in range(W) for j in range(H)))
        F = _box_functionals(spec, shape)
        coeffs = gen.integers(0, q, size=F.shape[1])
        return ((F @ coeffs) % q).reshape(W, H)
    h = prop.height
    ranges = _row_ranges(prop, m0, m0 + W - 1, n0, max(n0 + H - 1, n0 + h - 1))
    needed = max(ranges[n][1] - ranges[n][0] + 1 for n in range(n0, n0 + h))
    if base_width is not None and base_width < needed:
        raise MarginTooSmall("base rows need width %d, got %d" % (needed, base_width))
    base = {}
    for n in range(n0, n0 + h):
        lo, hi = ranges[n]
        base[n] = gen.integers(0, q, size=hi - lo + 1)
    rows = _propagate(prop, q, ranges, base, n0, n0 + H - 1)
    out = np.empty((W, H), dtype=np.int64)
    for j in range(H):
        n = n0 + j
        lo = ranges[n][0]
        out[:, j] = rows[n][m0 - lo : m0 - lo + W]
    return out


def _iid_rows(m: MeasureModel, width: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` independent rows of length ``width`` under a row law; shape (width, count)."""
    if m.kind is MeasureKind.BERNOULLI:
        return gen.choice(m.q, size=(width, count), p=m.probs)
    if m.kind is MeasureKind.ROW_MARKOV:
        out = np.empty((width, count), dtype=np.int64)
        cum = np.cumsum(m.transition, axis=1)
        out[0] = np.searchsorted(np.cumsum(m.stationary), gen.random(count), side="right")
        for i in range(1, width):
            u = gen.random(count)
            out[i] = (u[:, None] >= cum[out[i - 1]]).sum(axis=1)
        return np.minimum(out, m.q - 1)
    raise ValueError("%s measures have no row law" % m.kind.value)


def sample_config(
    m: MeasureModel,
    rect: Rect | tuple,
    seed: int,
    spec: SystemSpec | None = None,
    stream: int = 0,
    base_width: int | None = None,
) -> ConfigWindow:
    """Draw a configuration window; identical arguments give identical output.

    ``spec`` selects the system when the measure does not carry one: for a
    second-order CA the measure's row law seeds the two initial rows and the
    window is the resulting space-time diagram.
    """
    rect = Rect(*rect)
    if rect.width <= 0 or rect.height <= 0:
        raise ValueError("rectangle must be nonempty")
    gen = rng(seed, stream)
    if m.kind is MeasureKind.HAAR:
        data = _haar_window(m.system, rect, gen, base_width)
        return ConfigWindow((rect.m0, rect.n0), data, m.q)
    if m.kind is MeasureKind.EMPIRICAL:
        fits = [x for x in m.samples if x.width >= rect.width and x.height >= rect.height]
        if not fits:
            raise MarginTooSmall("no stored sample is large enough")
        x = fits[int(gen.integers(len(fits)))]
        dm = int(gen.integers(x.width - rect.width + 1))
        dn = int(gen.integers(x.height - rect.height + 1))
        return ConfigWindow((rect.m0, rect.n0), x.data[dm : dm + rect.width, dn : dn + rect.height], m.q)
    if spec is not None and spec.kind is SystemKind.SECOND_ORDER_CA:
        r = spec.ca_rule.radius
        L = rect.width + 2 * r * max(rect.height - 2, 0)
        if base_width is not None and base_width < L:
            raise MarginTooSmall("initial rows need width %d, got %d" % (L, base_width))
        rows = _iid_rows(m, L, 2, gen)
        win = spacetime_window(spec, rows[:, 0], rows[:, 1], rect.height, start=rect.m0 - r * max(rect.height - 2, 0), n0=rect.n0)
        return win
    if spec is not None and spec.kind is SystemKind.ALGEBRAIC:
        raise ValueError("use MeasureModel.haar for algebraic subshifts")
    data = _iid_rows(m, rect.width, rect.height, gen)
    return ConfigWindow((rect.m0, rect.n0), data, m.q)


def check_invariance(m: MeasureModel, spec: SystemSpec, seed: int = 0, n_samples: int = 2000, z: float = 5.0) -> bool:
    """Statistical check that single-site frequencies do not drift along the vertical generator.

    Compares symbol frequencies in the first and last rows of sampled windows;
    warns and returns False when they differ by more than ``z`` standard errors.
    """
    height = 6
    first = np.zeros(m.q)
    last = np.zeros(m.q)
    for s in range(n_samples):
        x = sample_config(m, Rect(0, 0, 4, height), seed, spec=spec, stream=s)
        first += np.bincount(x.data[:, 0], minlength=m.q)
        last += np.bincount(x.data[:, -1], minlength=m.q)
    n = first.sum()
    pf, pl = first / n, last / n
    se = np.sqrt((pf * (1 - pf) + pl * (1 - pl)) / n) + 1e-12
    ok = bool(np.all(np.abs(pf - pl) <= z * se))
    if not ok:
        warnings.warn("measure does not look invariant under the vertical generator of this system", stacklevel=2)
    return ok
