"""Block entropy of joined partitions, directional entropy rates and the Pinsker proxy.

A partition is described by an observation window ``W`` and an optional
coarsening of the patterns on ``W``.  The join over a shape ``S`` is the
partition by the labels of ``x|s+W`` for every ``s`` in ``S``; it lives on the
Minkowski sum ``S + W``.

Exact paths, tried in order:

``zero``      point masses and trivial partitions
``product``   Bernoulli measures with a full-resolution window, or a single-site window
``rank``      uniform GF(q) measures with a linear (or full-resolution) partition
``row-chain`` row-Markov measures with a full-resolution window on row-convex sums
``enum``      cylinder sums over every pattern of ``S + W`` (small supports only)

Entropies are in bits.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import gf
from .errors import InsufficientData, UnsupportedExact, UnsupportedShape
from .lattice import DirectionSpec, ShapeSet, StripParams, as_rational, strip
from .measures import MeasureKind, MeasureModel, haar_functionals, pattern_probs, _row_runs
from .systems import ConfigWindow, SystemKind, SystemSpec

__all__ = [
    "PartitionSpec",
    "EntropyCurve",
    "EntropyEstimate",
    "entropy_bits",
    "shape_entropy",
    "shape_entropy_empirical",
    "entropy_curve",
    "column_ladder",
    "fit_rate",
    "directional_entropy_rate",
    "rate_table",
    "pinsker_membership_proxy",
    "independence_lower_bound",
    "directional_rate_lower_bound",
    "strip_columns",
    "exact_method",
]

ENUM_LIMIT = 1 << 20

_ORIGIN = ShapeSet(((0, 0),))


def entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


@dataclass(frozen=True, eq=False)
class PartitionSpec:
    """Clopen partition by (possibly coarsened) cylinders on ``window``.

    ``labels`` maps pattern codes ``sum(v[k] * q**k)`` (k over the window's
    sorted sites) to cell labels.  ``functionals`` instead gives the cells as
    the values of a linear map over GF(q); each row has one coefficient per
    window site.
    """

    window: ShapeSet
    q: int = 2
    labels: np.ndarray | None = field(default=None, repr=False)
    functionals: tuple[tuple[int, ...], ...] | None = None
    name: str = ""

    def __post_init__(self):
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (self.q ** len(self.window),):
                raise ValueError("coarsening must label all %d patterns" % self.q ** len(self.window))
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)
        if self.functionals is not None:
            rows = tuple(tuple(int(c) % self.q for c in r) for r in self.functionals)
            if any(len(r) != len(self.window) for r in rows):
                raise ValueError("functional rows need one coefficient per window site")
            object.__setattr__(self, "functionals", rows)

    @classmethod
    def zero_coordinate(cls, q: int = 2) -> "PartitionSpec":
        return cls(_ORIGIN, q, name="zero_coordinate")

    @classmethod
    def on_window(cls, window: ShapeSet, q: int = 2) -> "PartitionSpec":
        return cls(window, q, name="window")

    @classmethod
    def trivial(cls, q: int = 2) -> "PartitionSpec":
        return cls(ShapeSet(()), q, functionals=(), name="trivial")

    @classmethod
    def linear(cls, window: ShapeSet, rows, q: int = 2, name: str = "") -> "PartitionSpec":
        return cls(window, q, functionals=tuple(tuple(r) for r in rows), name=name or "linear")

    @classmethod
    def parity(cls, sites, q: int = 2) -> "PartitionSpec":
        """Two cells by the sum of the listed sites (mod q cells in general)."""
        w = ShapeSet(tuple(sites))
        return cls.linear(w, [[1] * len(w)], q, name="+".join("x%d%d" % s for s in w.sites))

    @classmethod
    def two_cell(cls, window: ShapeSet, patterns, q: int = 2, name: str = "") -> "PartitionSpec":
        """Partition {A, A^c} with A the union of cylinders on ``window`` given by ``patterns``."""
        lab = np.zeros(q ** len(window), dtype=np.int64)
        pw = q ** np.arange(len(window))
        for p in patterns:
            lab[int(np.dot(p, pw))] = 1
        return cls(window, q, labels=lab, name=name or "two_cell")

    @classmethod
    def from_cells(cls, window: ShapeSet, cells: Sequence[Iterable], q: int = 2, name: str = "") -> "PartitionSpec":
        """Partition whose cells are the given disjoint, exhaustive sets of window patterns."""
        lab = np.full(q ** len(window), -1, dtype=np.int64)
        pw = q ** np.arange(len(window))
        for k, cell in enumerate(cells):
            for p in cell:
                code = int(np.dot(p, pw))
                if lab[code] >= 0:
                    raise ValueError("cells overlap")
                lab[code] = k
        if np.any(lab < 0):
            raise ValueError("cells do not cover every pattern")
        return cls(window, q, labels=lab, name=name or "cells")

    @property
    def is_full(self) -> bool:
        return self.labels is None and self.functionals is None

    @property
    def is_linear(self) -> bool:
        return self.functionals is not None or self.labels is None

    @property
    def is_trivial(self) -> bool:
        if len(self.window) == 0:
            return True
        if self.functionals is not None:
            return not any(any(r) for r in self.functionals)
        if self.labels is not None:
            return np.unique(self.labels).size == 1
        return False

    def functional_matrix(self) -> np.ndarray:
        if self.functionals is not None:
            k = len(self.window)
            return np.array(self.functionals, dtype=np.int64).reshape(len(self.functionals), k)
        if self.labels is None:
            return np.eye(len(self.window), dtype=np.int64)
        raise ValueError("partition is not linear")

    def label_array(self) -> np.ndarray:
        if self.labels is not None:
            return self.labels
        k = len(self.window)
        if self.q**k > ENUM_LIMIT:
            raise UnsupportedExact("window too large to tabulate")
        codes = np.arange(self.q**k)
        digits = (codes[:, None] // self.q ** np.arange(k)) % self.q
        if self.functionals is None:
            return codes
        F = self.functional_matrix()
        vals = (digits @ F.T) % self.q
        return vals @ (self.q ** np.arange(F.shape[0]))

    def cell_count(self) -> int:
        return int(np.unique(self.label_array()).size)

    def lift(self, layers: int) -> "PartitionSpec":
        """Join with its vertical translates by (0,1), ..., (0,layers-1)."""
        if layers == 1:
            return self
        if not self.is_linear:
            raise ValueError("only linear partitions can be lifted")
        F = self.functional_matrix()
        win = self.window
        for j in range(1, layers):
            win = win.union(self.window.translate((0, j)))
        rows = []
        for j in range(layers):
            for r in F:
                row = np.zeros(len(win), dtype=np.int64)
                for k, s in enumerate(self.window.sites):
                    row[win.index((s[0], s[1] + j))] = r[k]
                rows.append(row.tolist())
        return PartitionSpec.linear(win, rows, self.q, name="%s*%d" % (self.name, layers))

    def to_dict(self) -> dict:
        d = {"name": self.name, "q": self.q, "window": self.window.to_json()}
        if self.functionals is not None:
            d["functionals"] = [list(r) for r in self.functionals]
        if self.labels is not None:
            d["labels"] = self.labels.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionSpec":
        name = d.get("name", "")
        q = int(d.get("q", 2))
        if name == "zero_coordinate" and "window" not in d:
            return cls.zero_coordinate(q)
        if name == "trivial" and "window" not in d:
            return cls.trivial(q)
        if "parity" in d:
            return cls.parity([tuple(s) for s in d["parity"]], q)
        window = ShapeSet.from_json(d.get("window", [[0, 0]]))
        funcs = d.get("functionals")
        labels = d.get("labels")
        return cls(window, q, labels=None if labels is None else np.asarray(labels),
                   functionals=None if funcs is None else tuple(tuple(r) for r in funcs), name=name)


@dataclass(frozen=True)
class EntropyCurve:
    points: tuple[tuple[int, float], ...]
    b: Fraction
    partition: str
    method: str

    def __post_init__(self):
        ns = [n for n, _ in self.points]
        if any(n1 >= n2 for n1, n2 in zip(ns, ns[1:])):
            raise ValueError("N must be strictly increasing")

    @property
    def Ns(self) -> np.ndarray:
        return np.array([n for n, _ in self.points])

    @property
    def H(self) -> np.ndarray:
        return np.array([h for _, h in self.points])

    def to_dict(self) -> dict:
        return {
            "b": str(self.b),
            "partition": self.partition,
            "method": self.method,
            "unit": "bits",
            "points": [[n, h] for n, h in self.points],
        }


@dataclass(frozen=True)
class EntropyEstimate:
    rate: float
    fit_window: tuple[int, int]
    slope_se: float
    curve: EntropyCurve

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "unit": "bits/col",
            "fit_window": list(self.fit_window),
            "slope_se": self.slope_se,
            "curve": self.curve.to_dict(),
        }


def _law_check(m: MeasureModel, spec: SystemSpec | None) -> None:
    if m.kind is MeasureKind.HAAR:
        if spec is not None and spec != m.system and spec.kind is not SystemKind.FULL_SHIFT:
            raise ValueError("Haar measure belongs to a different system")
        return
    if spec is not None and spec.kind is not SystemKind.FULL_SHIFT and m.kind is not MeasureKind.EMPIRICAL:
        if not m.is_point_mass:
            raise UnsupportedExact("%s measure has no exact law on a %s system" % (m.kind.value, spec.kind.value))


def _rank_system(m: MeasureModel) -> SystemSpec | None:
    """The GF(q) group carrying a uniform measure, or None."""
    if m.kind is MeasureKind.HAAR:
        return m.system
    if m.is_uniform_bernoulli and gf.is_prime(m.q):
        return SystemSpec.full_shift(m.q)
    return None


class _JoinedRows:
    """Functionals of a joined linear partition, grouped by strip column."""

    def __init__(self, system: SystemSpec, part: PartitionSpec, union: ShapeSet):
        self.q = system.q
        self.F = haar_functionals(system, union)
        self.index = {s: k for k, s in enumerate(union.sites)}
        self.R = part.functional_matrix() % self.q
        self.wsites = part.window.sites
        if self.q == 2:
            self.packed = [gf.pack_bits(row) for row in self.F]

    def rows(self, site):
        idx = [self.index[(site[0] + w[0], site[1] + w[1])] for w in self.wsites]
        if self.q == 2:
            out = []
            for r in self.R:
                acc = 0
                for k in np.flatnonzero(r):
                    acc ^= self.packed[idx[k]]
                out.append(acc)
            return out
        return list((self.R @ self.F[idx]) % self.q)


def _shape_rank(system: SystemSpec, part: PartitionSpec, shape: ShapeSet) -> int:
    union = shape.minkowski(part.window)
    if system.kind is SystemKind.FULL_SHIFT and part.is_full:
        return len(union)
    jr = _JoinedRows(system, part, union)
    space = gf.RowSpace(system.q)
    for s in shape.sites:
        for row in jr.rows(s):
            space.add(row)
    return space.rank


def _enum_entropy(m: MeasureModel, shape: ShapeSet, part: PartitionSpec) -> float:
    union = shape.minkowski(part.window)
    q = m.q
    if m.kind is MeasureKind.HAAR:
        F = haar_functionals(m.system, union)
        R, piv = gf.rref(F.T, q) if F.size else (np.zeros((0, len(union)), np.int64), [])
        basis = R[: len(piv)]
        r = basis.shape[0]
        if q**r > ENUM_LIMIT:
            raise UnsupportedExact("joined support too large to enumerate")
        coeffs = (np.arange(q**r)[:, None] // q ** np.arange(r)) % q
        P = (coeffs @ basis) % q
        probs = np.full(P.shape[0], float(q) ** -r)
    else:
        k = len(union)
        if q**k > ENUM_LIMIT:
            raise UnsupportedExact("joined support too large to enumerate")
        P = (np.arange(q**k)[:, None] // q ** np.arange(k)) % q
        probs = pattern_probs(m, union, P)
        keep = probs > 0
        P, probs = P[keep], probs[keep]
    labels = part.label_array()
    pw = q ** np.arange(len(part.window))
    index = {s: k for k, s in enumerate(union.sites)}
    keys = np.empty((P.shape[0], len(shape)), dtype=np.int64)
    for j, s in enumerate(shape.sites):
        idx = [index[(s[0] + w[0], s[1] + w[1])] for w in part.window.sites]
        keys[:, j] = labels[P[:, idx] @ pw]
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    return entropy_bits(np.bincount(inv.ravel(), weights=probs))


def exact_method(m: MeasureModel, spec: SystemSpec | None, part: PartitionSpec) -> str:
    """Name of the exact path shape_entropy would take (independent of the shape)."""
    _law_check(m, spec)
    if m.is_point_mass or part.is_trivial:
        return "zero"
    if m.kind is MeasureKind.EMPIRICAL:
        return "plugin"
    if m.kind is MeasureKind.BERNOULLI and (part.is_full or len(part.window) == 1):
        return "product"
    if part.is_linear and _rank_system(m) is not None:
        return "rank"
    if m.kind is MeasureKind.ROW_MARKOV and part.is_full:
        return "row-chain"
    return "enum"


def shape_entropy(
    m: MeasureModel,
    spec: SystemSpec | None,
    shape: ShapeSet,
    part: PartitionSpec,
    samples: Sequence[ConfigWindow] | None = None,
) -> float:
    """Entropy in bits of the join of ``part`` over the translates in ``shape``."""
    if len(shape) == 0:
        return 0.0
    method = exact_method(m, spec, part)
    if method == "zero":
        return 0.0
    if method == "product":
        if part.is_full:
            return len(shape.minkowski(part.window)) * entropy_bits(m.probs)
        cell = np.bincount(part.label_array(), weights=m.probs)
        return len(shape) * entropy_bits(cell)
    if method == "rank":
        system = _rank_system(m)
        return _shape_rank(system, part, shape) * math.log2(m.q)
    if method == "row-chain":
        union = shape.minkowski(part.window)
        pi, P = m.stationary, m.transition
        h_pi = entropy_bits(pi)
        h_cond = float(sum(pi[i] * entropy_bits(P[i]) for i in range(m.q)))
        return sum(h_pi + (len(run) - 1) * h_cond for run in _row_runs(union))
    if method == "plugin":
        return shape_entropy_empirical(m.samples, shape, part, translates=True)[0]
    try:
        return _enum_entropy(m, shape, part)
    except UnsupportedExact:
        if samples:
            return shape_entropy_empirical(samples, shape, part)[0]
        raise


def _observations(samples: Sequence[ConfigWindow], shape: ShapeSet, part: PartitionSpec, translates: bool) -> np.ndarray:
    union = shape.minkowski(part.window)
    q = part.q
    labels = part.label_array() if not part.is_full else None
    pw = q ** np.arange(len(part.window))
    a, b, c, d = union.bbox()
    obs = []
    for x in samples:
        m0, n0, m1, n1 = x.rect
        if translates:
            offsets = [(dm, dn) for dm in range(m0 - a, m1 - c + 1) for dn in range(n0 - b, n1 - d + 1)]
        else:
            offsets = [(0, 0)] if x.covers(union) else []
        for off in offsets:
            if labels is None:
                obs.append(x.values(union, off))
            else:
                row = [labels[int(x.values(part.window, (s[0] + off[0], s[1] + off[1])) @ pw)] for s in shape.sites]
                obs.append(np.asarray(row))
    if not obs:
        raise InsufficientData("no sample window contains the joined support")
    return np.vstack(obs)


def shape_entropy_empirical(
    samples: Sequence[ConfigWindow],
    shape: ShapeSet,
    part: PartitionSpec,
    correction: str = "none",
    translates: bool = False,
) -> tuple[float, float]:
    """Plug-in entropy (bits) of the joined pattern with a delete-one jackknife standard error.

    Each sample contributes the pattern at its anchored position, or every
    fitting translate when ``translates`` is set.
    """
    if correction not in ("none", "miller-madow"):
        raise ValueError("correction must be 'none' or 'miller-madow'")
    if len(shape) == 0:
        return 0.0, 0.0
    obs = _observations(samples, shape, part, translates)
    n = obs.shape[0]
    if n < 2:
        raise InsufficientData("need at least two observations")
    _, inv = np.unique(obs, axis=0, return_inverse=True)
    counts = np.bincount(inv.ravel()).astype(float)
    K = counts.size

    def plug(c, total):
        c = c[c > 0]
        return float(np.log2(total) - (c * np.log2(c)).sum() / total)

    def corr(k, total):
        return (k - 1) / (2 * total * math.log(2)) if correction == "miller-madow" else 0.0

    H = plug(counts, n) + corr(K, n)
    # leave-one-out value depends only on the left-out observation's class
    loo = np.empty(K)
    for k in range(K):
        c = counts.copy()
        c[k] -= 1
        loo[k] = plug(c, n - 1) + corr(K - (c[k] == 0), n - 1)
    mean = float((counts * loo).sum() / n)
    var = (n - 1) / n * float((counts * (loo - mean) ** 2).sum())
    return H + 0.0, math.sqrt(max(var, 0.0))


def column_ladder(N_max: int, N_min: int = 1) -> list[int]:
    """Every integer in [N_max/2, N_max] plus a doubling ladder below it."""
    if N_max < 1:
        raise ValueError("N_max must be positive")
    lo = max(N_min, (N_max + 1) // 2)
    below = []
    n = max(N_min, 1)
    while n < lo:
        below.append(n)
        n *= 2
    return below + list(range(lo, N_max + 1))


def entropy_curve(
    m: MeasureModel,
    spec: SystemSpec | None,
    part: PartitionSpec,
    columns: Sequence[Sequence[tuple[int, int]]],
    Ns: Sequence[int],
    b=0,
    threads: int = 1,
) -> EntropyCurve:
    """H_N for the shapes formed by the first N column groups, N in ``Ns``."""
    Ns = sorted(set(int(n) for n in Ns))
    if Ns and Ns[-1] > len(columns):
        raise ValueError("ladder exceeds the supplied columns")
    method = exact_method(m, spec, part)
    if method == "rank":
        system = _rank_system(m)
        full = ShapeSet(tuple(s for col in columns[: Ns[-1]] for s in col))
        union = full.minkowski(part.window)
        want = set(Ns)
        out = []
        if system.kind is SystemKind.FULL_SHIFT and part.is_full:
            seen: set = set()
            for i, col in enumerate(columns[: Ns[-1]], start=1):
                for s in col:
                    seen.update((s[0] + w[0], s[1] + w[1]) for w in part.window.sites)
                if i in want:
                    out.append((i, float(len(seen) * math.log2(m.q))))
        else:
            jr = _JoinedRows(system, part, union)
            space = gf.RowSpace(system.q)
            for i, col in enumerate(columns[: Ns[-1]], start=1):
                for s in col:
                    for row in jr.rows(s):
                        space.add(row)
                if i in want:
                    out.append((i, space.rank * math.log2(m.q)))
        return EntropyCurve(tuple(out), as_rational(b), part.name, "exact-rank")

    def one(n):
        shape = ShapeSet(tuple(s for col in columns[:n] for s in col))
        return shape_entropy(m, spec, shape, part)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            H = list(ex.map(one, Ns))
    else:
        H = [one(n) for n in Ns]
    label = {"product": "exact-product", "zero": "exact-product", "plugin": "plugin"}.get(method, "exact-" + method)
    return EntropyCurve(tuple(zip(Ns, H)), as_rational(b), part.name, label)


def fit_rate(curve: EntropyCurve, window: tuple[int, int]) -> tuple[float, float]:
    """Least-squares slope of H_N against N over the window, with its standard error.

    The sums are exact rationals, so identical inputs give identical floats.
    """
    lo, hi = window
    pts = [(Fraction(n), Fraction(h)) for n, h in curve.points if lo <= n <= hi]
    k = len(pts)
    if k < 2:
        raise InsufficientData("fit window holds fewer than two points")
    mx = sum(n for n, _ in pts) / k
    my = sum(h for _, h in pts) / k
    sxx = sum((n - mx) ** 2 for n, _ in pts)
    sxy = sum((n - mx) * (h - my) for n, h in pts)
    slope = sxy / sxx
    if k == 2:
        return max(float(slope), 0.0), 0.0
    rss = sum((h - my - slope * (n - mx)) ** 2 for n, h in pts)
    se = math.sqrt(float(rss / (k - 2) / sxx))
    return max(float(slope), 0.0), se


def strip_columns(direction: DirectionSpec, b, N: int) -> list[list[tuple[int, int]]]:
    shape = strip(direction, StripParams(b, N))
    cols: list[list[tuple[int, int]]] = [[] for _ in range(N)]
    for s in shape.sites:
        cols[s[0]].append(s)
    return cols


def directional_entropy_rate(
    m: MeasureModel,
    spec: SystemSpec | None,
    part: PartitionSpec,
    direction: DirectionSpec,
    b,
    N_max: int,
    threads: int = 1,
    ladder: Sequence[int] | None = None,
) -> EntropyEstimate:
    """Tail slope of the strip entropy curve; a finite-scale proxy for the limsup rate at this b."""
    direction.check_index(N_max)
    b = as_rational(b)
    Ns = list(ladder) if ladder is not None else column_ladder(N_max)
    curve = entropy_curve(m, spec, part, strip_columns(direction, b, N_max), Ns, b, threads)
    window = ((N_max + 1) // 2, N_max)
    rate, se = fit_rate(curve, window)
    return EntropyEstimate(rate, window, se, curve)


def rate_table(m, spec, part, direction: DirectionSpec, b_ladder, N_max: int, threads: int = 1) -> list[EntropyEstimate]:
    """One estimate per b; the supremum over b is left to the reader."""
    return [directional_entropy_rate(m, spec, part, direction, b, N_max, threads) for b in b_ladder]


def pinsker_membership_proxy(
    m: MeasureModel,
    spec: SystemSpec | None,
    setA: PartitionSpec,
    direction: DirectionSpec,
    b,
    N_max: int,
    tol: float = 0.05,
) -> str:
    """'zero' when the two-cell partition's rate at this b is below ``tol`` bits/col, else 'positive'.

    One-sided and finite-scale: a 'zero' answer is evidence, not proof, that
    the set is directionally deterministic.
    """
    if setA.cell_count() > 2:
        raise ValueError("proxy takes a partition with at most two cells")
    try:
        est = directional_entropy_rate(m, spec, setA, direction, b, N_max)
        return "zero" if est.rate < tol else "positive"
    except UnsupportedExact:
        pass
    # bracket the rate: the full window partition refines setA, independent translates bound it below
    upper = directional_entropy_rate(m, spec, PartitionSpec.on_window(setA.window, setA.q), direction, b, N_max)
    if upper.rate < tol:
        return "zero"
    lower = directional_rate_lower_bound(m, spec, setA, direction, b, N_max)
    if lower.rate >= tol:
        return "positive"
    raise UnsupportedExact("rate bracket [%.4g, %.4g] straddles tol" % (lower.rate, upper.rate))


def _window_cells(m: MeasureModel, part: PartitionSpec) -> np.ndarray:
    """Cell probabilities of ``part`` under the window marginal of ``m``."""
    k = len(part.window)
    q = part.q
    P = (np.arange(q**k)[:, None] // q ** np.arange(k)) % q
    probs = pattern_probs(m, part.window, P)
    return np.bincount(part.label_array(), weights=probs)


def independence_lower_bound(
    m: MeasureModel,
    spec: SystemSpec | None,
    part: PartitionSpec,
    columns: Sequence[Sequence[tuple[int, int]]],
    Ns: Sequence[int],
    b=0,
) -> EntropyCurve:
    """Lower bound on H_N from a greedily chosen family of independent translates.

    A translate ``s + W`` is kept when its pattern is independent of every
    kept one: disjoint windows for Bernoulli measures, trivially intersecting
    functional spans for uniform GF(q) measures.  Each kept translate adds the
    entropy of the partition itself.
    """
    _law_check(m, spec)
    Ns = sorted(set(int(n) for n in Ns))
    h = entropy_bits(_window_cells(m, part)) if not (m.is_point_mass or part.is_trivial) else 0.0
    system = _rank_system(m) if m.kind is not MeasureKind.BERNOULLI or m.is_uniform_bernoulli else None
    if m.kind is not MeasureKind.BERNOULLI and system is None:
        raise UnsupportedExact("independence bound needs a Bernoulli or uniform GF(q) measure")
    want = set(Ns)
    out = []
    kept = 0
    if system is not None and system.kind is not SystemKind.FULL_SHIFT:
        full = ShapeSet(tuple(s for col in columns[: Ns[-1]] for s in col))
        jr = _JoinedRows(system, PartitionSpec.on_window(part.window, part.q), full.minkowski(part.window))
        w_rank = gf.rank(haar_functionals(system, part.window), system.q)
        space = gf.RowSpace(system.q)
        for i, col in enumerate(columns[: Ns[-1]], start=1):
            for s in col:
                trial = space.copy()
                for row in jr.rows(s):
                    trial.add(row)
                if trial.rank - space.rank == w_rank:
                    space = trial
                    kept += 1
            if i in want:
                out.append((i, kept * h))
    else:
        used: set = set()
        for i, col in enumerate(columns[: Ns[-1]], start=1):
            for s in col:
                sites = {(s[0] + w[0], s[1] + w[1]) for w in part.window.sites}
                if used.isdisjoint(sites):
                    used |= sites
                    kept += 1
            if i in want:
                out.append((i, kept * h))
    return EntropyCurve(tuple(out), as_rational(b), part.name, "lower-bound")


def directional_rate_lower_bound(
    m: MeasureModel,
    spec: SystemSpec | None,
    part: PartitionSpec,
    direction: DirectionSpec,
    b,
    N_max: int,
) -> EntropyEstimate:
    direction.check_index(N_max)
    b = as_rational(b)
    curve = independence_lower_bound(m, spec, part, strip_columns(direction, b, N_max), column_ladder(N_max), b)
    window = ((N_max + 1) // 2, N_max)
    rate, se = fit_rate(curve, window)
    return EntropyEstimate(rate, window, se, curve)
