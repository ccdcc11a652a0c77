"""Strip-averaged pair distances, asymptotic tuples and entropy-tuple certificates.

Distances use the box metric of :func:`direntropy.systems.config_distance`,
so every finite radius ``R`` has a truncation floor ``2**-(R+1)``: two
configurations that agree on the whole box are reported at the floor, never
at zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf
from .entropy import (
    PartitionSpec,
    directional_entropy_rate,
    directional_rate_lower_bound,
    exact_method,
)
from .errors import DeclarationMissing, InsufficientData, OutOfWindow, UnsupportedExact
from .lattice import DirectionSpec, ShapeSet, StripParams, as_rational, box, strip
from .measures import MeasureKind, MeasureModel, Rect, cylinder_prob, sample_config
from .systems import ConfigWindow, PatternWindow, SystemKind, SystemSpec, translated_distances, validate_window

__all__ = [
    "TupleObservation",
    "ChaosAverages",
    "TupleVerdict",
    "CylinderSet",
    "truncation_floor",
    "chaos_averages",
    "chaos_ladder",
    "mean_ly_verdict",
    "asymptotic_test",
    "lambda_n_product",
    "canonical_partition",
    "entropy_tuple_certify",
    "finite_difference",
    "density_probe",
]


def truncation_floor(R: int) -> float:
    return 2.0 ** -(R + 1)


@dataclass(frozen=True)
class TupleObservation:
    configs: tuple[ConfigWindow, ...]
    radius: int

    def __post_init__(self):
        object.__setattr__(self, "configs", tuple(self.configs))
        if len(self.configs) < 2:
            raise ValueError("a tuple needs at least two configurations")
        rects = {c.rect for c in self.configs}
        if len(rects) != 1:
            raise ValueError("configurations must share one rectangle")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def rect(self) -> tuple[int, int, int, int]:
        return self.configs[0].rect

    def pair_distances(self, sites: np.ndarray) -> np.ndarray:
        """Distances for every pair (rows) at every site (columns)."""
        pairs = itertools.combinations(range(len(self.configs)), 2)
        return np.vstack([translated_distances(self.configs[i], self.configs[j], sites, self.radius) for i, j in pairs])


@dataclass(frozen=True)
class ChaosAverages:
    N: int
    b: Fraction
    prox: float
    sep: float
    floor: float

    @property
    def near_zero(self) -> bool:
        return self.prox <= self.floor + 2.0**-16

    def to_dict(self) -> dict:
        return {"N": self.N, "b": str(self.b), "prox": self.prox, "sep": self.sep,
                "floor": self.floor, "near_zero": self.near_zero}


@dataclass(frozen=True)
class TupleVerdict:
    kind: str
    evidence: dict = field(default_factory=dict)

    KINDS = ("asymptotic", "mean-LY-candidate", "entropy-tuple-certified", "rejected", "inconclusive")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError("unknown verdict %r" % self.kind)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "evidence": self.evidence}


def _strip_sites(direction: DirectionSpec, b, N: int, reverse: bool) -> np.ndarray:
    arr = strip(direction, StripParams(b, N)).array
    if reverse:
        arr = -arr
    return arr


def chaos_averages(t: TupleObservation, direction: DirectionSpec, b, N: int, reverse: bool = False) -> ChaosAverages:
    """Strip averages of the largest and smallest pairwise distance.

    ``reverse`` walks the strip backwards, i.e. uses the inverse action.
    """
    b = as_rational(b)
    sites = _strip_sites(direction, b, N, reverse)
    D = t.pair_distances(sites)
    n = sites.shape[0]
    prox = float(np.sort(D.max(axis=0)).sum() / n)
    sep = float(np.sort(D.min(axis=0)).sum() / n)
    return ChaosAverages(N, b, prox, sep, truncation_floor(t.radius))


def chaos_ladder(t: TupleObservation, direction: DirectionSpec, b, Ns: Sequence[int], reverse: bool = False) -> list[ChaosAverages]:
    return [chaos_averages(t, direction, b, N, reverse) for N in Ns]


def mean_ly_verdict(ladder: Sequence[ChaosAverages], eta: float) -> TupleVerdict:
    """Mean Li-Yorke candidate if the ladder both touches the floor and stays separated somewhere."""
    if not ladder:
        raise InsufficientData("empty ladder")
    low = min(a.prox - a.floor for a in ladder)
    high = max(a.sep - a.floor for a in ladder)
    ev = {"min_prox_excess": low, "max_sep_excess": high, "eta": eta, "Ns": [a.N for a in ladder]}
    if low <= 2.0**-16 and high >= eta:
        return TupleVerdict("mean-LY-candidate", ev)
    return TupleVerdict("inconclusive", ev)


def asymptotic_test(
    t: TupleObservation,
    direction: DirectionSpec,
    K: int,
    eps: float,
    b=1,
    width: int | None = None,
    reverse: bool = False,
) -> bool:
    """All pairwise distances stay below ``eps`` at strip sites with first coordinate in [K, K+width].

    With ``width=None`` the widest range the windows allow is used.
    """
    R = t.radius
    if eps <= truncation_floor(R):
        raise ValueError("eps must exceed the truncation floor 2**-(R+1)")
    b = as_rational(b)
    m0, n0, m1, n1 = t.rect
    if reverse:
        limit = -(m0 + R) - K
    else:
        limit = m1 - R - K
    if width is None:
        width = limit
    if width < 0 or width > limit:
        raise OutOfWindow("windows do not reach columns %d..%d" % (K, K + max(width, 0)))
    sites = strip(direction, StripParams(b, K + width + 1)).array
    sites = sites[sites[:, 0] >= K]
    if reverse:
        sites = -sites
    D = t.pair_distances(sites)
    return bool(np.all(D < eps))


@dataclass(frozen=True)
class CylinderSet:
    """Union of cylinders: the patterns in ``patterns`` on ``window``."""

    window: ShapeSet
    patterns: frozenset
    q: int = 2

    @classmethod
    def of(cls, p: PatternWindow, q: int = 2) -> "CylinderSet":
        return cls(p.shape, frozenset([tuple(p.values)]), q)

    def expand(self, window: ShapeSet) -> "CylinderSet":
        """The same set written on a larger window."""
        if not self.window.issubset(window):
            raise ValueError("target window must contain this one")
        idx = [window.index(s) for s in self.window.sites]
        extra = len(window) - len(self.window)
        free = [k for k in range(len(window)) if k not in set(idx)]
        out = set()
        for p in self.patterns:
            for tail in itertools.product(range(self.q), repeat=extra):
                v = [0] * len(window)
                for k, val in zip(idx, p):
                    v[k] = val
                for k, val in zip(free, tail):
                    v[k] = val
                out.add(tuple(v))
        return CylinderSet(window, frozenset(out), self.q)

    def complement(self) -> "CylinderSet":
        allp = itertools.product(range(self.q), repeat=len(self.window))
        return CylinderSet(self.window, frozenset(p for p in allp if p not in self.patterns), self.q)

    def prob(self, m: MeasureModel) -> float:
        return cylinder_prob(m, self.window, sorted(self.patterns))

    def contains(self, x: ConfigWindow) -> bool:
        return tuple(x.values(self.window).tolist()) in self.patterns


def _as_cylinder(c, q: int) -> CylinderSet:
    return c if isinstance(c, CylinderSet) else CylinderSet.of(c, q)


def lambda_n_product(m: MeasureModel, cylinders: Sequence, trivial_pinsker: bool = False) -> float:
    """Product of the cylinder measures, valid only under a declared trivial directional Pinsker algebra."""
    if not trivial_pinsker:
        raise DeclarationMissing("lambda_n needs the trivial_pinsker declaration")
    out = 1.0
    for c in cylinders:
        out *= _as_cylinder(c, m.q).prob(m)
    return out


def _common(cyls: Sequence[CylinderSet]) -> list[CylinderSet]:
    window = cyls[0].window
    for c in cyls[1:]:
        window = window.union(c.window)
    return [c.expand(window) for c in cyls]


def canonical_partition(cylinders: Sequence) -> PartitionSpec:
    """Partition V_1 = U_1^c, V_j = U_j^c minus the earlier V's; needs the U_i to have empty intersection."""
    cyls = _common([_as_cylinder(c, 2 if not isinstance(c, CylinderSet) else c.q) for c in cylinders])
    q = cyls[0].q
    window = cyls[0].window
    inter = frozenset.intersection(*[c.patterns for c in cyls])
    if inter:
        raise ValueError("the complements of the neighbourhoods do not cover the space")
    taken: set = set()
    cells = []
    for c in cyls:
        cell = set(c.complement().patterns) - taken
        if cell:
            cells.append(cell)
            taken |= cell
    return PartitionSpec.from_cells(window, cells, q, name="canonical")


ENUM_SITES = 20


def entropy_tuple_certify(
    m: MeasureModel,
    spec: SystemSpec | None,
    cylinders: Sequence,
    direction: DirectionSpec,
    b,
    N_max: int,
    tol: float,
    trivial_pinsker: bool = False,
) -> TupleVerdict:
    """Support prong (lambda > 0) plus entropy prong (canonical partition rate >= tol)."""
    if not trivial_pinsker:
        raise DeclarationMissing("certification needs the trivial_pinsker declaration")
    if len(cylinders) < 2:
        raise ValueError("need at least two cylinders")
    cyls = _common([_as_cylinder(c, m.q) for c in cylinders])
    ev: dict = {"n": len(cyls), "b": str(as_rational(b)), "N_max": N_max, "tol": tol, "trivial_pinsker": True}
    pats = [c.patterns for c in cyls]
    if any(pats[i] == pats[j] for i in range(len(pats)) for j in range(i + 1, len(pats))):
        ev["diagonal"] = True
        return TupleVerdict("rejected", ev)
    ev["diagonal"] = False
    lam = lambda_n_product(m, cyls, True)
    ev["lambda"] = lam
    exact = m.kind is not MeasureKind.EMPIRICAL
    ev["lambda_exact"] = exact
    if lam == 0.0:
        return TupleVerdict("rejected" if exact else "inconclusive", ev)
    try:
        part = canonical_partition(cyls)
    except ValueError:
        ev["cover"] = False
        return TupleVerdict("inconclusive", ev)
    ev["cover"] = True
    support = len(strip(direction, StripParams(b, N_max)).minkowski(part.window))
    try:
        if exact_method(m, spec, part) == "enum" and support > ENUM_SITES:
            raise UnsupportedExact("support too large")
        est = directional_entropy_rate(m, spec, part, direction, b, N_max)
        ev["rate_method"] = est.curve.method
    except UnsupportedExact:
        est = directional_rate_lower_bound(m, spec, part, direction, b, N_max)
        ev["rate_method"] = "lower-bound"
    ev["rate"] = est.rate
    ev["rate_unit"] = "bits/col"
    if exact and est.rate >= tol:
        return TupleVerdict("entropy-tuple-certified", ev)
    return TupleVerdict("inconclusive", ev)


def finite_difference(
    spec: SystemSpec,
    rect: Rect | tuple,
    window: ShapeSet,
    diff,
    cut: int,
) -> ConfigWindow | None:
    """A valid difference pattern on ``rect`` equal to ``diff`` on ``window`` and zero at columns > ``cut``.

    Solved over GF(q) from the constraint translates inside the rectangle;
    returns None when no such pattern exists.
    """
    rect = Rect(*rect)
    q = spec.q
    diff = np.asarray(diff, dtype=np.int64) % q
    cols = [m for m in range(rect.m0, rect.m0 + rect.width) if m <= cut]
    var_sites = [(m, n) for m in cols for n in range(rect.n0, rect.n0 + rect.height)]
    index = {s: k for k, s in enumerate(var_sites)}
    if any(s not in index for s in window.sites):
        return None
    rows, rhs = [], []
    cons = spec.linear_constraint() if spec.kind is not SystemKind.FULL_SHIFT else None
    if cons:
        s0 = cons[0][0]
        for m in range(rect.m0, rect.m0 + rect.width):
            for n in range(rect.n0, rect.n0 + rect.height):
                v = (m - s0[0], n - s0[1])
                terms = [((s[0] + v[0], s[1] + v[1]), c) for s, c in cons]
                if not all(rect.m0 <= a < rect.m0 + rect.width and rect.n0 <= b_ < rect.n0 + rect.height for (a, b_), _ in terms):
                    continue
                row = np.zeros(len(var_sites), dtype=np.int64)
                for site, c in terms:
                    k = index.get(site)
                    if k is not None:
                        row[k] = (row[k] + c) % q
                if row.any():
                    rows.append(row)
                    rhs.append(0)
    for s, d in zip(window.sites, diff):
        row = np.zeros(len(var_sites), dtype=np.int64)
        row[index[s]] = 1
        rows.append(row)
        rhs.append(int(d))
    e = gf.solve(np.array(rows), np.array(rhs), q)
    if e is None:
        return None
    data = np.zeros((rect.width, rect.height), dtype=np.int64)
    for (m, n), val in zip(var_sites, e):
        data[m - rect.m0, n - rect.n0] = val
    return ConfigWindow((rect.m0, rect.n0), data, q)


def density_probe(
    m: MeasureModel,
    spec: SystemSpec | None,
    direction: DirectionSpec,
    sample_budget: int,
    seed: int,
    trivial_pinsker: bool = False,
    radius: int = 1,
    R: int = 4,
    b=1,
    N_max: int = 32,
    tol: float = 1e-4,
    cut_slack: int = 6,
    width: int = 16,
) -> dict:
    """Sample entropy-pair neighbourhoods and look for an asymptotic pair inside each.

    A neighbourhood is the pair of cylinders of two sampled points on the box
    of the given radius.  The second point is replaced by ``x1 + e`` where
    ``e`` is a valid difference matching ``x2 - x1`` on the box and vanishing
    beyond some column; that pair is then run through asymptotic_test (at b
    and at 3b) and the certifier.
    """
    if not trivial_pinsker:
        raise DeclarationMissing("density probe needs the trivial_pinsker declaration")
    if spec is None:
        spec = m.system if m.kind is MeasureKind.HAAR else SystemSpec.full_shift(m.q)
    W = box(radius)
    eps = 2.0**-R
    K0 = radius + R + 1
    span = K0 + cut_slack + width + 2 * R + 2
    top = int(np.ceil(float(direction.beta) * span)) + 3 * int(np.ceil(float(as_rational(b)))) + R + 2
    rect = Rect(-radius - R - 2, -radius - R - 2 - 3 * int(np.ceil(float(as_rational(b)))), span + radius + R + 2, top + radius + R + 6)
    records = []
    for k in range(sample_budget):
        rec: dict = {"index": k}
        x1 = sample_config(m, rect, seed, spec=None if m.kind is MeasureKind.HAAR else spec, stream=2 * k)
        x2 = None
        for attempt in range(64):
            stream = 2 * k + 1 + 2 * sample_budget * attempt
            cand = sample_config(m, rect, seed, spec=None if m.kind is MeasureKind.HAAR else spec, stream=stream)
            if not np.array_equal(cand.values(W), x1.values(W)):
                x2 = cand
                rec["streams"] = [2 * k, stream]
                break
        if x2 is None:
            rec.update(found=False, reason="no distinct neighbourhood")
            records.append(rec)
            continue
        U1 = CylinderSet(W, frozenset([tuple(x1.values(W).tolist())]), m.q)
        U2 = CylinderSet(W, frozenset([tuple(x2.values(W).tolist())]), m.q)
        verdict = entropy_tuple_certify(m, spec, [U1, U2], direction, b, N_max, tol, True)
        rec["certify"] = verdict.kind
        e = None
        for cut in range(radius, radius + cut_slack + 1):
            e = finite_difference(spec, rect, W, (x2.values(W) - x1.values(W)) % m.q, cut)
            if e is not None:
                break
        if e is None:
            rec.update(found=False, reason="no valid difference within budget", verdict="inconclusive")
            records.append(rec)
            continue
        y2 = ConfigWindow(x1.origin, (x1.data + e.data) % m.q, m.q)
        K = cut + R + 1
        obs = TupleObservation((x1, y2), R)
        asy_b = asymptotic_test(obs, direction, K, eps, b, width)
        asy_3b = asymptotic_test(obs, direction, K, eps, 3 * as_rational(b), width)
        valid = validate_window(spec, y2) if spec.kind is not SystemKind.FULL_SHIFT else True
        in_nbhd = U2.contains(y2) and U1.contains(x1)
        found = bool(valid and in_nbhd and asy_b and asy_3b and verdict.kind == "entropy-tuple-certified")
        rec.update(found=found, cut=cut, K=K, asymptotic=asy_b, asymptotic_3b=asy_3b, valid=valid,
                   in_neighbourhood=in_nbhd, verdict="found" if found else "inconclusive")
        records.append(rec)
    n_found = sum(1 for r in records if r.get("found"))
    return {
        "budget": sample_budget,
        "found": n_found,
        "fraction": (n_found / sample_budget) if sample_budget else None,
        "radius": radius,
        "R": R,
        "eps": eps,
        "rect": list(rect),
        "seed": seed,
        "trivial_pinsker": True,
        "records": records,
    }
