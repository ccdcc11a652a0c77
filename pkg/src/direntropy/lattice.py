"""Exact lattice geometry for a direction v = (1, beta).

beta is carried as a reduced rational ``beta_num/beta_den`` whose denominator
exceeds the horizon, so ``i*beta`` is never an integer for ``0 < |i| <=
horizon`` and every floor computed here is decided in integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor, gcd, isqrt
from numbers import Rational
from typing import Callable, Iterable, Iterator

import numpy as np

from .errors import CoverInfeasible, HorizonExceeded, InvalidPhase

__all__ = [
    "as_rational",
    "DirectionSpec",
    "StripParams",
    "ShapeSet",
    "floor_affine",
    "strip_bounds",
    "strip",
    "strip_contains",
    "cover_translates",
    "digital_line",
    "rasterize_tube",
    "tube_bound",
    "box",
    "rectangle",
]

Site = tuple[int, int]

# int64 products p*m*w stay exact below this bound
_INT64_SAFE = 2**62


def as_rational(x) -> Fraction:
    """Convert ints, Fractions, decimal strings ("3/7", "0.25") or floats exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError("cannot interpret %r as a rational number" % (x,))


def _golden_floor(i: int) -> int:
    # floor(i * (sqrt(5) - 1) / 2) in integers; i*sqrt(5) is irrational for i != 0
    if i == 0:
        return 0
    if i > 0:
        return (isqrt(5 * i * i) - i) // 2
    return -_golden_floor(-i) - 1


def _fibonacci_convergent(horizon: int) -> tuple[int, int]:
    a, b = 1, 2
    while b <= horizon:
        a, b = b, a + b
    return a, b


@dataclass(frozen=True)
class DirectionSpec:
    """The direction (1, beta) as an exact rational convergent of an irrational slope.

    ``reference_floor``, when given, is an exact oracle ``i -> floor(i*beta_true)``
    for the irrational being approximated; construction then checks that the
    convergent reproduces every floor with ``|i| <= horizon``.
    """

    beta_num: int
    beta_den: int
    horizon: int
    label: str = ""
    reference_floor: Callable[[int], int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        p, q, h = self.beta_num, self.beta_den, self.horizon
        if q <= 0 or h <= 0:
            raise ValueError("beta_den and horizon must be positive")
        if not 0 < p < q:
            raise ValueError("need 0 < beta < 1, got %d/%d" % (p, q))
        if gcd(p, q) != 1:
            raise ValueError("beta %d/%d is not in lowest terms" % (p, q))
        if q <= h:
            raise ValueError(
                "beta_den=%d must exceed horizon=%d to rule out floor ties" % (q, h)
            )
        if self.reference_floor is not None:
            for i in range(-h, h + 1):
                if (i * p) // q != self.reference_floor(i):
                    raise ValueError(
                        "convergent %d/%d disagrees with the reference floor at i=%d" % (p, q, i)
                    )

    @property
    def beta(self) -> Fraction:
        return Fraction(self.beta_num, self.beta_den)

    @classmethod
    def golden(cls, horizon: int = 1000) -> "DirectionSpec":
        """Fibonacci convergent of (sqrt 5 - 1)/2 with denominator above ``horizon``.

        The horizon is capped where the convergent is known to track the
        irrational exactly; 987/1597 serves every horizon up to 1596.
        """
        p, q = _fibonacci_convergent(max(horizon, 1596))
        return cls(p, q, horizon, "golden", reference_floor=_golden_floor)

    @classmethod
    def from_continued_fraction(cls, coeffs: Iterable[int], horizon: int, label: str = "") -> "DirectionSpec":
        """Convergent of [0; a1, a2, ...]; coefficients are consumed until the
        denominator exceeds ``horizon``."""
        h0, h1 = 1, 0  # numerators, seeded past the leading 0
        k0, k1 = 0, 1  # denominators
        for a in coeffs:
            if a < 1:
                raise ValueError("continued-fraction coefficients must be >= 1")
            h0, h1 = h1, a * h1 + h0
            k0, k1 = k1, a * k1 + k0
            if k1 > horizon:
                return cls(h1, k1, horizon, label)
        raise ValueError("coefficients exhausted before denominator exceeded horizon")

    def check_index(self, i: int) -> None:
        if abs(i) > self.horizon:
            raise HorizonExceeded("|%d| exceeds horizon %d" % (i, self.horizon))

    def to_dict(self) -> dict:
        return {
            "beta_num": self.beta_num,
            "beta_den": self.beta_den,
            "horizon": self.horizon,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DirectionSpec":
        if d.get("label") == "golden" and "beta_num" not in d:
            return cls.golden(int(d["horizon"]))
        ref = _golden_floor if d.get("label") == "golden" else None
        return cls(int(d["beta_num"]), int(d["beta_den"]), int(d["horizon"]), d.get("label", ""), ref)


@dataclass(frozen=True)
class StripParams:
    b: Fraction
    N: int

    def __post_init__(self):
        object.__setattr__(self, "b", as_rational(self.b))
        if self.b <= 0:
            raise ValueError("strip half-width must be positive")
        if self.N < 1:
            raise ValueError("column count must be >= 1")


@dataclass(frozen=True)
class ShapeSet:
    """Finite set of lattice sites, stored sorted (m first, then n)."""

    sites: tuple[Site, ...] = ()

    def __post_init__(self):
        norm = tuple(sorted({(int(m), int(n)) for m, n in self.sites}))
        object.__setattr__(self, "sites", norm)

    @classmethod
    def from_array(cls, arr) -> "ShapeSet":
        arr = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
        return cls(tuple(map(tuple, arr.tolist())))

    @cached_property
    def array(self) -> np.ndarray:
        if not self.sites:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(self.sites, dtype=np.int64)

    @cached_property
    def _set(self) -> frozenset:
        return frozenset(self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sites)

    def __contains__(self, site) -> bool:
        return tuple(site) in self._set

    def index(self, site) -> int:
        return self.sites.index(tuple(site))

    def issubset(self, other: "ShapeSet") -> bool:
        return self._set <= other._set

    def union(self, other: "ShapeSet") -> "ShapeSet":
        return ShapeSet(self.sites + other.sites)

    def translate(self, v) -> "ShapeSet":
        dm, dn = int(v[0]), int(v[1])
        return ShapeSet(tuple((m + dm, n + dn) for m, n in self.sites))

    def minkowski(self, other: "ShapeSet") -> "ShapeSet":
        """Sumset ``{s + w}``; an empty operand gives the empty set."""
        if not self.sites or not other.sites:
            return ShapeSet()
        a, w = self.array, other.array
        return ShapeSet.from_array((a[:, None, :] + w[None, :, :]).reshape(-1, 2))

    def bbox(self) -> tuple[int, int, int, int]:
        """(m_min, n_min, m_max, n_max); raises on the empty set."""
        if not self.sites:
            raise ValueError("empty shape has no bounding box")
        a = self.array
        return int(a[:, 0].min()), int(a[:, 1].min()), int(a[:, 0].max()), int(a[:, 1].max())

    def column_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for m, _ in self.sites:
            out[m] = out.get(m, 0) + 1
        return out

    def to_json(self) -> list[list[int]]:
        return [[m, n] for m, n in self.sites]

    @classmethod
    def from_json(cls, data) -> "ShapeSet":
        return cls(tuple((int(m), int(n)) for m, n in data))


def box(radius: int) -> ShapeSet:
    r = int(radius)
    return ShapeSet(tuple((m, n) for m in range(-r, r + 1) for n in range(-r, r + 1)))


def rectangle(width: int, height: int, origin: Site = (0, 0)) -> ShapeSet:
    m0, n0 = origin
    return ShapeSet(tuple((m0 + i, n0 + j) for i in range(width) for j in range(height)))


def _phase(t) -> Fraction:
    t = as_rational(t)
    if not 0 <= t < 1:
        raise InvalidPhase("phase %s not in [0, 1)" % t)
    return t


def floor_affine(direction: DirectionSpec, t, i: int) -> int:
    """floor(i*beta + t) in exact integer arithmetic."""
    direction.check_index(i)
    t = _phase(t)
    p, q = direction.beta_num, direction.beta_den
    a, c = t.numerator, t.denominator
    return (i * p * c + a * q) // (q * c)


def _affine_floors(direction: DirectionSpec, t: Fraction, idx: np.ndarray) -> np.ndarray:
    p, q = direction.beta_num, direction.beta_den
    a, c = t.numerator, t.denominator
    if (np.abs(idx).max(initial=0) + 1) * p * c + a * q < _INT64_SAFE and q * c < _INT64_SAFE:
        return (idx * (p * c) + a * q) // (q * c)
    return np.array([(int(i) * p * c + a * q) // (q * c) for i in idx], dtype=object)


def strip_bounds(direction: DirectionSpec, b, N: int, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-column integer bounds ``lo[m] <= n <= hi[m]`` of the strip, columns ``start..start+N-1``."""
    b = as_rational(b)
    if N > 0:
        direction.check_index(start)
        direction.check_index(start + N - 1)
    p, q = direction.beta_num, direction.beta_den
    u, w = b.numerator, b.denominator
    ms = np.arange(start, start + N, dtype=np.int64)
    top = (abs(start) + N + 1) * p * w + u * q
    if top < _INT64_SAFE and q * w < _INT64_SAFE:
        lo = -((u * q - ms * (p * w)) // (q * w))
        hi = (ms * (p * w) + u * q) // (q * w)
        return lo, hi
    lo = np.array([-((u * q - int(m) * p * w) // (q * w)) for m in ms], dtype=object)
    hi = np.array([(int(m) * p * w + u * q) // (q * w) for m in ms], dtype=object)
    return lo, hi


def strip(direction: DirectionSpec, params: StripParams) -> ShapeSet:
    """The finite strip {(m, n): 0 <= m < N, beta*m - b <= n <= beta*m + b}."""
    lo, hi = strip_bounds(direction, params.b, params.N)
    counts = (hi - lo + 1).astype(np.int64)
    ms = np.repeat(np.arange(params.N, dtype=np.int64), counts)
    starts = np.repeat(lo.astype(np.int64), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    return ShapeSet.from_array(np.stack([ms, starts + offsets], axis=1))


def strip_contains(direction: DirectionSpec, b, site) -> bool:
    m, n = int(site[0]), int(site[1])
    direction.check_index(m)
    b = as_rational(b)
    p, q = direction.beta_num, direction.beta_den
    u, w = b.numerator, b.denominator
    # beta*m - b <= n <= beta*m + b, scaled by q*w
    return p * m * w - u * q <= n * q * w <= p * m * w + u * q


def cover_translates(direction: DirectionSpec, b1, b2, N: int) -> ShapeSet:
    """Vertical translates {(0, k)} whose b2-strips cover the finite b1-strip.

    Chosen greedily (largest coverage, then smallest |k|) and verified site by
    site before returning.
    """
    b1, b2 = as_rational(b1), as_rational(b2)
    if b2 < Fraction(1, 2):
        raise CoverInfeasible("vertical translates need b2 >= 1/2, got %s" % b2)
    if b1 <= 0:
        raise ValueError("b1 must be positive")
    direction.check_index(N - 1)
    beta = direction.beta
    sites = strip(direction, StripParams(b1, N)).sites
    options: dict[int, set[int]] = {}
    for idx, (m, n) in enumerate(sites):
        d = n - beta * m
        for k in range(ceil(d - b2), floor(d + b2) + 1):
            options.setdefault(k, set()).add(idx)
    uncovered = set(range(len(sites)))
    chosen: list[int] = []
    while uncovered:
        k = max(options, key=lambda k: (len(options[k] & uncovered), -abs(k), -k))
        gain = options[k] & uncovered
        if not gain:
            raise CoverInfeasible("greedy cover stalled")
        chosen.append(k)
        uncovered -= gain
    cover = ShapeSet(tuple((0, k) for k in chosen))
    for m, n in sites:
        if not any(strip_contains(direction, b2, (m, n - k)) for _, k in cover):
            raise CoverInfeasible("site (%d, %d) left uncovered" % (m, n))
    return cover


def digital_line(direction: DirectionSpec, t, N: int, offsets: Iterable[int] = (0,)) -> ShapeSet:
    """{(i, floor(i*beta + t) + j) : 0 <= i < N, j in offsets}."""
    t = _phase(t)
    if N > 0:
        direction.check_index(N - 1)
    idx = np.arange(N, dtype=np.int64)
    fl = _affine_floors(direction, t, idx).astype(np.int64)
    offs = np.asarray(sorted(set(int(j) for j in offsets)), dtype=np.int64)
    ms = np.repeat(idx, offs.size)
    ns = (fl[:, None] + offs[None, :]).reshape(-1)
    return ShapeSet.from_array(np.stack([ms, ns], axis=1))


def rasterize_tube(direction: DirectionSpec, base: Iterable, length) -> ShapeSet:
    """Lattice points within vertical distance 1/2 of the tube ``base + [0, length]*v``.

    ``base`` is a finite set of rational points (l, k).
    """
    beta = direction.beta
    length = as_rational(length)
    out = []
    for l, k in base:
        l, k = as_rational(l), as_rational(k)
        for m in range(ceil(l), floor(l + length) + 1):
            centre = k + (m - l) * beta
            for n in range(ceil(centre - Fraction(1, 2)), floor(centre + Fraction(1, 2)) + 1):
                out.append((m, n))
    return ShapeSet(tuple(out))


def tube_bound(direction: DirectionSpec, base: Iterable, length) -> tuple[Fraction, int, Site]:
    """(b, N, shift) with ``rasterize_tube(base + shift, length)`` inside the finite b-strip of N columns."""
    pts = [(as_rational(l), as_rational(k)) for l, k in base]
    if not pts:
        raise ValueError("empty base set")
    beta = direction.beta
    s = max(0, -floor(min(l for l, _ in pts)))
    shifted = [(l + s, k) for l, k in pts]
    b = Fraction(1, 2) + max(abs(k - l * beta) for l, k in shifted)
    N = floor(max(l for l, _ in shifted) + as_rational(length)) + 1
    return b, N, (s, 0)
