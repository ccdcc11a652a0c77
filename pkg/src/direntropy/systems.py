"""Finitely presented Z^2 shift systems and finite observations of them.

Coordinates are ``(m, n)``: ``m`` is the horizontal (column) index and ``n``
the vertical (row) index.  A :class:`ConfigWindow` stores a rectangle of a
configuration as ``data[m - m0, n - n0]``.

For a :attr:`SystemKind.SECOND_ORDER_CA` system the stored rectangle is a
space-time diagram: row ``n`` is the CA state at time ``n``, so the vertical
translation is the CA time map and the horizontal one is the row shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import product

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import OutOfWindow
from .gf import inv_mod, is_prime
from .lattice import ShapeSet, Site

__all__ = [
    "SystemKind",
    "CARule",
    "SystemSpec",
    "Propagator",
    "PatternWindow",
    "ConfigWindow",
    "act",
    "validate",
    "validate_window",
    "config_distance",
    "translated_distances",
    "spacetime_window",
]


class SystemKind(str, Enum):
    FULL_SHIFT = "full_shift"
    ALGEBRAIC = "algebraic"
    SECOND_ORDER_CA = "second_order_ca"


@dataclass(frozen=True)
class CARule:
    """Local rule f on a radius-r neighbourhood, stored as a lookup table.

    ``table[code]`` with ``code = sum(x[k] * q**k)`` over the neighbourhood
    ``x[0..2r]`` read left to right.
    """

    radius: int
    q: int
    table: tuple[int, ...]
    linear_coeffs: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.table) != self.q ** (2 * self.radius + 1):
            raise ValueError("rule table has the wrong length")

    @classmethod
    def linear(cls, coeffs, q: int) -> "CARule":
        coeffs = tuple(int(c) % q for c in coeffs)
        if len(coeffs) % 2 != 1:
            raise ValueError("need an odd number of coefficients")
        r = len(coeffs) // 2
        table = []
        for code in range(q ** len(coeffs)):
            digits = [(code // q**k) % q for k in range(len(coeffs))]
            table.append(sum(c * d for c, d in zip(coeffs, digits)) % q)
        return cls(r, q, tuple(table), coeffs)

    @classmethod
    def from_function(cls, fn, radius: int, q: int) -> "CARule":
        table = []
        width = 2 * radius + 1
        for code in range(q**width):
            nb = tuple((code // q**k) % q for k in range(width))
            table.append(int(fn(nb)) % q)
        return cls(radius, q, tuple(table))

    @cached_property
    def _lut(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    def apply(self, row) -> np.ndarray:
        """Image of a finite row; the result is ``2r`` cells shorter."""
        row = np.asarray(row, dtype=np.int64)
        w = 2 * self.radius + 1
        if row.size < w:
            return np.zeros(0, dtype=np.int64)
        nb = sliding_window_view(row, w)
        weights = self.q ** np.arange(w, dtype=np.int64)
        return self._lut[nb @ weights]

    def to_dict(self) -> dict:
        d = {"radius": self.radius, "q": self.q}
        if self.linear_coeffs is not None:
            d["linear"] = list(self.linear_coeffs)
        else:
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CARule":
        if "linear" in d:
            return cls.linear(d["linear"], int(d["q"]))
        return cls(int(d["radius"]), int(d["q"]), tuple(int(v) for v in d["table"]))


@dataclass(frozen=True)
class Propagator:
    """A constraint solved for its single top site.

    ``x(top + v) = sum(w * x(s + v))`` over the remaining support sites; each
    row is therefore a function of the ``height`` rows below it.
    """

    top: Site
    lower: tuple[tuple[Site, int], ...]
    q: int

    @property
    def height(self) -> int:
        return self.top[1] - min(s[1] for s, _ in self.lower)

    @property
    def bottom(self) -> int:
        return min(s[1] for s, _ in self.lower)

    def offsets(self) -> list[tuple[int, int, int]]:
        """(dm, dn, w): x(M, N) = sum w * x(M + dm, N + dn), dn < 0."""
        tm, tn = self.top
        return [(s[0] - tm, s[1] - tn, w) for s, w in self.lower]

    def spread(self) -> tuple[int, int]:
        """Columns reached per row step, to the left and to the right."""
        left = right = 0
        for dm, dn, _ in self.offsets():
            left = max(left, -dm)
            right = max(right, dm)
        return left, right


@dataclass(frozen=True)
class SystemSpec:
    kind: SystemKind
    q: int = 2
    constraint: tuple[tuple[Site, int], ...] = ()
    ca_rule: CARule | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", SystemKind(self.kind))
        if self.q < 2:
            raise ValueError("alphabet needs q >= 2")
        if self.kind is SystemKind.ALGEBRAIC:
            if not is_prime(self.q):
                raise ValueError("algebraic subshifts need prime q")
            cons = tuple(((int(s[0]), int(s[1])), int(c) % self.q) for s, c in self.constraint)
            if not cons or any(c == 0 for _, c in cons):
                raise ValueError("constraint must be nonempty with nonzero coefficients")
            if len({s for s, _ in cons}) != len(cons):
                raise ValueError("constraint sites must be distinct")
            object.__setattr__(self, "constraint", tuple(sorted(cons)))
        if self.kind is SystemKind.SECOND_ORDER_CA:
            if self.ca_rule is None or self.ca_rule.q != self.q:
                raise ValueError("second-order CA needs a rule over the same alphabet")

    @classmethod
    def full_shift(cls, q: int = 2) -> "SystemSpec":
        return cls(SystemKind.FULL_SHIFT, q, label="full_shift")

    @classmethod
    def three_dot(cls) -> "SystemSpec":
        """x(m, n) + x(m+1, n) + x(m, n+1) = 0 over GF(2)."""
        return cls(SystemKind.ALGEBRAIC, 2, (((0, 0), 1), ((1, 0), 1), ((0, 1), 1)), label="three_dot")

    @classmethod
    def algebraic(cls, constraint, q: int) -> "SystemSpec":
        return cls(SystemKind.ALGEBRAIC, q, tuple(constraint))

    @classmethod
    def second_order_ca(cls, rule: CARule) -> "SystemSpec":
        return cls(SystemKind.SECOND_ORDER_CA, rule.q, ca_rule=rule)

    def linear_constraint(self) -> tuple[tuple[Site, int], ...] | None:
        """The defining GF(q) relation, if the system has one.

        A second-order CA with a linear rule becomes
        ``x(i, t+1) + x(i, t-1) - sum a_k x(i+k-r, t) = 0``.
        """
        if self.kind is SystemKind.ALGEBRAIC:
            return self.constraint
        if self.kind is SystemKind.SECOND_ORDER_CA and self.ca_rule.linear_coeffs is not None:
            if not is_prime(self.q):
                return None
            r = self.ca_rule.radius
            terms: dict[Site, int] = {(0, 2): 1, (0, 0): 1}
            for k, a in enumerate(self.ca_rule.linear_coeffs):
                site = (k - r, 1)
                terms[site] = (terms.get(site, 0) - a) % self.q
            return tuple(sorted((s, c) for s, c in terms.items() if c % self.q))
        return None

    @cached_property
    def propagator(self) -> Propagator | None:
        cons = self.linear_constraint()
        if cons is None:
            return None
        n_top = max(s[1] for s, _ in cons)
        tops = [(s, c) for s, c in cons if s[1] == n_top]
        if len(tops) != 1 or len(cons) == 1:
            return None
        top, c_top = tops[0]
        inv = inv_mod(c_top, self.q)
        lower = tuple((s, (-c * inv) % self.q) for s, c in cons if s != top)
        return Propagator(top, lower, self.q)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "q": self.q}
        if self.label:
            d["label"] = self.label
        if self.kind is SystemKind.ALGEBRAIC:
            d["constraint"] = [[list(s), c] for s, c in self.constraint]
        if self.ca_rule is not None:
            d["ca_rule"] = self.ca_rule.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemSpec":
        kind = SystemKind(d["kind"])
        if kind is SystemKind.ALGEBRAIC and d.get("label") == "three_dot" and "constraint" not in d:
            return cls.three_dot()
        cons = tuple(((int(s[0]), int(s[1])), int(c)) for s, c in d.get("constraint", ()))
        rule = CARule.from_dict(d["ca_rule"]) if "ca_rule" in d else None
        return cls(kind, int(d.get("q", 2)), cons, rule, d.get("label", ""))


@dataclass(frozen=True)
class PatternWindow:
    """Symbols on a finite shape, listed in the shape's site order."""

    shape: ShapeSet
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) != len(self.shape):
            raise ValueError("pattern has %d values for %d sites" % (len(vals), len(self.shape)))
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dict(cls, mapping: dict) -> "PatternWindow":
        shape = ShapeSet(tuple(mapping))
        return cls(shape, tuple(mapping[s] for s in shape))

    def as_dict(self) -> dict[Site, int]:
        return dict(zip(self.shape.sites, self.values))

    def __getitem__(self, site) -> int:
        return self.values[self.shape.index(site)]

    def translate(self, v) -> "PatternWindow":
        # translation preserves lexicographic order, so values keep their slots
        return PatternWindow(self.shape.translate(v), self.values)

    def to_json(self) -> dict:
        return {"shape": self.shape.to_json(), "values": list(self.values)}

    @classmethod
    def from_json(cls, data: dict) -> "PatternWindow":
        return cls(ShapeSet.from_json(data["shape"]), tuple(data["values"]))


@dataclass(frozen=True, eq=False)
class ConfigWindow:
    """Axis-aligned rectangle of a configuration."""

    origin: Site
    data: np.ndarray = field(repr=False)
    q: int = 2

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.int64))
        if arr.ndim != 2:
            raise ValueError("window data must be 2-D")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConfigWindow)
            and self.origin == other.origin
            and self.q == other.q
            and np.array_equal(self.data, other.data)
        )

    @property
    def width(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def rect(self) -> tuple[int, int, int, int]:
        """(m_min, n_min, m_max, n_max), inclusive."""
        m0, n0 = self.origin
        return m0, n0, m0 + self.width - 1, n0 + self.height - 1

    def covers(self, shape: ShapeSet, offset: Site = (0, 0)) -> bool:
        if len(shape) == 0:
            return True
        a, b, c, d = shape.bbox()
        m0, n0, m1, n1 = self.rect
        return m0 <= a + offset[0] and c + offset[0] <= m1 and n0 <= b + offset[1] and d + offset[1] <= n1

    def values(self, shape: ShapeSet, offset: Site = (0, 0)) -> np.ndarray:
        if not self.covers(shape, offset):
            raise OutOfWindow("shape shifted by %s leaves window %s" % (tuple(offset), self.rect))
        if len(shape) == 0:
            return np.zeros(0, dtype=np.int64)
        arr = shape.array
        return self.data[arr[:, 0] + offset[0] - self.origin[0], arr[:, 1] + offset[1] - self.origin[1]]

    def pattern(self, shape: ShapeSet, offset: Site = (0, 0)) -> PatternWindow:
        return PatternWindow(shape, tuple(self.values(shape, offset).tolist()))

    def sub(self, m_min: int, n_min: int, m_max: int, n_max: int) -> "ConfigWindow":
        m0, n0, m1, n1 = self.rect
        if m_min < m0 or n_min < n0 or m_max > m1 or n_max > n1:
            raise OutOfWindow("sub-rectangle leaves window")
        return ConfigWindow(
            (m_min, n_min),
            self.data[m_min - m0 : m_max - m0 + 1, n_min - n0 : n_max - n0 + 1],
            self.q,
        )

    def with_values(self, shape: ShapeSet, vals) -> "ConfigWindow":
        if not self.covers(shape):
            raise OutOfWindow("shape leaves window")
        data = self.data.copy()
        arr = shape.array
        data[arr[:, 0] - self.origin[0], arr[:, 1] - self.origin[1]] = np.asarray(vals) % self.q
        return ConfigWindow(self.origin, data, self.q)

    def to_json(self) -> dict:
        return {"origin": list(self.origin), "q": self.q, "data": self.data.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "ConfigWindow":
        return cls(tuple(d["origin"]), np.asarray(d["data"], dtype=np.int64), int(d.get("q", 2)))


def act(x: ConfigWindow, v: Site, window: ShapeSet) -> PatternWindow:
    """The pattern ``s -> x(s + v)`` on ``window``."""
    return x.pattern(window, (int(v[0]), int(v[1])))


def _constraint_violations(cons, q, lookup, candidates) -> bool:
    (s0, _), rest = cons[0], cons[1:]
    for anchor in candidates:
        v = (anchor[0] - s0[0], anchor[1] - s0[1])
        total = 0
        for s, c in cons:
            val = lookup.get((s[0] + v[0], s[1] + v[1]))
            if val is None:
                break
            total += c * val
        else:
            if total % q:
                return True
    return False


def validate(spec: SystemSpec, p: PatternWindow) -> bool:
    """Check every constraint translate lying fully inside the pattern's shape."""
    if spec.kind is SystemKind.FULL_SHIFT:
        return True
    lookup = p.as_dict()
    if spec.kind is SystemKind.ALGEBRAIC:
        return not _constraint_violations(spec.constraint, spec.q, lookup, p.shape.sites)
    rule = spec.ca_rule
    r = rule.radius
    for (i, t), below in lookup.items():
        above = lookup.get((i, t + 2))
        if above is None:
            continue
        nb = [lookup.get((i + k, t + 1)) for k in range(-r, r + 1)]
        if any(v is None for v in nb):
            continue
        code = sum(v * spec.q**k for k, v in enumerate(nb))
        if (above + below - rule.table[code]) % spec.q:
            return False
    return True


def validate_window(spec: SystemSpec, x: ConfigWindow) -> bool:
    """Vectorised :func:`validate` for a whole rectangle."""
    if spec.kind is SystemKind.FULL_SHIFT:
        return True
    d, q = x.data, spec.q
    if spec.kind is SystemKind.ALGEBRAIC:
        cons = spec.constraint
        ms = [s[0] for s, _ in cons]
        ns = [s[1] for s, _ in cons]
        lo_m, hi_m, lo_n, hi_n = min(ms), max(ms), min(ns), max(ns)
        W = x.width - (hi_m - lo_m)
        H = x.height - (hi_n - lo_n)
        if W <= 0 or H <= 0:
            return True
        total = np.zeros((W, H), dtype=np.int64)
        for (sm, sn), c in cons:
            total += c * d[sm - lo_m : sm - lo_m + W, sn - lo_n : sn - lo_n + H]
        return not np.any(total % q)
    rule = spec.ca_rule
    r = rule.radius
    if x.height < 3 or x.width < 2 * r + 1:
        return True
    for t in range(x.height - 2):
        img = rule.apply(d[:, t + 1])
        if np.any((d[r : x.width - r, t + 2] + d[r : x.width - r, t] - img) % q):
            return False
    return True


def _radius_grid(R: int) -> np.ndarray:
    k = np.arange(-R, R + 1)
    return np.maximum(np.abs(k)[:, None], np.abs(k)[None, :])


def translated_distances(x: ConfigWindow, y: ConfigWindow, sites, R: int) -> np.ndarray:
    """``config_distance(T^s x, T^s y, R)`` for every site ``s`` (rows of ``sites``)."""
    sites = np.asarray(sites, dtype=np.int64).reshape(-1, 2)
    if sites.shape[0] == 0:
        return np.zeros(0)
    lo_m, lo_n = sites.min(axis=0) - R
    hi_m, hi_n = sites.max(axis=0) + R
    for w in (x, y):
        m0, n0, m1, n1 = w.rect
        if lo_m < m0 or lo_n < n0 or hi_m > m1 or hi_n > n1:
            raise OutOfWindow("metric boxes of radius %d leave window %s" % (R, w.rect))
    dx = x.data[lo_m - x.origin[0] : hi_m - x.origin[0] + 1, lo_n - x.origin[1] : hi_n - x.origin[1] + 1]
    dy = y.data[lo_m - y.origin[0] : hi_m - y.origin[0] + 1, lo_n - y.origin[1] : hi_n - y.origin[1] + 1]
    diff = dx != dy
    view = sliding_window_view(diff, (2 * R + 1, 2 * R + 1))
    sel = view[sites[:, 0] - lo_m - R, sites[:, 1] - lo_n - R]
    first = np.where(sel, _radius_grid(R)[None], R + 1).min(axis=(1, 2))
    return np.ldexp(1.0, -first)


def config_distance(x: ConfigWindow, y: ConfigWindow, radius: int) -> float:
    """``2**-j`` for the smallest box radius ``j`` where x and y differ, or ``2**-(R+1)``."""
    return float(translated_distances(x, y, [(0, 0)], int(radius))[0])


def spacetime_window(spec: SystemSpec, prev_row, cur_row, height: int, start: int = 0, n0: int = 0) -> ConfigWindow:
    """Space-time rectangle of a second-order CA started from two rows.

    ``prev_row``/``cur_row`` occupy columns ``start..start+L-1`` at times
    ``n0`` and ``n0+1``; each later row loses ``r`` cells per side, and the
    rectangle keeps the columns still defined at the top row.
    """
    if spec.kind is not SystemKind.SECOND_ORDER_CA:
        raise ValueError("spacetime_window needs a second-order CA system")
    rule, q = spec.ca_rule, spec.q
    r = rule.radius
    prev = np.asarray(prev_row, dtype=np.int64) % q
    cur = np.asarray(cur_row, dtype=np.int64) % q
    if prev.shape != cur.shape:
        raise ValueError("initial rows must have equal length")
    shrink = r * max(height - 2, 0)
    L = prev.size
    width = L - 2 * shrink
    if width <= 0:
        raise OutOfWindow("initial rows too short for %d time steps" % height)
    out = np.zeros((width, height), dtype=np.int64)
    a, b = prev, cur
    out[:, 0] = a[shrink : shrink + width]
    if height > 1:
        out[:, 1] = b[shrink : shrink + width]
    off = 0
    for t in range(2, height):
        c = (rule.apply(b) - a[r : a.size - r]) % q
        a, b = b[r : b.size - r], c
        off += r
        out[:, t] = b[shrink - off : shrink - off + width]
    return ConfigWindow((start + shrink, n0), out, q)
