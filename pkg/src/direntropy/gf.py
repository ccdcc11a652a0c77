"""Linear algebra over the prime field GF(q).

Two representations are used.  Over GF(2) a vector is a Python ``int`` bitset
(bit ``k`` is coordinate ``k``), which keeps incremental elimination cheap for
the few-thousand-column systems produced by strip shapes.  For odd primes a
vector is a 1-D ``numpy`` integer array reduced mod ``q``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "is_prime",
    "inv_mod",
    "pack_bits",
    "RowSpace",
    "rank",
    "rref",
    "nullspace",
    "solve",
]


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    k = 2
    while k * k <= q:
        if q % k == 0:
            return False
        k += 1
    return True


def inv_mod(a: int, q: int) -> int:
    a %= q
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod %d" % q)
    return pow(a, q - 2, q)


def pack_bits(row) -> int:
    """Pack a 0/1 vector into an int bitset, coordinate k -> bit k."""
    arr = np.asarray(row, dtype=np.uint8) & 1
    if arr.size == 0:
        return 0
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


class RowSpace:
    """Incrementally grown row space over GF(q).

    Each stored basis row is keyed by its highest nonzero coordinate and is
    normalised so that coordinate equals 1.  Reducing a vector from its top
    coordinate downwards therefore never re-introduces a higher coordinate.
    """

    def __init__(self, q: int = 2):
        if not is_prime(q):
            raise ValueError("GF(q) needs prime q, got %r" % (q,))
        self.q = q
        self._basis: dict[int, object] = {}

    @property
    def rank(self) -> int:
        return len(self._basis)

    def __len__(self) -> int:
        return len(self._basis)

    def _coerce(self, vec):
        if self.q == 2:
            if isinstance(vec, (int, np.integer)):
                return int(vec)
            return pack_bits(vec)
        return np.asarray(vec, dtype=np.int64) % self.q

    def reduce(self, vec):
        v = self._coerce(vec)
        if self.q == 2:
            basis = self._basis
            while v:
                top = v.bit_length() - 1
                row = basis.get(top)
                if row is None:
                    return v
                v ^= row
            return 0
        q = self.q
        while True:
            nz = np.flatnonzero(v)
            if nz.size == 0:
                return v
            top = int(nz[-1])
            row = self._basis.get(top)
            if row is None:
                return v
            v = (v - v[top] * row) % q

    def add(self, vec) -> bool:
        """Insert ``vec``; return True when it was independent of the span."""
        v = self.reduce(vec)
        if self.q == 2:
            if v == 0:
                return False
            self._basis[v.bit_length() - 1] = v
            return True
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        top = int(nz[-1])
        self._basis[top] = (v * inv_mod(int(v[top]), self.q)) % self.q
        return True

    def contains(self, vec) -> bool:
        v = self.reduce(vec)
        if self.q == 2:
            return v == 0
        return not np.any(v)

    def copy(self) -> "RowSpace":
        other = RowSpace(self.q)
        other._basis = dict(self._basis)
        return other


def rank(matrix, q: int = 2) -> int:
    space = RowSpace(q)
    for row in np.atleast_2d(np.asarray(matrix, dtype=np.int64)):
        space.add(row)
    return space.rank


def rref(matrix, q: int):
    """Reduced row echelon form over GF(q); returns ``(R, pivot_columns)``."""
    A = np.array(matrix, dtype=np.int64, copy=True) % q
    if A.ndim != 2:
        raise ValueError("rref expects a 2-D array")
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = (A[r] * inv_mod(int(A[r, c]), q)) % q
        col = A[:, c].copy()
        col[r] = 0
        if np.any(col):
            A = (A - np.outer(col, A[r])) % q
        pivots.append(c)
        r += 1
    return A, pivots


def nullspace(matrix, q: int, ncols: int | None = None) -> np.ndarray:
    """Basis of ``{x : A x = 0}`` over GF(q), one basis vector per row."""
    A = np.asarray(matrix, dtype=np.int64)
    if A.size == 0:
        n = ncols if ncols is not None else (A.shape[1] if A.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    R, pivots = rref(A, q)
    n = R.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, p in enumerate(pivots):
            basis[k, p] = (-R[i, f]) % q
    return basis


def solve(matrix, rhs, q: int):
    """One solution of ``A x = b`` over GF(q), or None if inconsistent."""
    A = np.asarray(matrix, dtype=np.int64)
    b = np.asarray(rhs, dtype=np.int64).reshape(-1, 1)
    n = A.shape[1]
    if q == 2:
        return _solve_gf2(A, b.ravel(), n)
    R, pivots = rref(np.hstack([A % q, b % q]), q)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, p in enumerate(pivots):
        x[p] = R[i, n]
    return x


def _solve_gf2(A: np.ndarray, b: np.ndarray, n: int):
    # bit 0 holds the right-hand side, bit k+1 holds variable k
    space = RowSpace(2)
    for row, r in zip(A & 1, b & 1):
        v = (pack_bits(row) << 1) | int(r)
        if space.reduce(v) == 1:
            return None
        space.add(v)
    x = np.zeros(n, dtype=np.int64)
    bits = 0
    for top in sorted(space._basis):
        row = space._basis[top]
        rest = row ^ (1 << top)
        val = (rest & 1) ^ (bin((rest >> 1) & bits).count("1") & 1)
        x[top - 1] = val
        if val:
            bits |= 1 << (top - 1)
    return x
