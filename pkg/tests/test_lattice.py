from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from direntropy.errors import CoverInfeasible, HorizonExceeded, InvalidPhase
from direntropy.lattice import (
    DirectionSpec,
    ShapeSet,
    StripParams,
    cover_translates,
    digital_line,
    floor_affine,
    rasterize_tube,
    strip,
    strip_bounds,
    strip_contains,
    tube_bound,
)

from oracles import strip_sites


def test_golden_convergent(golden):
    assert (golden.beta_num, golden.beta_den) == (987, 1597)
    assert golden.beta_den > golden.horizon


def test_direction_validation():
    with pytest.raises(ValueError):
        DirectionSpec(3, 2, 1)
    with pytest.raises(ValueError):
        DirectionSpec(2, 4, 3)
    with pytest.raises(ValueError):
        DirectionSpec(987, 1597, 1597)
    d = DirectionSpec.from_continued_fraction([1, 2, 3, 4, 5, 6], 50)
    assert d.beta_den > 50


def test_floor_affine_examples(golden):
    assert floor_affine(golden, 0, 4) == 2
    assert floor_affine(golden, Fraction(1, 2), 1) == 1
    with pytest.raises(HorizonExceeded):
        floor_affine(golden, 0, golden.horizon + 1)
    with pytest.raises(InvalidPhase):
        floor_affine(golden, 1, 3)


def test_strip_examples(golden):
    assert len(strip(golden, StripParams(1, 5))) == 11
    assert strip(golden, StripParams(Fraction(2, 5), 1)).sites == ((0, 0),)
    assert len(strip(golden, StripParams(1, 1))) == 3
    assert strip_contains(golden, 1, (2, 1))
    assert not strip_contains(golden, 1, (2, 3))


@pytest.mark.parametrize("b", [Fraction(1, 2), Fraction(1), Fraction(7, 3), Fraction(3)])
def test_strip_matches_oracle(golden, b):
    for N in (1, 2, 13, 40):
        assert set(strip(golden, StripParams(b, N)).sites) == strip_sites(golden.beta, b, N)


def test_unit_strip_size(golden):
    for N in (64, 128, 256):
        assert len(strip(golden, StripParams(1, N))) == 2 * N + 1


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=Fraction(1, 10), max_value=5), st.integers(1, 300))
def test_column_counts(b, N):
    d = DirectionSpec.golden()
    lo, hi = strip_bounds(d, b, N)
    counts = hi - lo + 1
    f = int(np.floor(2 * b))
    assert np.all((counts == f) | (counts == f + 1))


def test_strip_bounds_offset_start(golden):
    lo, hi = strip_bounds(golden, 1, 10, start=-5)
    lo0, hi0 = strip_bounds(golden, 1, 5, start=0)
    assert np.array_equal(lo[5:], lo0) and np.array_equal(hi[5:], hi0)


def test_cover_translates(golden):
    assert cover_translates(golden, 1, 1, 10).sites == ((0, 0),)
    assert cover_translates(golden, 3, 1, 10).sites == ((0, -2), (0, 0), (0, 2))
    with pytest.raises(CoverInfeasible):
        cover_translates(golden, 1, Fraction(1, 3), 10)


def test_cover_is_a_cover(golden):
    for b1, b2 in [(3, Fraction(1, 2)), (Fraction(5, 2), 1), (1, 2)]:
        cover = cover_translates(golden, b1, b2, 30)
        for m, n in strip(golden, StripParams(b1, 30)):
            assert any(strip_contains(golden, b2, (m, n - k)) for _, k in cover)


def test_digital_line(golden):
    line = digital_line(golden, 0, 5, offsets=(-1, 0, 1))
    assert len(line) == 15
    assert (4, 2) in line


def test_tube_inside_strip(golden):
    base = [(0, 0), (Fraction(1, 2), Fraction(3, 2)), (2, -1)]
    for length in (0, 3, Fraction(17, 2)):
        b, N, shift = tube_bound(golden, base, length)
        shifted = [(l + shift[0], k + shift[1]) for l, k in base]
        tube = rasterize_tube(golden, shifted, length)
        assert tube.issubset(strip(golden, StripParams(b, N)))


def test_shapeset_ops():
    a = ShapeSet(((1, 0), (0, 0), (0, 0)))
    assert a.sites == ((0, 0), (1, 0))
    assert len(a.minkowski(ShapeSet(((0, 0), (0, 1))))) == 4
    assert a.translate((2, 3)).bbox() == (2, 3, 3, 3)
    assert ShapeSet.from_json(a.to_json()) == a
    assert a.minkowski(ShapeSet()) == ShapeSet()
