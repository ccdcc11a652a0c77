import itertools
import warnings

import numpy as np
import pytest

from direntropy.errors import MarginTooSmall, UnsupportedShape
from direntropy.lattice import ShapeSet, rectangle
from direntropy.measures import (
    MeasureModel,
    Rect,
    pattern_prob,
    pattern_probs,
    projection_count,
    rng,
    sample_config,
    check_invariance,
)
from direntropy.systems import CARule, PatternWindow, SystemSpec, validate_window

from oracles import three_dot_valid_box

L_SHAPE = ShapeSet(((0, 0), (1, 0), (0, 1)))


def test_projection_examples(three_dot):
    assert projection_count(three_dot, L_SHAPE).free_dim == 2
    assert projection_count(three_dot, rectangle(2, 2)).free_dim == 3
    assert projection_count(three_dot, ShapeSet(((0, 0),))).free_dim == 1
    cert = projection_count(three_dot, rectangle(2, 2))
    assert cert.count == 8 and cert.constraint_rows == 1 and cert.raw_free_dim == 3


def test_projection_nonconvex_uses_bounding_box(three_dot):
    # two far corners of a 3x3 box: no constraint fits in the shape, and both
    # corners are still independent once the box is taken into account
    shape = ShapeSet(((0, 0), (2, 2)))
    valid = three_dot_valid_box(3, 3)
    count = len({(r[0], r[8]) for r in valid.tolist()})
    cert = projection_count(three_dot, shape)
    assert 2**cert.free_dim == count
    assert cert.free_dim <= cert.raw_free_dim


def test_projection_random_shapes_against_enumeration(three_dot):
    valid = three_dot_valid_box(3, 4)
    sites = [(m, n) for m in range(3) for n in range(4)]
    gen = np.random.default_rng(2)
    for _ in range(60):
        mask = gen.integers(0, 2, len(sites)).astype(bool)
        if not mask.any():
            continue
        shape = ShapeSet(tuple(s for s, k in zip(sites, mask) if k))
        cols = [sites.index(s) for s in shape.sites]
        count = len({tuple(r) for r in valid[:, cols].tolist()})
        for method in ("propagation", "box"):
            assert 2 ** projection_count(three_dot, shape, method).free_dim == count


def test_projection_general_constraint_box_path():
    # two sites in the top row: no single-site propagator
    spec = SystemSpec.algebraic([((0, 0), 1), ((0, 1), 1), ((1, 1), 1)], 2)
    assert spec.propagator is None
    shape = rectangle(3, 2)
    sites = shape.sites
    count = 0
    for bits in itertools.product((0, 1), repeat=6):
        x = dict(zip(sites, bits))
        count += all((x[(m, 0)] + x[(m, 1)] + x[(m + 1, 1)]) % 2 == 0 for m in range(2))
    assert 2 ** projection_count(spec, shape).free_dim == count == 16


def test_pattern_prob_examples(fair, haar):
    for k in (1, 4, 9):
        shape = rectangle(k, 1)
        assert pattern_prob(fair, PatternWindow(shape, (1,) * k)) == 2.0**-k
    assert pattern_prob(haar, PatternWindow(L_SHAPE, (1, 1, 0))) == 0.25
    assert pattern_prob(haar, PatternWindow(L_SHAPE, (1, 0, 0))) == 0.0


def _panel(three_dot):
    return [
        MeasureModel.bernoulli([0.3, 0.7]),
        MeasureModel.bernoulli([0.2, 0.5, 0.3]),
        MeasureModel.row_markov([[0.9, 0.1], [0.3, 0.7]]),
        MeasureModel.haar(three_dot),
        MeasureModel.haar(SystemSpec.algebraic([((0, 0), 1), ((1, 0), 2), ((0, 1), 1)], 3)),
    ]


@pytest.mark.parametrize("shape", [rectangle(3, 2), L_SHAPE, rectangle(4, 3), ShapeSet(((0, 0), (1, 0), (2, 1), (3, 1)))])
def test_probabilities_sum_to_one(three_dot, shape):
    for m in _panel(three_dot):
        P = np.array(list(itertools.product(range(m.q), repeat=len(shape))))
        if m.q**len(shape) > 5000:
            continue
        assert pattern_probs(m, shape, P).sum() == pytest.approx(1.0, abs=1e-12)


def test_empirical_sums_to_one(three_dot):
    samples = [sample_config(MeasureModel.haar(three_dot), Rect(0, 0, 6, 6), 9, stream=k) for k in range(5)]
    emp = MeasureModel.empirical(samples)
    P = np.array(list(itertools.product((0, 1), repeat=4)))
    assert pattern_probs(emp, rectangle(2, 2), P).sum() == pytest.approx(1.0)


def test_translation_invariance(three_dot):
    shape = ShapeSet(((0, 0), (1, 0), (1, 1)))
    P = np.array(list(itertools.product((0, 1), repeat=3)))
    for m in _panel(three_dot):
        if m.q != 2:
            continue
        base = pattern_probs(m, shape, P)
        moved = pattern_probs(m, shape.translate((5, -3)), P)
        assert np.allclose(base, moved, atol=1e-15)


def test_row_markov_rejects_gaps():
    m = MeasureModel.row_markov([[0.9, 0.1], [0.3, 0.7]])
    with pytest.raises(UnsupportedShape):
        pattern_prob(m, PatternWindow(ShapeSet(((0, 0), (2, 0))), (0, 1)))
    assert np.allclose(m.stationary @ m.transition, m.stationary, atol=1e-10)


def test_bernoulli_normalisation():
    with pytest.raises(ValueError):
        MeasureModel.bernoulli([0.5, 0.6])
    m = MeasureModel.bernoulli([0.25, 0.75 + 1e-13])
    assert m.probs.sum() == pytest.approx(1.0, abs=1e-15)


def test_sampler_examples(three_dot):
    pm = MeasureModel.point_mass()
    assert not sample_config(pm, Rect(0, 0, 5, 7), 123).data.any()
    H = MeasureModel.haar(three_dot)
    x = sample_config(H, Rect(0, 0, 16, 8), 42)
    assert validate_window(three_dot, x)
    assert x == sample_config(H, Rect(0, 0, 16, 8), 42)
    assert not (x == sample_config(H, Rect(0, 0, 16, 8), 43))
    with pytest.raises(MarginTooSmall):
        sample_config(H, Rect(0, 0, 16, 8), 42, base_width=16)
    assert sample_config(H, Rect(0, 0, 16, 8), 42, base_width=24) == x


def test_rng_streams_independent_of_order():
    a = rng(5, 1).integers(0, 1 << 30, 4)
    rng(5, 0).integers(0, 1 << 30, 100)
    assert np.array_equal(a, rng(5, 1).integers(0, 1 << 30, 4))


@pytest.mark.parametrize("which", [0, 2, 3])
def test_sampler_consistency(three_dot, which):
    m = _panel(three_dot)[which]
    n = 100_000
    shape = ShapeSet(((0, 0), (1, 0), (0, 1)))
    pats = [(0, 0, 0), (1, 1, 0), (0, 1, 1), (1, 0, 1)]
    counts = dict.fromkeys(pats, 0)
    for k in range(n):
        v = tuple(sample_config(m, Rect(0, 0, 2, 2), 2024, stream=k).values(shape).tolist())
        if v in counts:
            counts[v] += 1
    for p in pats:
        pr = pattern_prob(m, PatternWindow(shape, p))
        se = np.sqrt(pr * (1 - pr) / n)
        assert abs(counts[p] / n - pr) <= 4 * se + 1e-12


def test_invariance_check_flags_drift():
    spec = SystemSpec.second_order_ca(CARule.linear((1, 0, 1), 2))
    assert check_invariance(MeasureModel.uniform(2), spec, n_samples=300)
    with pytest.warns(UserWarning):
        assert not check_invariance(MeasureModel.bernoulli([0.9, 0.1]), spec, n_samples=300)
