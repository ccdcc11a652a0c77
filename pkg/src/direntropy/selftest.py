"""Quick invariant checks run by ``direntropy selftest``.

Each check returns True when the identity holds.  Sizes are kept small so
the whole suite finishes in a few seconds.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .chaos_tuples import TupleObservation, asymptotic_test, chaos_averages
from .entropy import PartitionSpec, directional_entropy_rate, pinsker_membership_proxy, shape_entropy
from .lattice import DirectionSpec, ShapeSet, StripParams, strip, strip_bounds
from .measures import MeasureModel, Rect, projection_count, sample_config
from .skewprod import cocycle_exponent, fiber_directional_check, phase_ladder, rotate, sandwich_check
from .systems import SystemSpec, validate_window


def _column_counts(direction: DirectionSpec) -> bool:
    for b in (Fraction(1, 2), Fraction(1), Fraction(7, 5), Fraction(3)):
        lo, hi = strip_bounds(direction, b, min(direction.horizon, 256))
        c = hi - lo + 1
        f = int(2 * b)
        if not np.all((c == f) | (c == f + 1)):
            return False
    return True


def _cocycle(direction: DirectionSpec) -> bool:
    N = min(direction.horizon, 64)
    for t in phase_ladder(4, 1):
        for i in range(0, N, 7):
            for j in range(0, N - i, 5):
                lhs = cocycle_exponent(direction, t, i + j).vec
                rhs = cocycle_exponent(direction, t, i) + cocycle_exponent(direction, rotate(direction, t, i), j)
                if lhs != rhs:
                    return False
    return True


def _sandwich(direction: DirectionSpec) -> bool:
    N = min(direction.horizon, 64)
    return all(sandwich_check(direction, t, N) for t in [Fraction(0), Fraction(3, 7)] + phase_ladder(4, 2))


def _rank_oracle() -> bool:
    spec = SystemSpec.three_dot()
    box = [(m, n) for m in range(3) for n in range(3)]
    valid = [v for v in itertools.product((0, 1), repeat=9)
             if all((v[3 * m + n] + v[3 * (m + 1) + n] + v[3 * m + n + 1]) % 2 == 0 for m in range(2) for n in range(2))]
    V = np.array(valid)
    rng = np.random.default_rng(5)
    for _ in range(40):
        mask = rng.integers(0, 2, 9).astype(bool)
        if not mask.any():
            continue
        shape = ShapeSet(tuple(s for s, k in zip(box, mask) if k))
        cols = [box.index(s) for s in shape.sites]
        count = len({tuple(r) for r in V[:, cols].tolist()})
        if 2 ** projection_count(spec, shape).free_dim != count:
            return False
    return True


def _bernoulli_identity(direction: DirectionSpec) -> bool:
    U = MeasureModel.uniform(2)
    z = PartitionSpec.zero_coordinate()
    for b in (Fraction(1, 2), 1, 3):
        for N in (1, 7, 32):
            if shape_entropy(U, None, strip(direction, StripParams(b, N)), z) != len(strip(direction, StripParams(b, N))):
                return False
    return True


def _haar_sampler() -> bool:
    spec = SystemSpec.three_dot()
    H = MeasureModel.haar(spec)
    return all(validate_window(spec, sample_config(H, Rect(0, 0, 16, 8), 42, stream=k)) for k in range(4))


def _fiber(direction: DirectionSpec) -> bool:
    spec = SystemSpec.three_dot()
    res = fiber_directional_check(MeasureModel.haar(spec), spec, PartitionSpec.zero_coordinate(), direction,
                                  min(direction.horizon, 64), 4, 0)
    return bool(res["agree"])


def _b_robust(direction: DirectionSpec) -> bool:
    spec = SystemSpec.three_dot()
    H = MeasureModel.haar(spec)
    N = min(direction.horizon, 48)
    for part in (PartitionSpec.zero_coordinate(), PartitionSpec.parity([(0, 0), (1, 0), (0, 1)])):
        verdicts = {pinsker_membership_proxy(H, spec, part, direction, b, N) for b in (Fraction(1, 2), 1, 3)}
        if len(verdicts) != 1:
            return False
    return True


def _chaos(direction: DirectionSpec) -> bool:
    U = MeasureModel.uniform(2)
    rect = Rect(-6, -8, 60, 50)
    x = sample_config(U, rect, 3, stream=0)
    y = sample_config(U, rect, 3, stream=1)
    a = chaos_averages(TupleObservation((x, y), 3), direction, 1, 32)
    b = chaos_averages(TupleObservation((y, x), 3), direction, 1, 32)
    same = a.prox == a.sep == b.prox == b.sep
    origin = ShapeSet(((0, 0),))
    y0 = x.with_values(origin, [1 - x.values(origin)[0]])
    t = TupleObservation((x, y0), 3)
    robust = asymptotic_test(t, direction, 5, 1 / 8, 1, 20) == asymptotic_test(t, direction, 5, 1 / 8, 3, 20) is True
    return same and robust


def checks(cfg) -> list:
    d = cfg.direction
    return [
        ("strip_column_counts", lambda: _column_counts(d)),
        ("cocycle_additivity", lambda: _cocycle(d)),
        ("sandwich_inclusions", lambda: _sandwich(d)),
        ("rank_oracle_3x3", _rank_oracle),
        ("bernoulli_strip_entropy", lambda: _bernoulli_identity(d)),
        ("haar_sampler_validity", _haar_sampler),
        ("fiber_vs_directional", lambda: _fiber(d)),
        ("pinsker_proxy_b_robust", lambda: _b_robust(d)),
        ("chaos_pair_symmetry", lambda: _chaos(d)),
    ]
