"""Rotation-base skew product: cocycle exponents, fiber entropy and the sandwich check.

The base rotation ``t -> t + beta (mod 1)`` is never iterated numerically.
Only the exponent ``(i, floor(i*beta + t))`` of the composed fiber map is
needed, and it is computed in exact rationals.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .entropy import (
    EntropyCurve,
    EntropyEstimate,
    PartitionSpec,
    column_ladder,
    directional_entropy_rate,
    entropy_curve,
    fit_rate,
)
from .errors import InvalidPhase, InvariantViolation
from .lattice import DirectionSpec, StripParams, as_rational, floor_affine, strip
from .measures import MeasureModel
from .systems import SystemSpec

__all__ = [
    "CocycleExponent",
    "FiberEntropyReport",
    "cocycle_exponent",
    "phase_ladder",
    "exponent_columns",
    "fiber_entropy_estimate",
    "sandwich_check",
    "fiber_directional_check",
]

PLASTIC_STEP = Fraction("0.7548776662")
PHASE_DEN = 10**6


def _phase(t) -> Fraction:
    t = as_rational(t)
    if not 0 <= t < 1:
        raise InvalidPhase("phase %s not in [0,1)" % t)
    return t


@dataclass(frozen=True)
class CocycleExponent:
    i: int
    t: Fraction
    vec: tuple[int, int]

    def __add__(self, other: "CocycleExponent") -> tuple[int, int]:
        return (self.vec[0] + other.vec[0], self.vec[1] + other.vec[1])


def cocycle_exponent(direction: DirectionSpec, t, i: int) -> CocycleExponent:
    """Exponent of the i-fold composed fiber map at phase t."""
    t = _phase(t)
    if i < 0:
        raise ValueError("i must be nonnegative")
    direction.check_index(i)
    return CocycleExponent(i, t, (i, floor_affine(direction, t, i)))


def rotate(direction: DirectionSpec, t, i: int) -> Fraction:
    s = as_rational(t) + i * direction.beta
    return s - math.floor(s)


def phase_ladder(count: int, seed: int = 0) -> list[Fraction]:
    """Low-discrepancy phases frac(k*gamma), truncated to denominator 10**6."""
    if count < 1:
        raise ValueError("phase_count must be at least 1")
    out = []
    for j in range(count):
        s = (int(seed) + j + 1) * PLASTIC_STEP
        frac = s - math.floor(s)
        out.append(Fraction(math.floor(frac * PHASE_DEN), PHASE_DEN))
    return out


def exponent_columns(direction: DirectionSpec, t, N: int) -> list[list[tuple[int, int]]]:
    t = _phase(t)
    direction.check_index(N)
    return [[(i, floor_affine(direction, t, i))] for i in range(N)]


@dataclass(frozen=True)
class FiberEntropyReport:
    per_phase: tuple[tuple[Fraction, EntropyEstimate], ...]
    mean_rate: float
    phase_spread: float
    mean_curve: EntropyCurve
    mean_se: float
    layers: int = 1

    def to_dict(self) -> dict:
        return {
            "mean_rate": self.mean_rate,
            "mean_se": self.mean_se,
            "phase_spread": self.phase_spread,
            "unit": "bits/col",
            "layers": self.layers,
            "fit_window": list(self.per_phase[0][1].fit_window),
            "per_phase": [{"t": str(t), "rate": e.rate, "slope_se": e.slope_se} for t, e in self.per_phase],
        }


def fiber_entropy_estimate(
    m: MeasureModel,
    spec: SystemSpec | None,
    part: PartitionSpec,
    direction: DirectionSpec,
    N_max: int,
    phase_count: int,
    seed: int = 0,
    layers: int = 1,
    threads: int = 1,
) -> FiberEntropyReport:
    """Fiber entropy rate of the join over the exponent sets at a ladder of phases.

    ``layers > 1`` joins the partition with its vertical translates, which
    thickens each exponent set into a column of ``layers`` sites.  The mean
    rate is the slope of the phase-averaged curve.
    """
    direction.check_index(N_max)
    lifted = part.lift(layers)
    Ns = column_ladder(N_max)
    window = ((N_max + 1) // 2, N_max)
    phases = phase_ladder(phase_count, seed)

    def one(t):
        curve = entropy_curve(m, spec, lifted, exponent_columns(direction, t, N_max), Ns, 0)
        rate, se = fit_rate(curve, window)
        return t, EntropyEstimate(rate, window, se, curve)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            per = list(ex.map(one, phases))
    else:
        per = [one(t) for t in phases]
    avg = [
        (n, float(sum(Fraction(e.curve.points[k][1]) for _, e in per) / len(per)))
        for k, n in enumerate(Ns)
    ]
    mean_curve = EntropyCurve(tuple(avg), Fraction(0), lifted.name, per[0][1].curve.method)
    rate, se = fit_rate(mean_curve, window)
    rates = [e.rate for _, e in per]
    return FiberEntropyReport(tuple(per), rate, max(rates) - min(rates), mean_curve, se, layers)


def sandwich_check(direction: DirectionSpec, t, N: int) -> bool:
    """Exponents lie in the unit strip, and the unit strip lies in their vertical 1-thickening."""
    t = _phase(t)
    direction.check_index(N)
    lam = strip(direction, StripParams(1, N))
    floors = {i: floor_affine(direction, t, i) for i in range(N)}
    inner = all((i, f) in lam for i, f in floors.items())
    outer = all(abs(n - floors[m]) <= 1 for m, n in lam.sites)
    return inner and outer


def require_sandwich(direction: DirectionSpec, t, N: int) -> None:
    if not sandwich_check(direction, t, N):
        raise InvariantViolation("sandwich inclusion failed at t=%s, N=%d" % (t, N))


def fiber_directional_check(
    m: MeasureModel,
    spec: SystemSpec | None,
    part: PartitionSpec,
    direction: DirectionSpec,
    N_max: int,
    phase_count: int = 8,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Compare the two-layer fiber rate with the unit-strip directional rate.

    The unit strip holds two sites per column, so the fiber side is taken
    with the partition joined with its upward translate.
    """
    for t in phase_ladder(phase_count, seed):
        require_sandwich(direction, t, N_max)
    fiber = fiber_entropy_estimate(m, spec, part, direction, N_max, phase_count, seed, layers=2, threads=threads)
    strip_est = directional_entropy_rate(m, spec, part, direction, 1, N_max, threads)
    diff = abs(fiber.mean_rate - strip_est.rate)
    tol = 2 * (fiber.mean_se + strip_est.slope_se)
    return {
        "fiber_rate": fiber.mean_rate,
        "fiber_se": fiber.mean_se,
        "directional_rate": strip_est.rate,
        "directional_se": strip_est.slope_se,
        "difference": diff,
        "tolerance": tol,
        "agree": diff <= tol,
        "phase_spread": fiber.phase_spread,
        "fiber": fiber,
        "directional": strip_est,
    }
