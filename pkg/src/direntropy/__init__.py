"""Directional entropy along irrational lines for Z^2 symbolic systems.

Modules, bottom up: ``lattice`` (exact strips), ``systems`` (subshifts and
windows), ``measures`` (exact marginals and samplers), ``entropy`` (block
entropy and directional rates), ``skewprod`` (rotation skew product),
``chaos_tuples`` (strip-averaged distances and entropy tuples), ``cli``.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .lattice import DirectionSpec, ShapeSet, StripParams, box, rectangle, strip
from .systems import CARule, ConfigWindow, PatternWindow, SystemKind, SystemSpec, config_distance, validate
from .measures import MeasureModel, Rect, pattern_prob, projection_count, sample_config
from .entropy import PartitionSpec, directional_entropy_rate, pinsker_membership_proxy, shape_entropy
from .skewprod import cocycle_exponent, fiber_entropy_estimate, sandwich_check
from .chaos_tuples import (
    TupleObservation,
    asymptotic_test,
    chaos_averages,
    density_probe,
    entropy_tuple_certify,
    lambda_n_product,
)
