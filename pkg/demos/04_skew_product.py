"""Fiber entropy of the rotation skew product.

Each phase t gives one lattice point per column.  Joining the partition
with its upward translate covers the unit strip, and the phase-averaged
fiber rate then matches the directional rate at b=1.
"""

from direntropy.entropy import PartitionSpec
from direntropy.lattice import DirectionSpec
from direntropy.measures import MeasureModel
from direntropy.skewprod import fiber_directional_check, fiber_entropy_estimate, phase_ladder
from direntropy.systems import SystemSpec

golden = DirectionSpec.golden()
td = SystemSpec.three_dot()
haar = MeasureModel.haar(td)
Z = PartitionSpec.zero_coordinate()

print("phases:", [str(t) for t in phase_ladder(4)])

one = fiber_entropy_estimate(haar, td, Z, golden, 128, 8)
print("single layer: %.4f bits/col (spread %.2g)" % (one.mean_rate, one.phase_spread))

res = fiber_directional_check(haar, td, Z, golden, 128, 8)
print("two layers:   %.5f bits/col" % res["fiber_rate"])
print("strip b=1:    %.5f bits/col" % res["directional_rate"])
print("difference %.2e within tolerance %.2e: %s" % (res["difference"], res["tolerance"], res["agree"]))
