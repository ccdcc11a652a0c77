"""Directional entropy rates and the Pinsker proxy.

For the fair coin every strip site is a fresh bit, so the entropy of the
zero-coordinate partition over a strip is its size.  The three-dot system
has zero two-dimensional entropy but positive directional entropy.
"""

from fractions import Fraction

from direntropy.entropy import PartitionSpec, directional_entropy_rate, pinsker_membership_proxy
from direntropy.lattice import DirectionSpec
from direntropy.measures import MeasureModel
from direntropy.systems import SystemSpec

golden = DirectionSpec.golden()
fair = MeasureModel.uniform(2)
td = SystemSpec.three_dot()
haar = MeasureModel.haar(td)
Z = PartitionSpec.zero_coordinate()

for b in (Fraction(1, 2), Fraction(1), Fraction(3)):
    coin = directional_entropy_rate(fair, None, Z, golden, b, 128)
    dot = directional_entropy_rate(haar, td, Z, golden, b, 128)
    print("b=%-4s coin %.4f bits/col, three-dot %.4f +- %.4f bits/col"
          % (b, coin.rate, dot.rate, dot.slope_se))

# the set {x00 + x01 + x10 = 0} is the whole space under three-dot
for part in (Z, PartitionSpec.parity([(0, 0), (0, 1), (1, 0)])):
    labels = [pinsker_membership_proxy(haar, td, part, golden, b, 64) for b in (Fraction(1, 2), 1, 3)]
    print("%-12s %s" % (part.name, labels))
