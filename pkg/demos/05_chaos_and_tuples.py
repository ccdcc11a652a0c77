"""Strip-averaged distances, asymptotic pairs and entropy tuples.

A pair differing at one site is asymptotic but its strip average only
decays like 1/N.  Independent pairs stay separated.  Entropy pairs are
certified from the product measure of their cylinders and the rate of the
partition they induce, and the density probe finds asymptotic pairs inside
sampled neighbourhoods.
"""

from fractions import Fraction

from direntropy.chaos_tuples import (
    CylinderSet,
    TupleObservation,
    asymptotic_test,
    chaos_averages,
    density_probe,
    entropy_tuple_certify,
)
from direntropy.lattice import DirectionSpec, ShapeSet
from direntropy.measures import MeasureModel, Rect, sample_config
from direntropy.systems import SystemSpec

golden = DirectionSpec.golden()
fair = MeasureModel.uniform(2)
R = 4
rect = Rect(-5, -7, 266, 175)
origin = ShapeSet(((0, 0),))

x = sample_config(fair, rect, seed=1)
y = x.with_values(origin, [1 - x.values(origin)[0]])
z = sample_config(fair, rect, seed=2)
for N in (16, 64, 256):
    near = chaos_averages(TupleObservation((x, y), R), golden, 1, N)
    far = chaos_averages(TupleObservation((x, z), R), golden, 1, N)
    print("N=%3d  one-site pair %.4f (floor %.4f)   independent pair %.4f" % (N, near.prox, near.floor, far.sep))
print("one-site pair asymptotic from column 5:", asymptotic_test(TupleObservation((x, y), R), golden, 5, 2.0**-R))

u0 = CylinderSet(origin, frozenset([(0,)]))
u1 = CylinderSet(origin, frozenset([(1,)]))
print(entropy_tuple_certify(fair, None, [u0, u1], golden, Fraction(1, 2), 16, 1e-4, trivial_pinsker=True).kind)
print(entropy_tuple_certify(fair, None, [u0, u0], golden, Fraction(1, 2), 16, 1e-4, trivial_pinsker=True).kind)

td = SystemSpec.three_dot()
rep = density_probe(MeasureModel.haar(td), td, golden, 10, seed=3, trivial_pinsker=True)
print("three-dot probe: %d/%d neighbourhoods hold a verified asymptotic pair" % (rep["found"], rep["budget"]))
