"""Strips along an irrational direction.

The slope is replaced by a continued-fraction convergent whose denominator
exceeds every column index we touch, so all floors below are exact.
"""

from fractions import Fraction

from direntropy.lattice import DirectionSpec, StripParams, digital_line, strip
from direntropy.skewprod import cocycle_exponent, sandwich_check

golden = DirectionSpec.golden(horizon=1000)
print("beta =", golden.beta, "horizon =", golden.horizon)

# the unit strip over five columns holds 2N+1 sites
lam = strip(golden, StripParams(1, 5))
print(len(lam), "sites:", lam.sites)

# every column holds floor(2b) or floor(2b)+1 sites
for b in (Fraction(1, 2), Fraction(1), Fraction(7, 3)):
    counts = set(strip(golden, StripParams(b, 400)).column_counts().values())
    print("b=%s column counts %s" % (b, sorted(counts)))

# the rotation cocycle walks one row of the strip per column
t = Fraction(1, 3)
print([cocycle_exponent(golden, t, i).vec for i in range(6)])
print("sandwich holds up to N=1000:", sandwich_check(golden, t, 1000))

# a digital line and its vertical thickening bracket the unit strip
line = digital_line(golden, t, 50)
thick = digital_line(golden, t, 50, offsets=(-1, 0, 1))
unit = strip(golden, StripParams(1, 50))
print(line.issubset(unit), unit.issubset(thick))
