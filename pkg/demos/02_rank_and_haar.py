"""Counting patterns of the three-dot system with GF(2) ranks.

Projections of an algebraic subshift onto a finite shape form a subspace,
so the number of patterns is 2**free_dim and the Haar measure is uniform on
them.  We check the rank count against brute force and draw a sample.
"""

import itertools

import numpy as np

from direntropy.lattice import ShapeSet, rectangle
from direntropy.measures import MeasureModel, Rect, projection_count, sample_config
from direntropy.systems import SystemSpec, validate_window

td = SystemSpec.three_dot()

shapes = {
    "2x2 square": rectangle(2, 2),
    "3x3 square": rectangle(3, 3),
    "two corners of 3x3": ShapeSet(((0, 0), (2, 2))),
    "horizontal 6-run": rectangle(6, 1),
}
for name, shape in shapes.items():
    cert = projection_count(td, shape)
    print("%-20s free_dim=%d count=%d (%s)" % (name, cert.free_dim, cert.count, cert.method))

# brute force on a 3x3 box
valid = []
for bits in itertools.product((0, 1), repeat=9):
    x = np.array(bits).reshape(3, 3)
    if not np.any((x[:-1, :-1] + x[1:, :-1] + x[:-1, 1:]) % 2):
        valid.append(bits)
print("3x3 valid patterns by enumeration:", len(valid), "by rank:", projection_count(td, rectangle(3, 3)).count)

haar = MeasureModel.haar(td)
x = sample_config(haar, Rect(0, 0, 24, 12), seed=7)
print("sample is valid:", validate_window(td, x))
for row in x.data.T[::-1]:
    print("".join(".#"[v] for v in row))
