"""
Curvature of a few small networks
=================================

Edge curvature compares the degrees at both ends of an edge with how much
of the edge's length is "used" by the network as a resistor. This script
prints edge and vertex curvatures for the named graphs in the gallery.
"""

from fractions import Fraction

import numpy as np

from ricci_foster import curvature_report, gallery

# A tree: every edge is a bridge, so only degrees matter.
tree = gallery.branched_tree()
rep = curvature_report(tree)
print("branched tree")
for e, k in zip(tree.edges, rep.curvature):
    print(f"  {e.id}: K = {Fraction(float(k)).limit_denominator(100)}")

# The house graph has a 4-cycle and a triangle sharing the edge 4-3.
house = gallery.house()
rep = curvature_report(house)
print("\nhouse")
for e, k, f in zip(house.edges, rep.curvature, rep.foster):
    print(f"  {e.id}: K = {k:+.4f}   Foster = {f:.4f}")

# Curvatures always sum to one, and Foster coefficients to the cycle rank.
print(f"  sum K = {rep.total:.12f}, sum F = {rep.foster.sum():.12f}")

# Vertex (scalar) curvature collects the arcs leaving each vertex.
print("  scalar:", {v: round(p, 4) for v, p in rep.scalar.items()})

# On a cycle, K is proportional to length.
c = gallery.cycle([1.0, 2.0, 3.0, 4.0])
k = curvature_report(c).curvature
print("\ncycle K / l:", np.round(k / c.lengths, 12))
