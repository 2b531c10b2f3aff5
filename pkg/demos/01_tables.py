"""
Billiard tables and their mean collision time
=============================================

Regular polygons inscribed in a circle of radius r, the circle itself,
and the Sinai square with a central disk.
"""

import math

from polybilliards import Circle, Polygon, Sinai, build_table, make_opening

# tau_c = pi A / P, the mean free flight time of a uniform ensemble
for spec in [Polygon(3), Polygon(4), Polygon(5), Polygon(64), Circle(), Sinai(1.0, 0.25)]:
    t = build_table(spec)
    print(f"{str(spec):24s} A={t.area:.6f}  P={t.perimeter:.6f}  tau_c={t.tau_c:.6f}")

# polygons approach the circle from below
print("tau_c(m) / tau_c(circle):", [round(build_table(Polygon(m)).tau_c / (math.pi / 2), 6) for m in (8, 32, 128)])

# an opening is an arclength window on the boundary
sq = build_table(Polygon(4))
op = make_opening(sq, 0.1, "vertex:1")
print("opening around vertex 1:", op.s_lo, "..", op.s_lo + op.width)
