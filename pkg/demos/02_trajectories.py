"""
Single trajectories
===================

Event-driven flights between specular reflections.
"""

import math

import numpy as np

from polybilliards import Circle, ParticleState, Polygon, build_table, trace

circle = build_table(Circle())
pentagon = build_table(Polygon(5))

# a circle chord keeps its collision angle forever
state = ParticleState.from_angle(0.3, -0.2, 1.1)
events, _ = trace(circle, state, 200)
phis = np.array([e.angle for e in events])
print("circle: collision angle spread over 200 hits:", np.ptp(phis))

# in a rational polygon a trajectory only ever uses finitely many directions
events, states = trace(pentagon, state, 2000)
dirs = {round(math.atan2(s.direction[1], s.direction[0]), 9) for s in states}
print("pentagon: distinct directions in 2000 flights:", len(dirs), "(at most 10)")

for e in events[:5]:
    print(f"  t={e.time:8.4f}  side={e.segment}  phi={e.angle:+.4f}")
