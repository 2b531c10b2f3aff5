"""
Closed-form collision laws
==========================

Circle density, the regular-orbit polygon density, and the regular-orbit
collision time with its grazing divergence.
"""

import numpy as np

from polybilliards import CircleCollisionLaw, PolygonCollisionLaw, RegularOrbitParams
from polybilliards.oracles import regular_orbit_collision_time, sliding_relaxation_time, vortex_relaxation_time

law = CircleCollisionLaw(t=np.pi / 2 * 10)  # mean count 10
n = np.array([7.86, 8.0, 9.0, 10.0, 15.0, 30.0])
print("circle, n_c = 10")
print("  pdf:", np.round(law.pdf(n), 5))
print("  cdf:", np.round(law.cdf(n), 5))

for m in (5, 6, 15, 100):
    p = RegularOrbitParams.for_m(m)
    lo, hi = p.band
    print(f"m={m:3d}  phi_c={p.phi_c:.4f}  psi={p.psi:.4f}  band n/n_cm in [{lo:.5f}, {hi:.5f}]")

p = RegularOrbitParams.for_m(5)
phi = np.array([0.0, 0.5, 1.0, 1.5, 1.57])
print("pentagon t_reg(phi):", np.round(regular_orbit_collision_time(p, 1.0, phi), 3))
print("sliding relaxation:", sliding_relaxation_time(p, 1.0), " vortex relaxation:", vortex_relaxation_time(p, 1.0))
print("polygon m=15 law support at t=100:", PolygonCollisionLaw(100.0, 15).support)
