"""
Collision-number diffusion
==========================

The variance of the collision count grows like t^(2/z).  z = 1 is
ballistic, z = 2 normal diffusion.
"""

from polybilliards import Circle, EnsembleConfig, Polygon, Sinai, build_table, collision_moments, diffusion_exponent

N = 3000
for spec in [Circle(), Polygon(4), Polygon(5), Polygon(6), Sinai(1.0, 0.25)]:
    table = build_table(spec)
    ms = collision_moments(table, EnsembleConfig(N, 7, 1e3 * table.tau_c))
    z, err, fit = diffusion_exponent(ms)
    print(f"{str(spec):24s} mean n(t_max) tau_c/t = {ms.mean[-1] * table.tau_c / ms.t[-1]:.4f}   z = {z:.3f} +- {err:.3f}")

# the moment series can be saved and re-fitted later
ms.to_csv("sinai_moments.csv")
print("wrote sinai_moments.csv")
