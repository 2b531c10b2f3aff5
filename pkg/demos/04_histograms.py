"""
Collision histograms against the analytic laws
==============================================

For the circle the count distribution at time t has a closed form.
Box binning integrates the density over [n - 1/2, n + 1/2]; phase binning
accounts for the count being floor(t / c + U) with a uniform phase U.
"""

from polybilliards import Circle, CircleCollisionLaw, EnsembleConfig, build_table, collision_histogram
from polybilliards import histogram_vs_oracle

table = build_table(Circle())
t = 100 * table.tau_c
hist = collision_histogram(table, EnsembleConfig(20_000, 7, t), t)
law = CircleCollisionLaw(t)

for binning in ("box", "phase"):
    rep = histogram_vs_oracle(hist, law, binning=binning)
    print(f"{binning:5s} binning: TV = {rep.tv:.4f}")

rep = histogram_vs_oracle(hist, law, binning="phase")
print("  n   empirical  oracle")
# rows around the lower support edge pi n_c / 4
edge = law.support[0]
for n, e, o in zip(rep.n, rep.empirical, rep.oracle):
    if edge - 3 <= n <= edge + 12:
        print(f"{n:4d}   {e:.4f}    {o:.4f}")
