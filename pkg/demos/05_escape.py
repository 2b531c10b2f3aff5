"""
Escape through a small opening
==============================

S(t) decays like (tau_e / t)^delta.  In polygons whose side count is well
below 2 pi r / Delta the decay exponent is close to 1; beyond it the
secondary channel takes over.
"""

import warnings

from polybilliards import (
    Circle,
    EnsembleConfig,
    Polygon,
    build_table,
    crossover_m_alpha,
    decay_exponent,
    default_survival_grid,
    make_opening,
    mean_escape_time,
    run_open,
    survival_curve,
)

warnings.simplefilter("ignore")  # openings above P/100 warn
N = 20_000

for spec, width in [(Circle(), 0.05), (Polygon(8), 0.2), (Polygon(16), 0.2), (Polygon(64), 0.2)]:
    table = build_table(spec)
    tau_e = mean_escape_time(table, width)
    t_max = 100 * tau_e
    rec = run_open(table, make_opening(table, width), EnsembleConfig(N, 7, t_max))
    curve = survival_curve(rec, default_survival_grid(tau_e, t_max))
    delta, fit = decay_exponent(curve)
    print(f"{str(spec):20s} width={width}  tau_e={tau_e:8.2f}  S(t_max)={curve.S[-1]:.4f}  delta={delta:.3f}")

print("m_alpha for width 0.2:", crossover_m_alpha(1.0, 0.2).nearest)
