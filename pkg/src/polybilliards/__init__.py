"""Event-driven billiards in regular polygons, the circle and the Sinai table."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    Circle,
    GeometryError,
    Opening,
    Polygon,
    Sinai,
    Table,
    boundary_point,
    build_table,
    contains,
    make_opening,
    mean_collision_time,
)
from .dynamics import (  # noqa: E402
    CollisionEvent,
    Outcome,
    ParticleState,
    TrajectoryOutcome,
    advance,
    collision_angle,
    is_vertex_hit,
    next_collision,
    reflect,
    trace,
)
from .ensemble import (  # noqa: E402
    CollisionHistogram,
    EnsembleConfig,
    MomentSeries,
    collision_histogram,
    collision_moments,
    sample_initial,
    simulate,
)
from .escape import (  # noqa: E402
    EscapeRecord,
    SurvivalCurve,
    crossover_m_alpha,
    default_survival_grid,
    mean_escape_time,
    run_open,
    survival_curve,
)
from .analysis import (  # noqa: E402
    PowerLawFit,
    decay_exponent,
    diffusion_exponent,
    fit_power_law,
    histogram_vs_oracle,
)
from .oracles import (  # noqa: E402
    CircleCollisionLaw,
    DomainError,
    PolygonCollisionLaw,
    RegularOrbitParams,
    cb_collision_pdf,
    polygon_collision_pdf,
)
