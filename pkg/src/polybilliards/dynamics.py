"""Event-driven specular billiard motion at unit speed."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import _kernels as K
from .geometry import Opening, Table

__all__ = [
    "ParticleState",
    "CollisionEvent",
    "Outcome",
    "TrajectoryOutcome",
    "SimulationError",
    "DEFAULT_EVENT_CAP",
    "DEFAULT_VERTEX_TOL",
    "next_collision",
    "reflect",
    "collision_angle",
    "advance",
    "is_vertex_hit",
    "trace",
]

DEFAULT_EVENT_CAP = 10**7
DEFAULT_VERTEX_TOL = 1e-12  # relative to the table scale
FLIGHT_FLOOR = 1e-12  # relative to the table scale

_POLICIES = {"terminate": K.POLICY_TERMINATE, "bisector": K.POLICY_BISECTOR}


class SimulationError(RuntimeError):
    """Internal consistency failure (e.g. a ray that never meets the boundary)."""


class Outcome(str, Enum):
    TIME_BUDGET = "time budget reached"
    ESCAPED = "escaped"
    VERTEX = "vertex hit"
    EVENT_CAP = "event cap reached"


_STATUS = {
    K.TIME_BUDGET: Outcome.TIME_BUDGET,
    K.ESCAPED: Outcome.ESCAPED,
    K.VERTEX: Outcome.VERTEX,
    K.EVENT_CAP: Outcome.EVENT_CAP,
}


@dataclass(frozen=True)
class ParticleState:
    position: np.ndarray
    direction: np.ndarray
    time: float = 0.0
    collisions: int = 0

    @classmethod
    def from_angle(cls, x: float, y: float, theta: float, time: float = 0.0, collisions: int = 0):
        return cls(np.array([x, y], dtype=float), np.array([math.cos(theta), math.sin(theta)]), time, collisions)

    @property
    def theta(self) -> float:
        return math.atan2(self.direction[1], self.direction[0]) % (2 * math.pi)


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    position: np.ndarray
    segment: int
    angle: float
    vertex: bool
    s: float
    normal: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TrajectoryOutcome:
    reason: Outcome
    final_state: ParticleState
    counts: np.ndarray
    event_time: float | None = None  # escape / vertex / cap time

    @property
    def flagged(self) -> bool:
        return self.reason in (Outcome.VERTEX, Outcome.EVENT_CAP)


def _table_args(table: Table):
    n_lines = int(np.count_nonzero(table.kinds == 0))
    return table.kinds, table.packed, table.polygon_m, n_lines, table.perimeter


def reflect(direction, normal) -> np.ndarray:
    """Specular reflection ``d - 2 (d.n) n``, renormalised."""
    d = np.asarray(direction, dtype=float)
    n = np.asarray(normal, dtype=float)
    n = n / np.hypot(n[0], n[1])
    rx, ry = K.reflect(d[0], d[1], n[0], n[1])
    return np.array([rx, ry])


def collision_angle(direction, normal) -> float:
    """Angle in ``[0, pi/2]`` between the line of motion and the wall normal."""
    c = abs(float(np.dot(direction, normal)))
    return math.acos(min(c, 1.0))


def next_collision(table: Table, state: ParticleState, vertex_tol: float | None = None) -> CollisionEvent:
    """Earliest boundary collision along the ray from ``state``."""
    kinds, packed, m_poly, n_lines, _ = _table_args(table)
    x, y = state.position
    dx, dy = state.direction
    dt, k = K.next_hit(kinds, packed, m_poly, x, y, dx, dy, FLIGHT_FLOOR * table.scale)
    if k < 0 or not math.isfinite(dt):
        raise SimulationError(f"no boundary intersection from {state}")
    hx, hy = x + dt * dx, y + dt * dy
    eps_v = DEFAULT_VERTEX_TOL * table.scale if vertex_tol is None else vertex_tol
    nb = K.vertex_neighbour(kinds, packed, n_lines, k, hx, hy, eps_v)
    nx, ny = K.hit_normal(kinds, packed, k, hx, hy)
    normal = np.array([nx, ny])
    return CollisionEvent(
        time=state.time + dt,
        position=np.array([hx, hy]),
        segment=int(k),
        angle=collision_angle(state.direction, normal),
        vertex=nb >= 0,
        s=float(K.arclength(kinds, packed, k, hx, hy)),
        normal=normal,
    )


def is_vertex_hit(event: CollisionEvent, table: Table, vertex_tol: float | None = None) -> bool:
    """True iff the collision lies within ``vertex_tol`` of a corner."""
    if vertex_tol is None:
        vertex_tol = DEFAULT_VERTEX_TOL * table.scale
    if len(table.vertices) == 0:
        return False
    d = np.hypot(*(table.vertices - event.position).T)
    return bool(d.min() <= vertex_tol)


def advance(
    table: Table,
    state: ParticleState,
    t_max: float,
    sample_times=(),
    opening: Opening | None = None,
    event_cap: int = DEFAULT_EVENT_CAP,
    vertex_tol: float | None = None,
    vertex_policy: str = "terminate",
) -> TrajectoryOutcome:
    """Evolve ``state`` until ``t_max``, escape, a vertex hit or the event cap.

    ``counts[j]`` is the number of collisions with time ``<= sample_times[j]``.
    """
    samples = np.ascontiguousarray(sample_times, dtype=float)
    if samples.size and (np.any(np.diff(samples) < 0) or samples[-1] > t_max):
        raise ValueError("sample times must be ascending and <= t_max")
    if event_cap < 1:
        raise ValueError("event cap must be >= 1")
    kinds, packed, m_poly, n_lines, perim = _table_args(table)
    counts = np.zeros(samples.size, dtype=np.int64)
    eps_v = DEFAULT_VERTEX_TOL * table.scale if vertex_tol is None else vertex_tol
    open_lo, open_w = (opening.s_lo, opening.width) if opening is not None else (0.0, 0.0)
    st, t, n, x, y, dx, dy, _ = K.advance_one(
        kinds, packed, m_poly, n_lines, perim,
        float(state.position[0]), float(state.position[1]),
        float(state.direction[0]), float(state.direction[1]),
        float(state.time), int(state.collisions),
        float(t_max), samples, counts,
        opening is not None, open_lo, open_w,
        int(event_cap), float(eps_v), _POLICIES[vertex_policy], FLIGHT_FLOOR * table.scale,
    )
    if st == K.NO_HIT:
        raise SimulationError(f"no boundary intersection at t={t}")
    final = ParticleState(np.array([x, y]), np.array([dx, dy]), t, n)
    reason = _STATUS[st]
    return TrajectoryOutcome(reason, final, counts, None if reason is Outcome.TIME_BUDGET else t)


def trace(table: Table, state: ParticleState, n_events: int, vertex_tol: float | None = None):
    """First ``n_events`` collisions and the state after each reflection.

    Stops early at a vertex hit.  Intended for inspection and tests, not
    ensembles.
    """
    events = []
    states = []
    for _ in range(n_events):
        ev = next_collision(table, state, vertex_tol)
        events.append(ev)
        if ev.vertex:
            break
        d = reflect(state.direction, ev.normal)
        state = replace(state, position=ev.position, direction=d, time=ev.time, collisions=state.collisions + 1)
        states.append(state)
    return events, states
