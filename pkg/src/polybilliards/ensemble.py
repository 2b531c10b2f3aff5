"""Liouville-uniform ensembles and closed-table collision statistics."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .dynamics import DEFAULT_EVENT_CAP, DEFAULT_VERTEX_TOL, FLIGHT_FLOOR, ParticleState, SimulationError, _POLICIES
from .geometry import Opening, Table, bounding_box, contains_many

__all__ = [
    "EnsembleConfig",
    "EnsembleRun",
    "MomentSeries",
    "CollisionHistogram",
    "FlaggedTrajectoryWarning",
    "FLAG_WARN_FRACTION",
    "default_sample_times",
    "initial_conditions",
    "sample_initial",
    "simulate",
    "collision_moments",
    "collision_histogram",
]

FLAG_WARN_FRACTION = 1e-3
_SEED_MASK = (1 << 64) - 1
_BATCH = 16  # rejection candidates drawn per round


class FlaggedTrajectoryWarning(UserWarning):
    pass


def default_sample_times(tau_c: float, t_max: float, n: int = 64) -> np.ndarray:
    return np.geomspace(tau_c, t_max, n)


@dataclass(frozen=True)
class EnsembleConfig:
    n_particles: int
    seed: int
    t_max: float
    sample_times: tuple[float, ...] | None = None
    event_cap: int = DEFAULT_EVENT_CAP
    vertex_tol_rel: float = DEFAULT_VERTEX_TOL
    vertex_policy: str = "terminate"
    workers: int = 1

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.sample_times is not None:
            st = np.asarray(self.sample_times, dtype=float)
            if st.size and (np.any(st <= 0) or np.any(np.diff(st) <= 0) or st[-1] > self.t_max):
                raise ValueError("sample times must be strictly ascending within (0, t_max]")
            object.__setattr__(self, "sample_times", tuple(float(v) for v in st))
        if self.vertex_policy not in _POLICIES:
            raise ValueError(f"vertex policy must be one of {sorted(_POLICIES)}")
        if self.event_cap < 1 or self.workers < 1:
            raise ValueError("event cap and worker count must be >= 1")

    def samples_for(self, table: Table) -> np.ndarray:
        if self.sample_times is None:
            return default_sample_times(table.tau_c, self.t_max)
        return np.asarray(self.sample_times, dtype=float)


def _stream(seed: int, index: int) -> np.random.Generator:
    # counter-based: the particle index occupies the top counter word, so
    # streams never overlap and depend only on (seed, index)
    return np.random.Generator(np.random.Philox(key=int(seed) & _SEED_MASK, counter=[0, 0, 0, int(index)]))


def initial_conditions(table: Table, n: int, seed: int, start: int = 0):
    """Positions uniform on the accessible area, angles uniform on [0, 2pi).

    Returns arrays ``x, y, theta`` for particle indices ``start..start+n-1``.
    """
    x0, x1, y0, y1 = bounding_box(table)
    lo = np.array([x0, y0])
    span = np.array([x1 - x0, y1 - y0])
    xs = np.empty(n)
    ys = np.empty(n)
    th = np.empty(n)
    for j in range(n):
        g = _stream(seed, start + j)
        th[j] = 2.0 * math.pi * g.random()
        while True:
            pts = lo + g.random((_BATCH, 2)) * span
            ok = contains_many(table, pts)
            if ok.any():
                p = pts[int(np.argmax(ok))]
                break
        xs[j], ys[j] = p
    return xs, ys, th


def sample_initial(table: Table, config: EnsembleConfig) -> list[ParticleState]:
    xs, ys, th = initial_conditions(table, config.n_particles, config.seed)
    return [ParticleState.from_angle(x, y, t) for x, y, t in zip(xs, ys, th)]


def run_particles(
    table: Table,
    x, y, theta,
    t_max: float,
    samples: np.ndarray,
    opening: Opening | None = None,
    event_cap: int = DEFAULT_EVENT_CAP,
    vertex_tol_rel: float = DEFAULT_VERTEX_TOL,
    vertex_policy: str = "terminate",
    workers: int = 1,
):
    """Advance every particle; each row depends only on its own initial state.

    Returns ``counts (N, S)``, kernel status codes and end times.
    """
    n = len(x)
    samples = np.ascontiguousarray(samples, dtype=float)
    dx = np.cos(theta)
    dy = np.sin(theta)
    counts = np.zeros((n, samples.size), dtype=np.int64)
    status = np.full(n, K.RUNNING, dtype=np.int64)
    end_time = np.zeros(n)
    n_out = np.zeros(n, dtype=np.int64)
    n_lines = int(np.count_nonzero(table.kinds == 0))
    open_lo, open_w = (opening.s_lo, opening.width) if opening is not None else (0.0, 0.0)
    args = (table.kinds, table.packed, table.polygon_m, n_lines, table.perimeter,
            np.ascontiguousarray(x, dtype=float), np.ascontiguousarray(y, dtype=float), dx, dy)
    tail = (float(t_max), samples, counts, opening is not None, open_lo, open_w,
            int(event_cap), vertex_tol_rel * table.scale, _POLICIES[vertex_policy],
            FLIGHT_FLOOR * table.scale, status, end_time, n_out)

    def work(bounds):
        K.advance_batch(*args, bounds[0], bounds[1], *tail)

    n_chunks = max(1, min(n, 4 * workers))
    edges = np.linspace(0, n, n_chunks + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if workers == 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    if np.any(status == K.NO_HIT):
        raise SimulationError("a trajectory lost the boundary (geometry corruption)")
    return counts, status, end_time


def _integer_moments(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """Exactly rounded mean and unbiased variance of integer data."""
    N = int(weights.sum())
    if N == 0:
        return math.nan, math.nan
    s1 = int(np.dot(values.astype(object), weights.astype(object)))
    s2 = int(np.dot((values.astype(object)) ** 2, weights.astype(object)))
    mean = s1 / N
    if N < 2:
        return mean, math.nan
    var = (N * s2 - s1 * s1) / (N * (N - 1))
    return mean, var


@dataclass(frozen=True)
class CollisionHistogram:
    t: float
    n: np.ndarray
    counts: np.ndarray
    usable: int
    flagged: int = 0

    @property
    def pmf(self) -> np.ndarray:
        return self.counts / self.usable

    def as_dict(self) -> dict[int, int]:
        return {int(k): int(c) for k, c in zip(self.n, self.counts)}

    def mean(self) -> float:
        return _integer_moments(self.n, self.counts)[0]

    def variance(self) -> float:
        return _integer_moments(self.n, self.counts)[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "count", "pmf"])
            for k, c, p in zip(self.n, self.counts, self.pmf):
                w.writerow([int(k), int(c), repr(float(p))])


def _histogram_from_column(col: np.ndarray, t: float, flagged: int) -> CollisionHistogram:
    vals, cnt = np.unique(col, return_counts=True)
    return CollisionHistogram(float(t), vals.astype(np.int64), cnt.astype(np.int64), int(cnt.sum()), flagged)


@dataclass(frozen=True)
class MomentSeries:
    t: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    usable: int
    flagged: int
    tau_c: float
    t_max: float

    def rows(self):
        for i in range(len(self.t)):
            yield float(self.t[i]), float(self.mean[i]), float(self.var[i]), self.usable, self.flagged

    @property
    def flagged_fraction(self) -> float:
        return self.flagged / (self.usable + self.flagged)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean_n", "var_n", "usable", "flagged"])
            for t, m, v, u, f in self.rows():
                w.writerow([repr(t), repr(m), repr(v), u, f])

    @classmethod
    def from_csv(cls, path, tau_c: float = math.nan) -> "MomentSeries":
        data = np.genfromtxt(Path(path), delimiter=",", names=True)
        data = np.atleast_1d(data)
        t = np.asarray(data["t"], dtype=float)
        return cls(t, np.asarray(data["mean_n"]), np.asarray(data["var_n"]),
                   int(data["usable"][0]), int(data["flagged"][0]), tau_c, float(t.max()))


@dataclass
class EnsembleRun:
    """Raw per-particle collision counts of one closed-table ensemble."""

    table: Table
    config: EnsembleConfig
    samples: np.ndarray
    counts: np.ndarray = field(repr=False)
    status: np.ndarray = field(repr=False)

    @property
    def usable_mask(self) -> np.ndarray:
        return self.status == K.TIME_BUDGET

    @property
    def usable(self) -> int:
        return int(self.usable_mask.sum())

    @property
    def flagged(self) -> int:
        return len(self.status) - self.usable

    @property
    def flagged_by_reason(self) -> dict[str, int]:
        return {"vertex": int((self.status == K.VERTEX).sum()), "cap": int((self.status == K.EVENT_CAP).sum())}

    def _check_flagged(self) -> None:
        frac = self.flagged / len(self.status)
        if frac > FLAG_WARN_FRACTION:
            warnings.warn(
                f"{self.flagged} of {len(self.status)} trajectories flagged ({frac:.2e}); excluded from statistics",
                FlaggedTrajectoryWarning,
                stacklevel=3,
            )

    def moments(self) -> MomentSeries:
        self._check_flagged()
        good = self.counts[self.usable_mask]
        mean = np.empty(self.samples.size)
        var = np.empty(self.samples.size)
        for j in range(self.samples.size):
            h = _histogram_from_column(good[:, j], self.samples[j], self.flagged)
            mean[j], var[j] = _integer_moments(h.n, h.counts)
        return MomentSeries(self.samples.copy(), mean, var, self.usable, self.flagged,
                            self.table.tau_c, self.config.t_max)

    def histogram(self, t: float) -> CollisionHistogram:
        j = np.flatnonzero(self.samples == t)
        if j.size == 0:
            raise ValueError(f"t={t} is not a sampled time of this run")
        self._check_flagged()
        if self.usable == 0:
            raise ValueError("no usable trajectories")
        return _histogram_from_column(self.counts[self.usable_mask, j[0]], t, self.flagged)


def simulate(table: Table, config: EnsembleConfig, samples=None) -> EnsembleRun:
    samples = config.samples_for(table) if samples is None else np.asarray(samples, dtype=float)
    x, y, th = initial_conditions(table, config.n_particles, config.seed)
    counts, status, _ = run_particles(
        table, x, y, th, config.t_max, samples,
        event_cap=config.event_cap, vertex_tol_rel=config.vertex_tol_rel,
        vertex_policy=config.vertex_policy, workers=config.workers,
    )
    return EnsembleRun(table, config, samples, counts, status)


def collision_moments(table: Table, config: EnsembleConfig) -> MomentSeries:
    """Mean and unbiased variance of the collision count at each sample time."""
    return simulate(table, config).moments()


def collision_histogram(table: Table, config: EnsembleConfig, t: float) -> CollisionHistogram:
    """Empirical distribution of the collision count at time ``t``."""
    if not 0 < t <= config.t_max:
        raise ValueError("t must lie in (0, t_max]")
    run = simulate(table, config, samples=np.array([float(t)]))
    return run.histogram(float(t))
