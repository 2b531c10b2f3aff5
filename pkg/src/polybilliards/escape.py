"""Weakly open billiards: escape times and survival curves."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as K
from .ensemble import EnsembleConfig, initial_conditions, run_particles
from .geometry import GeometryError, Opening, Table

__all__ = [
    "EscapeStatus",
    "EscapeRecord",
    "EscapeRecords",
    "SurvivalCurve",
    "CrossoverEstimate",
    "WideOpeningWarning",
    "run_open",
    "survival_curve",
    "mean_escape_time",
    "opening_for_escape_time",
    "crossover_m_alpha",
    "default_survival_grid",
]


class WideOpeningWarning(UserWarning):
    pass


class EscapeStatus(str, Enum):
    ESCAPED = "escaped"
    SURVIVED = "survived"
    FLAGGED = "flagged"


@dataclass(frozen=True)
class EscapeRecord:
    particle: int
    status: EscapeStatus
    time: float  # escape time, t_max for survivors, termination time for flagged


@dataclass(frozen=True)
class EscapeRecords:
    """Escape outcomes of an ensemble, stored column-wise."""

    escape_time: np.ndarray  # nan unless escaped
    status: np.ndarray  # kernel status codes
    t_max: float
    tau_e: float = math.nan

    def __len__(self) -> int:
        return len(self.status)

    def __iter__(self):
        for i, st in enumerate(self.status):
            if st == K.ESCAPED:
                yield EscapeRecord(i, EscapeStatus.ESCAPED, float(self.escape_time[i]))
            elif st == K.TIME_BUDGET:
                yield EscapeRecord(i, EscapeStatus.SURVIVED, self.t_max)
            else:
                yield EscapeRecord(i, EscapeStatus.FLAGGED, math.nan)

    @classmethod
    def from_records(cls, records, t_max: float, tau_e: float = math.nan) -> "EscapeRecords":
        records = list(records)
        times = np.full(len(records), np.nan)
        status = np.empty(len(records), dtype=np.int64)
        code = {EscapeStatus.ESCAPED: K.ESCAPED, EscapeStatus.SURVIVED: K.TIME_BUDGET,
                EscapeStatus.FLAGGED: K.VERTEX}
        for i, rec in enumerate(records):
            status[i] = code[EscapeStatus(rec.status)]
            if status[i] == K.ESCAPED:
                times[i] = rec.time
        return cls(times, status, t_max, tau_e)

    @property
    def escaped(self) -> np.ndarray:
        return self.status == K.ESCAPED

    @property
    def usable(self) -> int:
        return int(np.isin(self.status, (K.ESCAPED, K.TIME_BUDGET)).sum())

    @property
    def flagged(self) -> int:
        return len(self) - self.usable

    def to_csv(self, path) -> None:
        """``particle,escape_time``; survivors get an empty escape time."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["particle", "escape_time"])
            for i, st in enumerate(self.status):
                if st == K.ESCAPED:
                    w.writerow([i, repr(float(self.escape_time[i]))])
                elif st == K.TIME_BUDGET:
                    w.writerow([i, ""])


@dataclass(frozen=True)
class SurvivalCurve:
    t: np.ndarray
    N: np.ndarray
    S: np.ndarray
    tau_e: float
    t_max: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "N", "S"])
            for t, n, s in zip(self.t, self.N, self.S):
                w.writerow([repr(float(t)), int(n), repr(float(s))])

    @classmethod
    def from_csv(cls, path, tau_e: float = math.nan) -> "SurvivalCurve":
        data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True))
        t = np.asarray(data["t"], dtype=float)
        return cls(t, np.asarray(data["N"]).astype(np.int64), np.asarray(data["S"], dtype=float),
                   tau_e, float(t.max()))


def mean_escape_time(table: Table, width: float) -> float:
    """``tau_c * P / width``."""
    if not 0 < width < table.perimeter:
        raise GeometryError("opening width must lie in (0, P)")
    return table.tau_c * table.perimeter / width


def opening_for_escape_time(table: Table, tau_e: float) -> float:
    """Opening width giving mean escape time ``tau_e`` (inverse of :func:`mean_escape_time`)."""
    return table.tau_c * table.perimeter / tau_e


def default_survival_grid(tau_e: float, t_max: float, n: int = 96) -> np.ndarray:
    return np.geomspace(tau_e / 10, t_max, n)


def run_open(table: Table, opening: Opening, config: EnsembleConfig) -> EscapeRecords:
    """Advance each particle until it leaves through ``opening`` or ``t_max``."""
    P = table.perimeter
    if not opening.width < P / 10:
        raise GeometryError(f"opening width {opening.width} is not small against the perimeter (need < P/10 = {P / 10})")
    if opening.width > P / 100:
        warnings.warn(f"opening width {opening.width:.4g} exceeds P/100", WideOpeningWarning, stacklevel=2)
    x, y, th = initial_conditions(table, config.n_particles, config.seed)
    _, status, end_time = run_particles(
        table, x, y, th, config.t_max, np.empty(0), opening=opening,
        event_cap=config.event_cap, vertex_tol_rel=config.vertex_tol_rel,
        vertex_policy=config.vertex_policy, workers=config.workers,
    )
    times = np.where(status == K.ESCAPED, end_time, np.nan)
    return EscapeRecords(times, status, config.t_max, mean_escape_time(table, opening.width))


def survival_curve(records, grid) -> SurvivalCurve:
    """``S(t) = N(t) / N(0)``, ``N(t)`` counting particles not escaped by ``t``.

    A particle escaping exactly at ``t`` is gone at ``t``.  Flagged
    trajectories are excluded from ``N(0)``.  A leading ``t = 0`` row is
    always included.
    """
    if not isinstance(records, EscapeRecords):
        records = list(records)
        if not records:
            raise ValueError("no escape records")
        t_max = max((r.time for r in records if r.status == EscapeStatus.SURVIVED), default=math.inf)
        records = EscapeRecords.from_records(records, t_max)
    if len(records) == 0:
        raise ValueError("no escape records")
    n0 = records.usable
    if n0 == 0:
        raise ValueError("every trajectory was flagged")
    grid = np.asarray(grid, dtype=float)
    if grid.size and (np.any(grid <= 0) or np.any(np.diff(grid) <= 0)):
        raise ValueError("grid must be strictly ascending and positive")
    esc = np.sort(records.escape_time[records.escaped])
    gone = np.searchsorted(esc, grid, side="right")
    N = np.concatenate(([n0], n0 - gone)).astype(np.int64)
    t = np.concatenate(([0.0], grid))
    return SurvivalCurve(t, N, N / n0, records.tau_e, records.t_max)


@dataclass(frozen=True)
class CrossoverEstimate:
    value: float
    nearest: int
    degenerate: bool


def crossover_m_alpha(r: float, width: float) -> CrossoverEstimate:
    """Side count ``2 pi r / width`` above which the primary decay channel closes."""
    if not (r > 0 and width > 0):
        raise ValueError("r and width must be positive")
    val = 2 * math.pi * r / width
    degenerate = val <= 1.0 + 1e-12
    if val < 1.0 - 1e-12:
        raise ValueError("opening wider than the circumference")
    return CrossoverEstimate(val, int(math.floor(val + 0.5)), degenerate)
