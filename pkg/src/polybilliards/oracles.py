"""Closed-form collision statistics for the circle and regular-orbit polygons.

All densities are in the continuous collision count ``n`` at fixed time ``t``.
At the inverse-square-root edge of the support the densities return
``numpy.inf`` rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "RegularOrbitParams",
    "circle_mean_count",
    "polygon_mean_count",
    "cb_collision_pdf",
    "cb_collision_cdf",
    "polygon_collision_pdf",
    "polygon_collision_cdf",
    "CircleCollisionLaw",
    "PolygonCollisionLaw",
    "regular_orbit_collision_time",
    "sliding_relaxation_time",
    "vortex_relaxation_time",
]


class DomainError(ValueError):
    pass


def tau_c_circle(r: float) -> float:
    return math.pi * r / 2


def tau_c_polygon(m: int, r: float) -> float:
    return math.pi * r / 2 * math.cos(math.pi / m)


@dataclass(frozen=True)
class RegularOrbitParams:
    """Parity-dependent angles of the regular-orbit approximation for an m-gon."""

    m: int
    phi_c: float
    psi: float
    vertex_angle: float

    @classmethod
    def for_m(cls, m: int) -> "RegularOrbitParams":
        if int(m) != m or m < 3:
            raise DomainError(f"need m >= 3 (got {m})")
        m = int(m)
        if m % 2:
            phi_c, psi = math.pi / (2 * m), 0.0
        else:
            phi_c = math.pi / m
            psi = phi_c
        return cls(m, phi_c, psi, math.pi * (m - 2) / m)

    @property
    def band(self) -> tuple[float, float]:
        """Support of ``n / n_cm``."""
        p = self.phi_c
        return p / math.tan(p), p / math.sin(p)


def circle_mean_count(t: float, r: float) -> float:
    return 2.0 * t / (math.pi * r)


def polygon_mean_count(t: float, m: int, r: float) -> float:
    return t / tau_c_polygon(m, r)


def _cb_pdf_nc(n, n_c):
    n = np.asarray(n, dtype=float)
    edge = math.pi * n_c / 4
    out = np.zeros_like(n)
    inside = n > edge
    u2 = (edge / n[inside]) ** 2
    with np.errstate(divide="ignore"):
        out[inside] = math.pi**2 * n_c**3 / (16 * n[inside] ** 4) / np.sqrt(1.0 - u2)
    out[n == edge] = np.inf
    return out


def cb_collision_pdf(n, t: float, r: float):
    """Circle-billiard density of the collision count at time ``t``.

    Zero for ``n < pi n_c / 4``; ``inf`` exactly at that edge.
    """
    if not (t > 0 and r > 0):
        raise DomainError("t and r must be positive")
    out = _cb_pdf_nc(np.atleast_1d(n), circle_mean_count(t, r))
    return out if np.ndim(n) else float(out[0])


def cb_collision_cdf(n, t: float, r: float):
    """P(count <= n) for the circle density (closed form)."""
    n_c = circle_mean_count(t, r)
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore"):
        u = np.where(n > 0, math.pi * n_c / (4 * np.where(n > 0, n, 1.0)), 1.0)
    u = np.clip(u, 0.0, 1.0)
    return 1.0 - (2 / math.pi) * (np.arcsin(u) - u * np.sqrt(1.0 - u * u))


def polygon_collision_pdf(n, t: float, params: RegularOrbitParams, r: float):
    """Regular-orbit (equivalent-side) density of the collision count in an m-gon."""
    if not (t > 0 and r > 0):
        raise DomainError("t and r must be positive")
    n_cm = polygon_mean_count(t, params.m, r)
    p = params.phi_c
    lo, hi = params.band
    x = np.atleast_1d(np.asarray(n, dtype=float)) / n_cm
    v = x * math.sin(p) / p
    out = np.zeros_like(x)
    inside = (x >= lo) & (v < 1.0)
    out[inside] = math.sin(p) / (n_cm * p * p) / np.sqrt(1.0 - v[inside] ** 2)
    # the edge, allowing for rounding in n / n_cm
    out[(v >= 1.0) & (x <= hi * (1 + 4e-16))] = np.inf
    return out if np.ndim(n) else float(out[0])


def polygon_collision_cdf(n, t: float, params: RegularOrbitParams, r: float):
    n_cm = polygon_mean_count(t, params.m, r)
    p = params.phi_c
    v = np.asarray(n, dtype=float) / n_cm * math.sin(p) / p
    v = np.clip(v, math.cos(p), 1.0)
    return np.clip((np.arcsin(v) - (math.pi / 2 - p)) / p, 0.0, 1.0)


@dataclass(frozen=True)
class CircleCollisionLaw:
    t: float
    r: float = 1.0

    @property
    def mean(self) -> float:
        return circle_mean_count(self.t, self.r)

    @property
    def support(self) -> tuple[float, float]:
        return math.pi * self.mean / 4, math.inf

    def pdf(self, n):
        return cb_collision_pdf(n, self.t, self.r)

    def cdf(self, n):
        return cb_collision_cdf(n, self.t, self.r)


@dataclass(frozen=True)
class PolygonCollisionLaw:
    t: float
    m: int
    r: float = 1.0

    @property
    def params(self) -> RegularOrbitParams:
        return RegularOrbitParams.for_m(self.m)

    @property
    def mean(self) -> float:
        return polygon_mean_count(self.t, self.m, self.r)

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.params.band
        return lo * self.mean, hi * self.mean

    def pdf(self, n):
        return polygon_collision_pdf(n, self.t, self.params, self.r)

    def cdf(self, n):
        return polygon_collision_cdf(n, self.t, self.params, self.r)


def regular_orbit_collision_time(params: RegularOrbitParams, r: float, phi):
    """Characteristic collision time of a regular orbit with collision angle ``phi``.

    Diverges as ``phi - psi`` approaches ``pi/2``; raises :class:`DomainError`
    once ``cos(phi - psi) <= 0``.
    """
    phi = np.asarray(phi, dtype=float)
    d = np.abs(np.remainder(phi - params.psi + math.pi, 2 * math.pi) - math.pi)
    if np.any(d >= math.pi / 2):
        raise DomainError("cos(phi - psi) must be positive (grazing divergence)")
    c = np.cos(phi - params.psi)
    p = params.phi_c
    out = tau_c_circle(r) * math.sin(p) * math.cos(math.pi / params.m) / (p * c)
    return out if out.ndim else float(out)


def sliding_relaxation_time(params: RegularOrbitParams, r: float) -> float:
    return tau_c_circle(r) / math.cos(params.phi_c)


def vortex_relaxation_time(params: RegularOrbitParams, r: float) -> float:
    return tau_c_circle(r) / math.cos(params.vertex_angle / 2)
