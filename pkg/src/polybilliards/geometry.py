"""Billiard tables: regular polygons, the circle and the Sinai square-with-disk.

Conventions
-----------
* Polygon{m, r}: vertex ``k`` sits at angle ``2*pi*k/m`` on the circumscribing
  circle of radius ``r`` centred at the origin; sides are numbered ``k`` from
  vertex ``k`` to vertex ``k+1`` (counterclockwise).  Arclength ``s = 0`` is
  vertex 0.
* Circle{r}: centred at the origin, ``s = 0`` at ``(r, 0)``, counterclockwise.
* Sinai{L, R}: square ``[0, L]^2`` with a disk of radius ``R`` at
  ``(L/2, L/2)``.  Segments 0..3 are the square sides starting at the corner
  ``(0, 0)`` (counterclockwise); segment 4 is the disk, parameterised by polar
  angle from ``(L/2 + R, L/2)`` and placed after the square in arclength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "Polygon",
    "Circle",
    "Sinai",
    "TableSpec",
    "LineSegment",
    "ArcSegment",
    "Table",
    "Opening",
    "BoundaryPoint",
    "GeometryError",
    "build_table",
    "mean_collision_time",
    "boundary_point",
    "contains",
    "make_opening",
    "opening_at",
]

# segment kind codes shared with the numba kernels
LINE = 0
ARC = 1


class GeometryError(ValueError):
    """Invalid table or opening specification."""


@dataclass(frozen=True)
class Polygon:
    m: int
    r: float = 1.0

    def validate(self) -> None:
        if int(self.m) != self.m or self.m < 3:
            raise GeometryError(f"polygon needs m >= 3 (got m={self.m})")
        if not self.r > 0:
            raise GeometryError(f"circumradius r must be positive (got r={self.r})")


@dataclass(frozen=True)
class Circle:
    r: float = 1.0

    def validate(self) -> None:
        if not self.r > 0:
            raise GeometryError(f"radius r must be positive (got r={self.r})")


@dataclass(frozen=True)
class Sinai:
    L: float = 1.0
    R: float = 0.25

    def validate(self) -> None:
        if not self.L > 0:
            raise GeometryError(f"square side L must be positive (got L={self.L})")
        if not self.R > 0:
            raise GeometryError(f"disk radius R must be positive (got R={self.R})")
        if not self.R < self.L / 2:
            raise GeometryError(
                f"disk must lie strictly inside the square: need R < L/2 (got R={self.R}, L={self.L})"
            )


TableSpec = Union[Polygon, Circle, Sinai]


@dataclass(frozen=True)
class LineSegment:
    start: tuple[float, float]
    end: tuple[float, float]
    normal: tuple[float, float]  # unit, pointing into the table
    s0: float

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


@dataclass(frozen=True)
class ArcSegment:
    """Full circle of the boundary.

    ``concave`` is True for the circle billiard wall (particle inside the
    circle) and False for the Sinai scatterer (particle outside the disk).
    """

    center: tuple[float, float]
    radius: float
    concave: bool
    s0: float

    @property
    def length(self) -> float:
        return 2.0 * math.pi * self.radius


Segment = Union[LineSegment, ArcSegment]


@dataclass(frozen=True)
class Table:
    spec: TableSpec
    segments: tuple[Segment, ...]
    area: float
    perimeter: float
    vertices: np.ndarray
    packed: np.ndarray = field(repr=False, compare=False)
    kinds: np.ndarray = field(repr=False, compare=False)

    @property
    def scale(self) -> float:
        """Characteristic length: circumradius, radius or square side."""
        if isinstance(self.spec, Sinai):
            return float(self.spec.L)
        return float(self.spec.r)

    @property
    def tau_c(self) -> float:
        return mean_collision_time(self)

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def polygon_m(self) -> int:
        """Side count for a regular polygon, 0 otherwise (kernel fast path)."""
        return int(self.spec.m) if isinstance(self.spec, Polygon) else 0

    def segment_span(self, k: int) -> tuple[float, float]:
        seg = self.segments[k]
        return seg.s0, seg.s0 + seg.length


@dataclass(frozen=True)
class BoundaryPoint:
    position: np.ndarray
    normal: np.ndarray | None
    segment: int
    vertex: bool


@dataclass(frozen=True)
class Opening:
    """Boundary arclength window ``(s_center - width/2, s_center + width/2)`` mod P."""

    s_center: float
    width: float
    perimeter: float

    @property
    def s_lo(self) -> float:
        return (self.s_center - self.width / 2) % self.perimeter

    def contains_s(self, s: float) -> bool:
        # edges excluded: a hit exactly at the rim is reflected
        d = (s - self.s_lo) % self.perimeter
        return 0.0 < d < self.width

    def host_segments(self, table: Table) -> list[tuple[int, tuple[float, float]]]:
        """Segments touched by the opening and the covered sub-interval on each."""
        out = []
        lo = self.s_center - self.width / 2
        pieces = []
        # split the window at the arclength origin
        a, b = lo % self.perimeter, (lo % self.perimeter) + self.width
        if b <= self.perimeter:
            pieces.append((a, b))
        else:
            pieces.append((a, self.perimeter))
            pieces.append((0.0, b - self.perimeter))
        for k, seg in enumerate(table.segments):
            s_a, s_b = seg.s0, seg.s0 + seg.length
            for p, q in pieces:
                u, v = max(p, s_a), min(q, s_b)
                if v > u:
                    out.append((k, (u, v)))
        return out


def _polygon_segments(m: int, r: float) -> tuple[list[LineSegment], np.ndarray]:
    ang = 2.0 * np.pi * np.arange(m) / m
    verts = np.column_stack((r * np.cos(ang), r * np.sin(ang)))
    segs = []
    s = 0.0
    for k in range(m):
        mid = np.pi * (2 * k + 1) / m
        a, b = verts[k], verts[(k + 1) % m]
        seg = LineSegment(
            start=(float(a[0]), float(a[1])),
            end=(float(b[0]), float(b[1])),
            normal=(-math.cos(mid), -math.sin(mid)),
            s0=s,
        )
        segs.append(seg)
        s += seg.length
    return segs, verts


def _sinai_segments(L: float, R: float) -> tuple[list[Segment], np.ndarray]:
    corners = np.array([[0.0, 0.0], [L, 0.0], [L, L], [0.0, L]])
    normals = [(0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)]
    segs: list[Segment] = []
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        segs.append(
            LineSegment(
                start=(float(a[0]), float(a[1])),
                end=(float(b[0]), float(b[1])),
                normal=normals[k],
                s0=k * L,
            )
        )
    segs.append(ArcSegment(center=(L / 2, L / 2), radius=R, concave=False, s0=4 * L))
    return segs, corners


def _pack(segments) -> tuple[np.ndarray, np.ndarray]:
    """Flatten segments into arrays for the kernels.

    Line rows: x0, y0, x1, y1, nx, ny, length, s0.
    Arc rows:  cx, cy, radius, +1 (concave) / -1 (convex), 0, 0, length, s0.
    """
    packed = np.zeros((len(segments), 8))
    kinds = np.zeros(len(segments), dtype=np.int64)
    for k, seg in enumerate(segments):
        if isinstance(seg, LineSegment):
            kinds[k] = LINE
            packed[k] = (*seg.start, *seg.end, *seg.normal, seg.length, seg.s0)
        else:
            kinds[k] = ARC
            packed[k] = (*seg.center, seg.radius, 1.0 if seg.concave else -1.0, 0.0, 0.0, seg.length, seg.s0)
    return packed, kinds


def build_table(spec: TableSpec) -> Table:
    """Construct the boundary and closed-form area/perimeter for ``spec``."""
    if not isinstance(spec, (Polygon, Circle, Sinai)):
        raise GeometryError(f"unknown table spec {spec!r}")
    spec.validate()
    if isinstance(spec, Polygon):
        m, r = int(spec.m), float(spec.r)
        segs, verts = _polygon_segments(m, r)
        area = 0.5 * m * r * r * math.sin(2 * math.pi / m)
        perim = 2 * m * r * math.sin(math.pi / m)
    elif isinstance(spec, Circle):
        r = float(spec.r)
        segs = [ArcSegment(center=(0.0, 0.0), radius=r, concave=True, s0=0.0)]
        verts = np.zeros((0, 2))
        area = math.pi * r * r
        perim = 2 * math.pi * r
    else:
        L, R = float(spec.L), float(spec.R)
        segs, verts = _sinai_segments(L, R)
        area = L * L - math.pi * R * R
        perim = 4 * L + 2 * math.pi * R
    packed, kinds = _pack(segs)
    verts.setflags(write=False)
    packed.setflags(write=False)
    kinds.setflags(write=False)
    return Table(spec, tuple(segs), area, perim, verts, packed, kinds)


def mean_collision_time(table: Table) -> float:
    """Mean free flight time ``pi * A / P`` at unit speed."""
    return math.pi * table.area / table.perimeter


def boundary_point(table: Table, s: float, vertex_tol: float | None = None) -> BoundaryPoint:
    """Point, inward normal and segment at boundary arclength ``s`` (mod P).

    At a vertex (within ``vertex_tol`` of arclength, default ``1e-12 * scale``)
    the normal is undefined and returned as ``None`` with ``vertex=True``.
    """
    if vertex_tol is None:
        vertex_tol = 1e-12 * table.scale
    s = float(s) % table.perimeter
    if s >= table.perimeter:
        # tiny negative s rounds up to P
        s = 0.0
    for k, seg in enumerate(table.segments):
        s_a = seg.s0
        s_b = seg.s0 + seg.length
        if s < s_b or k == len(table.segments) - 1:
            u = s - s_a
            break
    if isinstance(seg, LineSegment):
        a = np.array(seg.start)
        b = np.array(seg.end)
        length = seg.length
        pos = a + (b - a) * (u / length)
        if u <= vertex_tol or length - u <= vertex_tol:
            corner = a if u <= vertex_tol else b
            return BoundaryPoint(corner.copy(), None, k, True)
        return BoundaryPoint(pos, np.array(seg.normal), k, False)
    phi = u / seg.radius
    c = np.array(seg.center)
    radial = np.array([math.cos(phi), math.sin(phi)])
    pos = c + seg.radius * radial
    normal = -radial if seg.concave else radial
    return BoundaryPoint(pos, normal, k, False)


def contains(table: Table, p) -> bool:
    """True iff ``p`` lies strictly inside the accessible region."""
    x, y = float(p[0]), float(p[1])
    spec = table.spec
    if isinstance(spec, Circle):
        return x * x + y * y < spec.r * spec.r
    if isinstance(spec, Sinai):
        if not (0.0 < x < spec.L and 0.0 < y < spec.L):
            return False
        cx = x - spec.L / 2
        cy = y - spec.L / 2
        return cx * cx + cy * cy > spec.R * spec.R
    for seg in table.segments:
        # signed distance along the inward normal
        if (x - seg.start[0]) * seg.normal[0] + (y - seg.start[1]) * seg.normal[1] <= 0.0:
            return False
    return True


def contains_many(table: Table, xy: np.ndarray) -> np.ndarray:
    """Vectorised :func:`contains` over an ``(n, 2)`` array."""
    x, y = xy[:, 0], xy[:, 1]
    spec = table.spec
    if isinstance(spec, Circle):
        return x * x + y * y < spec.r * spec.r
    if isinstance(spec, Sinai):
        inside = (x > 0) & (x < spec.L) & (y > 0) & (y < spec.L)
        return inside & ((x - spec.L / 2) ** 2 + (y - spec.L / 2) ** 2 > spec.R * spec.R)
    ok = np.ones(len(xy), dtype=bool)
    for seg in table.segments:
        ok &= (x - seg.start[0]) * seg.normal[0] + (y - seg.start[1]) * seg.normal[1] > 0.0
    return ok


def bounding_box(table: Table) -> tuple[float, float, float, float]:
    spec = table.spec
    if isinstance(spec, Sinai):
        return 0.0, spec.L, 0.0, spec.L
    if isinstance(spec, Circle):
        return -spec.r, spec.r, -spec.r, spec.r
    v = table.vertices
    return float(v[:, 0].min()), float(v[:, 0].max()), float(v[:, 1].min()), float(v[:, 1].max())


def opening_at(table: Table, s_center: float, width: float) -> Opening:
    """Opening of ``width`` centred at arclength ``s_center``.

    Raises :class:`GeometryError` unless ``0 < width < P``; for the Sinai
    table the window must stay on the outer square.
    """
    P = table.perimeter
    if not width > 0:
        raise GeometryError(f"opening width must be positive (got {width})")
    if not width < P:
        raise GeometryError(f"opening width {width} must be smaller than the perimeter {P}")
    s_center = float(s_center) % P
    if isinstance(table.spec, Sinai):
        square = 4 * table.spec.L
        lo, hi = s_center - width / 2, s_center + width / 2
        if lo < 0.0 or hi > square:
            raise GeometryError("Sinai opening must lie on the outer square")
    return Opening(s_center, float(width), P)


def make_opening(table: Table, width: float, placement: str | None = None) -> Opening:
    """Build an opening from a placement string.

    ``placement`` is ``side:k`` (midpoint of segment k), ``vertex:k`` (centred
    on vertex k) or ``s:<value>``.  The default is the midpoint of segment 0
    for polygons and Sinai and ``s = 0`` for the circle.
    """
    if placement is None:
        placement = "s:0" if isinstance(table.spec, Circle) else "side:0"
    kind, _, arg = placement.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "s":
            s_center = float(arg)
        elif kind == "side":
            k = int(arg)
            if isinstance(table.spec, Sinai) and not 0 <= k < 4:
                raise GeometryError("Sinai openings must sit on square sides 0..3")
            seg = table.segments[k]
            s_center = seg.s0 + seg.length / 2
        elif kind == "vertex":
            k = int(arg)
            if len(table.vertices) == 0:
                raise GeometryError("table has no vertices")
            if not 0 <= k < len(table.vertices):
                raise GeometryError(f"vertex index {k} out of range")
            s_center = table.segments[k].s0
            if isinstance(table.spec, Sinai) and k == 0:
                # corner (0,0) straddles the end of the square, not the disk
                raise GeometryError("Sinai vertex:0 opening would wrap onto the disk; use vertex:1..3")
        else:
            raise GeometryError(f"unknown placement {placement!r}")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise GeometryError(f"bad placement {placement!r}: {exc}") from exc
    return opening_at(table, s_center, width)
