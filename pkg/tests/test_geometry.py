import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polybilliards.geometry import (
    Circle,
    GeometryError,
    LineSegment,
    Polygon,
    Sinai,
    boundary_point,
    build_table,
    contains,
    make_opening,
    mean_collision_time,
    opening_at,
)

SPECS = [Polygon(3), Polygon(4), Polygon(7, 2.5), Polygon(64), Circle(1.0), Circle(0.3), Sinai(1.0, 0.1), Sinai(2.0, 0.9)]


def test_square_area_and_perimeter():
    t = build_table(Polygon(4, 1.0))
    side = math.sqrt(2)
    assert t.area == pytest.approx(side**2, rel=1e-15)
    assert t.perimeter == pytest.approx(4 * side, rel=1e-15)
    assert t.perimeter == pytest.approx(5.65685, abs=1e-5)


def test_circle_area_and_perimeter():
    t = build_table(Circle(1.0))
    assert t.area == math.pi
    assert t.perimeter == 2 * math.pi
    assert len(t.vertices) == 0


def test_sinai_area_and_perimeter():
    t = build_table(Sinai(1.0, 0.25))
    assert t.area == pytest.approx(1 - math.pi / 16, rel=1e-15)
    assert t.area == pytest.approx(0.80365, abs=1e-5)
    assert t.perimeter == pytest.approx(4 + math.pi / 2, rel=1e-15)
    assert t.perimeter == pytest.approx(5.5708, abs=1e-4)


def test_polygon_vertices_on_circumcircle():
    t = build_table(Polygon(9, 2.0))
    ang = 2 * np.pi * np.arange(9) / 9
    np.testing.assert_allclose(t.vertices, 2.0 * np.column_stack((np.cos(ang), np.sin(ang))), atol=1e-15)


@pytest.mark.parametrize(
    "spec, message",
    [
        (Polygon(2), "m >= 3"),
        (Polygon(5, 0.0), "positive"),
        (Circle(-1.0), "positive"),
        (Sinai(1.0, 0.5), "R < L/2"),
        (Sinai(1.0, 0.0), "positive"),
        (Sinai(0.0, 0.1), "positive"),
    ],
)
def test_invalid_specs_name_the_constraint(spec, message):
    with pytest.raises(GeometryError, match=message):
        build_table(spec)


def test_mean_collision_time_examples():
    assert mean_collision_time(build_table(Circle(1.0))) == pytest.approx(math.pi / 2, rel=1e-15)
    sq = build_table(Polygon(4, 1.0))
    assert mean_collision_time(sq) == pytest.approx(math.pi / 2 * math.cos(math.pi / 4), rel=1e-12)
    assert mean_collision_time(sq) == pytest.approx(1.110721, abs=1e-6)


def test_mean_collision_time_increases_towards_circle():
    taus = [mean_collision_time(build_table(Polygon(m))) for m in range(3, 300, 7)]
    assert np.all(np.diff(taus) > 0)
    assert taus[-1] < math.pi / 2
    assert math.pi / 2 - taus[-1] < 1e-3


@pytest.mark.parametrize("spec", SPECS)
def test_mean_collision_time_matches_pi_area_over_perimeter(spec):
    t = build_table(spec)
    assert mean_collision_time(t) == pytest.approx(math.pi * t.area / t.perimeter, rel=1e-12)
    if isinstance(spec, Polygon):
        assert mean_collision_time(t) == pytest.approx(math.pi * spec.r / 2 * math.cos(math.pi / spec.m), rel=1e-12)


@pytest.mark.parametrize("spec", SPECS)
def test_segment_spans_partition_perimeter(spec):
    t = build_table(spec)
    s = 0.0
    for seg in t.segments:
        assert seg.s0 == pytest.approx(s, abs=1e-12)
        s += seg.length
    assert s == pytest.approx(t.perimeter, rel=1e-12)


@pytest.mark.parametrize("spec", [s for s in SPECS if isinstance(s, Polygon)])
def test_polygon_shoelace_and_summed_perimeter(spec):
    t = build_table(spec)
    x, y = t.vertices.T
    shoelace = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    assert shoelace == pytest.approx(t.area, rel=1e-12)
    assert sum(seg.length for seg in t.segments) == pytest.approx(t.perimeter, rel=1e-12)


def test_boundary_point_examples(circle, square):
    bp = boundary_point(circle, 0.0)
    np.testing.assert_allclose(bp.position, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(bp.normal, [-1.0, 0.0], atol=1e-15)
    mid = square.segments[0].length / 2
    bp = boundary_point(square, mid)
    np.testing.assert_allclose(bp.position, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(bp.normal, [-math.sqrt(2) / 2, -math.sqrt(2) / 2], atol=1e-15)
    assert bp.segment == 0 and not bp.vertex


def test_boundary_point_at_vertex_is_flagged(square):
    bp = boundary_point(square, square.segments[2].s0)
    assert bp.vertex and bp.normal is None
    np.testing.assert_allclose(bp.position, [-1.0, 0.0], atol=1e-15)


def test_sinai_disk_normal_points_away_from_centre(sinai):
    bp = boundary_point(sinai, 4.0)
    np.testing.assert_allclose(bp.position, [0.75, 0.5], atol=1e-15)
    np.testing.assert_allclose(bp.normal, [1.0, 0.0], atol=1e-15)
    assert bp.segment == 4


def test_contains_examples(circle, sinai, square):
    assert contains(circle, (0.0, 0.0))
    assert not contains(sinai, (0.5, 0.5))
    assert not contains(square, (0.9, 0.9))
    assert contains(square, (0.4, 0.4))
    assert contains(sinai, (0.1, 0.1))


@settings(max_examples=200, deadline=None)
@given(spec_i=st.integers(0, len(SPECS) - 1), s=st.floats(-50, 50, allow_nan=False))
def test_boundary_point_is_periodic_and_normal_points_inside(spec_i, s):
    t = build_table(SPECS[spec_i])
    a = boundary_point(t, s)
    b = boundary_point(t, s + t.perimeter)
    np.testing.assert_allclose(a.position, b.position, atol=1e-9 * t.scale)
    if a.vertex:
        return
    # stay clear of corners where the displaced point may cross a neighbour side
    if len(t.vertices):
        if np.min(np.hypot(*(t.vertices - a.position).T)) < 1e-6 * t.scale:
            return
    eps = 1e-9 * t.scale
    assert contains(t, a.position + eps * a.normal)
    assert not contains(t, a.position - eps * a.normal)


def test_boundary_point_wraps_modulo_perimeter(square):
    a = boundary_point(square, square.perimeter + 0.1)
    b = boundary_point(square, 0.1)
    np.testing.assert_allclose(a.position, b.position, atol=1e-15)


def test_line_segment_normals_are_unit_and_inward(pentagon):
    for seg in pentagon.segments:
        assert isinstance(seg, LineSegment)
        assert math.hypot(*seg.normal) == pytest.approx(1.0, abs=1e-15)
        mid = 0.5 * (np.array(seg.start) + np.array(seg.end))
        assert np.dot(-mid, seg.normal) > 0


class TestOpenings:
    def test_default_placements(self, circle, square, sinai):
        assert make_opening(circle, 0.05).s_center == 0.0
        assert make_opening(square, 0.05).s_center == pytest.approx(square.segments[0].length / 2)
        assert make_opening(sinai, 0.05).s_center == pytest.approx(0.5)

    def test_vertex_and_arclength_placements(self, square):
        op = make_opening(square, 0.1, "vertex:2")
        assert op.s_center == pytest.approx(square.segments[2].s0)
        assert make_opening(square, 0.1, "s:1.25").s_center == 1.25

    def test_interval_membership_excludes_edges(self, circle):
        op = opening_at(circle, 1.0, 0.2)
        assert op.contains_s(1.0)
        assert op.contains_s(0.9 + 1e-12)
        assert not op.contains_s(0.9)
        assert not op.contains_s(1.1)

    def test_window_wraps_through_origin(self, circle):
        op = make_opening(circle, 0.2)
        assert op.contains_s(0.05)
        assert op.contains_s(circle.perimeter - 0.05)
        hosts = op.host_segments(circle)
        assert sum(b - a for _, (a, b) in hosts) == pytest.approx(0.2)

    def test_host_segments_across_a_vertex(self, square):
        op = make_opening(square, 0.2, "vertex:1")
        hosts = op.host_segments(square)
        assert [k for k, _ in hosts] == [0, 1]
        assert sum(b - a for _, (a, b) in hosts) == pytest.approx(0.2)

    def test_width_must_be_below_perimeter(self, circle):
        with pytest.raises(GeometryError, match="perimeter"):
            make_opening(circle, circle.perimeter)
        with pytest.raises(GeometryError):
            make_opening(circle, 0.0)

    def test_sinai_opening_must_avoid_the_disk(self, sinai):
        with pytest.raises(GeometryError, match="outer square"):
            make_opening(sinai, 0.1, "s:4.2")
        with pytest.raises(GeometryError):
            make_opening(sinai, 0.1, "side:4")
        assert make_opening(sinai, 0.1, "vertex:2").s_center == pytest.approx(2.0)

    def test_bad_placement_string(self, square):
        with pytest.raises(GeometryError):
            make_opening(square, 0.1, "corner:1")
        with pytest.raises(GeometryError):
            make_opening(square, 0.1, "side:x")
        with pytest.raises(GeometryError):
            make_opening(build_table(Circle()), 0.1, "vertex:0")
